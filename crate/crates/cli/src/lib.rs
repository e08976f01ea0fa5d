//! Command line front end for the quantization library: module files
//! in, reports out.  See [`run::Cli`] for the command surface and
//! [`report::Report`] for the output contract.

pub mod modfile;
pub mod poly;
pub mod report;
pub mod run;
