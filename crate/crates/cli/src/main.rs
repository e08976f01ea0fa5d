use std::process::ExitCode;

fn main() -> ExitCode {
    bvq_cli::run::main_entry()
}
