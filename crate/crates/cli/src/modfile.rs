//! On-disk description of a quadratic module.
//!
//! The file is a JSON object with four arrays: `generators` (name and
//! degree), `differential` (source, target, coefficient), `pairing`
//! (left, right, coefficient), and `parameters` (names usable inside
//! coefficients).  Coefficients follow the grammar in [`crate::poly`].
//! Missing sections default to empty, so a bare complex and a full
//! quadratic module share the format.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use bvq_core::{GradedComplex, GradedMap, GradedSpace, QuadraticModule, Scalar};

use crate::poly;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleFile {
    pub generators: Vec<GeneratorEntry>,
    #[serde(default)]
    pub differential: Vec<DifferentialEntry>,
    #[serde(default)]
    pub pairing: Vec<PairingEntry>,
    #[serde(default)]
    pub parameters: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub name: String,
    pub degree: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferentialEntry {
    pub source: String,
    pub target: String,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingEntry {
    pub left: String,
    pub right: String,
    pub coefficient: String,
}

/// Errors while turning a file into library structures.  Schema errors
/// mean the file itself is unusable; math errors mean the description
/// was read fine but violates an invariant of the structure it claims
/// to describe.
#[derive(Debug)]
pub enum BuildError {
    Schema(String),
    Math(bvq_core::Error),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::Schema(msg) => write!(f, "{msg}"),
            BuildError::Math(err) => write!(f, "{err}"),
        }
    }
}

fn schema(msg: impl Into<String>) -> BuildError {
    BuildError::Schema(msg.into())
}

pub fn read_file(path: &Path) -> Result<(ModuleFile, Vec<u8>), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mf: ModuleFile = serde_json::from_slice(&bytes)
        .map_err(|e| format!("{} is not a valid module file: {e}", path.display()))?;
    Ok((mf, bytes))
}

pub fn to_json(mf: &ModuleFile) -> String {
    let mut s = serde_json::to_string_pretty(mf).expect("module files always serialize");
    s.push('\n');
    s
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Declared parameters as a set, after shape checks: parameters must be
/// identifiers, free of duplicates, and distinct from generator names.
pub fn declared_parameters(mf: &ModuleFile) -> Result<BTreeSet<String>, BuildError> {
    let mut declared = BTreeSet::new();
    for p in &mf.parameters {
        if !is_identifier(p) {
            return Err(schema(format!("parameter '{p}' is not an identifier")));
        }
        if !declared.insert(p.clone()) {
            return Err(schema(format!("parameter '{p}' is declared twice")));
        }
    }
    for g in &mf.generators {
        if declared.contains(&g.name) {
            return Err(schema(format!(
                "name '{}' is both a generator and a parameter",
                g.name
            )));
        }
    }
    Ok(declared)
}

fn coefficient(
    raw: &str,
    declared: &BTreeSet<String>,
    location: &str,
) -> Result<Scalar, BuildError> {
    let ast = poly::parse(raw).map_err(|e| schema(format!("{location}: {e}")))?;
    poly::eval_scalar(&ast, declared).map_err(|e| schema(format!("{location}: {e}")))
}

pub fn build_complex(mf: &ModuleFile) -> Result<GradedComplex, BuildError> {
    let declared = declared_parameters(mf)?;
    for g in &mf.generators {
        if !is_identifier(&g.name) {
            return Err(schema(format!("generator '{}' is not an identifier", g.name)));
        }
    }
    let named: Vec<(String, i64)> = mf
        .generators
        .iter()
        .map(|g| (g.name.clone(), g.degree))
        .collect();
    let space = GradedSpace::new(named).map_err(|e| schema(e.to_string()))?;

    let mut d = GradedMap::zero(space.clone(), space.clone(), 1);
    for (k, entry) in mf.differential.iter().enumerate() {
        let location = format!("differential entry {}", k + 1);
        let s = space
            .id(&entry.source)
            .map_err(|_| schema(format!("{location}: unknown generator '{}'", entry.source)))?;
        let t = space
            .id(&entry.target)
            .map_err(|_| schema(format!("{location}: unknown generator '{}'", entry.target)))?;
        let c = coefficient(&entry.coefficient, &declared, &location)?;
        d.add_to(s, t, c).map_err(|e| schema(format!("{location}: {e}")))?;
    }
    GradedComplex::new(space, d).map_err(BuildError::Math)
}

pub fn build_module(mf: &ModuleFile) -> Result<QuadraticModule, BuildError> {
    let complex = build_complex(mf)?;
    let declared = declared_parameters(mf)?;
    let mut entries = Vec::new();
    for (k, entry) in mf.pairing.iter().enumerate() {
        let location = format!("pairing entry {}", k + 1);
        for name in [&entry.left, &entry.right] {
            complex
                .space
                .id(name)
                .map_err(|_| schema(format!("{location}: unknown generator '{name}'")))?;
        }
        let c = coefficient(&entry.coefficient, &declared, &location)?;
        entries.push((entry.left.as_str(), entry.right.as_str(), c));
    }
    QuadraticModule::from_entries(complex, entries).map_err(|e| schema(e.to_string()))
}
