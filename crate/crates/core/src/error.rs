//! Error and validation-report types shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Hard failures: construction errors, precondition violations, resource
/// guards.  Checks that are themselves the point of an operation (axiom
/// audits, morphism validation) return a [`ValidationReport`] instead.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("degree mismatch: {context}")]
    DegreeMismatch { context: String },

    #[error("differential does not square to zero: d^2({witness}) = {value}")]
    DSquaredNonzero { witness: String, value: String },

    #[error("duplicate generator name {name:?}")]
    DuplicateGenerator { name: String },

    #[error("unknown generator name {name:?}")]
    UnknownGenerator { name: String },

    #[error("scalar still depends on parameter(s) {parameters:?}: {context}")]
    UnspecializedParameter {
        parameters: Vec<String>,
        context: String,
    },

    #[error("weight {weight} exceeds the truncation cutoff {cutoff}")]
    CutoffExceeded { weight: usize, cutoff: usize },

    #[error("truncation with {basis} basis monomials exceeds the configured ceiling {ceiling}")]
    CutoffTooLargeForMemory { basis: usize, ceiling: usize },

    #[error("operator is not strictly weight-lowering on {witness}")]
    NotWeightLowering { witness: String },

    #[error("operator must have degree zero, found degree {degree}")]
    NotDegreeZero { degree: i64 },

    #[error("invalid quadratic module: {report}")]
    InvalidQuadraticModule { report: ValidationReport },

    #[error("invalid quadratic morphism: {report}")]
    InvalidMorphism { report: ValidationReport },

    #[error("invalid shifted Lie algebra: {report}")]
    InvalidLieAlgebra { report: ValidationReport },

    #[error("pairing is degenerate: {context}")]
    DegeneratePairing { context: String },

    #[error("operation requires a zero differential, but d({witness}) != 0")]
    NonzeroDifferential { witness: String },

    #[error("generator {name:?} is not central: [{name}, {witness}] != 0")]
    NotCentral { name: String, witness: String },

    #[error("generator {name:?} is not closed: d({name}) != 0")]
    NotClosed { name: String },

    #[error("differential does not preserve weight on {witness}")]
    WeightNotGraded { witness: String },

    #[error("cutoff stabilization failed: {context}")]
    Unstable { context: String },

    #[error("specialization at {value} is invalid: {source}")]
    InvalidSpecialization {
        value: String,
        #[source]
        source: Box<Error>,
    },

    #[error("reduction left an odd-degree monomial unreduced: {witness}")]
    OddDegreeUnreduced { witness: String },

    #[error("parse error: {context}")]
    ParseError { context: String },

    #[error("validation error: {context}")]
    ValidationError { context: String },
}

/// One violated axiom, with a witness that makes the failure reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Which check failed, e.g. `"transported antisymmetry"`.
    pub check: &'static str,
    /// The basis element(s) on which it failed.
    pub witness: String,
    /// Left-hand side, right-hand side, or whatever makes the gap concrete.
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} at {}: {}", self.check, self.witness, self.detail)
    }
}

/// Outcome of an axiom audit.  Empty means every checked identity held
/// exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, check: &'static str, witness: impl Into<String>, detail: impl Into<String>) {
        self.violations.push(Violation {
            check,
            witness: witness.into(),
            detail: detail.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let mut first = true;
        for v in &self.violations {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
