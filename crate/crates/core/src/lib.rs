//! Chain-level linear Batalin-Vilkovisky quantization over the rationals.
//!
//! The library builds shifted Heisenberg Lie algebras from quadratic
//! modules, forms their enveloping algebras in several flavors (shifted
//! Poisson, Beilinson-Drinfeld, and the twisted tensor model), takes
//! Chevalley-Eilenberg chains on weight truncations, and computes exact
//! cohomology.  A determinant-line check certifies when a quantization is
//! one-dimensional, bar/cobar constructions provide shadow checks, and a
//! divergence complex recovers Gaussian moments.
//!
//! All arithmetic is exact: scalars are rationals or polynomials over the
//! rationals in named parameters.  Nothing is floating point and no
//! tolerance appears anywhere.

pub mod barcobar;
pub mod cohomology;
pub mod corpus;
pub mod divergence;
pub mod envelope;
pub mod error;
pub mod graded;
pub mod lie1;
pub mod linalg;
pub mod quantize;
pub mod scalar;
pub mod symalg;

pub use barcobar::{
    bar, check_composition, cobar, counit_map, heis_on_morphism, weight_cohomology, BarCoalgebra,
    CoalgebraMorphism, CobarAlgebra, CounitMap,
};
pub use cohomology::{cohomology, euler_characteristic, CohomologyReport, DegreeSummary};
pub use corpus::{
    corpus_rng, random_morphism_pair, random_nondegenerate_module,
    random_positive_definite_action,
};
pub use divergence::{
    bv_laplacian, classical_h0, classical_part, divergence_op, expectation, polyvectors,
    quadratic_action, schouten, symmetric_action, unit_action, wick_oracle, PolyvectorAlgebra,
    QuadraticAction,
};
pub use envelope::{
    bind_central, ce_chains, check_axioms, compare_env_ce, u_bd, u_e0t, u_p0, CentralBinding,
    EnvCeComparison, EnvKind, EnvelopedAlgebra, HBAR,
};
pub use error::{Error, Result, ValidationReport, Violation};
pub use graded::{
    check_chain_map, cone, dual, format_lincomb, lincomb_add, oplus_complex, shift, tensor, GenId,
    GradedComplex, GradedMap, GradedSpace, Generator, LinComb,
};
pub use lie1::{
    compose_morphisms, cotangent, free_lie1, free_lie1_dimensions, free_lie1_weighted,
    heisenberg, is_nondegenerate, oplus, symplectic_normal_form, validate_lie1,
    validate_morphism, validate_quadratic, FreeLieTruncation, LieElement, QuadraticModule,
    QuadraticMorphism, ShiftedLieAlgebra, SymplecticAtom, SymplecticAtomDecomposition,
};
pub use quantize::{
    check_monoidal, cotangent_quantize, dequantize, det_line, family_module, family_scan,
    predicted_degree, quantize, quantize_with, CotangentQuantization, DetLineVerdict,
    FamilyQuadraticModule, FamilyScanReport, QuantizationResult, StabilizationCertificate,
};
pub use scalar::{rational, rational_int, Rational, Scalar};
pub use symalg::{
    complex_of_operator, coproduct, corestrictions_of_map, exp_weight_lowering, extend_operator,
    is_coderivation, is_comodule_map, leibniz_failure, sym_truncation, AlgebraMap, Element,
    Monomial, Operator, TensorElement, TruncatedSymAlgebra,
};
