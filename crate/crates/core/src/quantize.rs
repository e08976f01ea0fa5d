//! Quantization of quadratic modules through the Heisenberg envelope.
//!
//! `quantize` adjoins the central generator, builds the deformed envelope of
//! the resulting algebra, binds the deformation parameter and the central
//! generator to constants, and reads off the cohomology of the truncated
//! complex.
//!
//! Truncation cohomology is reported stably.  A naive weight truncation
//! keeps spurious classes near the top weight: monomials whose bounding
//! cochains sit just above the cutoff look like cohomology at every cutoff,
//! so comparing raw reports across cutoffs certifies nothing.  Instead each
//! reported dimension is the rank of the comparison map into the truncation
//! two weights larger: cycles of weight at most `N`, modulo boundaries of
//! weight at most `N + 2`.  The inclusion is a map of complexes because the
//! differential never raises weight.  The certificate repeats the
//! computation at three consecutive cutoffs and records whether the
//! profiles agree.

use std::collections::{BTreeMap, HashMap};

use crate::cohomology::{matrix_on_ids, CohomologyReport, DegreeSummary};
use crate::envelope::{bind_central, u_bd, CentralBinding, EnvelopedAlgebra, HBAR};
use crate::error::{Error, Result};
use crate::graded::{sign_pow, GenId, GradedComplex, GradedMap, GradedSpace};
use crate::lie1::{heisenberg, is_nondegenerate, oplus, validate_quadratic, QuadraticModule};
use crate::lie1::cotangent;
use crate::linalg::RowMatrix;
use crate::scalar::{rational_int, Rational, Scalar};
use crate::symalg::{complex_of_operator, Element, Monomial, Operator, TruncatedSymAlgebra};

/// Outcome of quantizing one quadratic module at one weight cutoff.
#[derive(Clone, Debug)]
pub struct QuantizationResult {
    /// The bound complex, truncated at `cutoff`.
    pub complex: GradedComplex,
    pub cutoff: u32,
    /// Stable cohomology of the truncation: kernels are taken at `cutoff`,
    /// boundaries inside the truncation two weights larger.
    pub cohomology: CohomologyReport,
    /// The degree and dimension of the surviving line, present exactly when
    /// the stable profile is a single class and the certificate holds.
    pub det_line: Option<(i64, usize)>,
    pub stabilization: StabilizationCertificate,
}

/// Exact equality of stable cohomology profiles at three consecutive
/// cutoffs.  All three are computed inside one ambient truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizationCertificate {
    pub cutoffs: [u32; 3],
    /// Nonzero stable dimensions per degree, one profile per cutoff.
    pub profiles: [BTreeMap<i64, usize>; 3],
    pub stable: bool,
}

/// Quantize with the standard binding: deformation parameter and central
/// generator both set to one.
pub fn quantize(q: &QuadraticModule, cutoff: u32) -> Result<QuantizationResult> {
    quantize_pipeline(q, cutoff, None)
}

/// Quantize with an explicit binding.  The binding may only touch the
/// deformation parameter and the adjoined central generator; module data
/// stays symbolic and is rejected if any other parameter survives.
pub fn quantize_with(
    q: &QuadraticModule,
    cutoff: u32,
    binding: &CentralBinding,
) -> Result<QuantizationResult> {
    quantize_pipeline(q, cutoff, Some(binding))
}

fn checked_module(q: &QuadraticModule) -> Result<()> {
    let mut report = validate_quadratic(q);
    if let Err(e) = q.complex.verify_d_squared() {
        report.push("differential squares to zero", e.to_string(), "");
    }
    if !report.is_valid() {
        return Err(Error::InvalidQuadraticModule { report });
    }
    Ok(())
}

fn quantize_pipeline(
    q: &QuadraticModule,
    cutoff: u32,
    binding: Option<&CentralBinding>,
) -> Result<QuantizationResult> {
    checked_module(q)?;
    let g = heisenberg(q)?;
    let central = g
        .space()
        .name(g.central.expect("the Heisenberg algebra has a central generator"))
        .to_string();
    let standard;
    let binding = match binding {
        Some(b) => {
            for (name, _) in &b.parameters {
                if name != HBAR {
                    return Err(Error::ValidationError {
                        context: format!(
                            "binding names parameter {name:?}; only {HBAR:?} is central here"
                        ),
                    });
                }
            }
            for (name, _) in &b.generators {
                if *name != central {
                    return Err(Error::ValidationError {
                        context: format!(
                            "binding names generator {name:?}; only {central:?} is central here"
                        ),
                    });
                }
            }
            b
        }
        None => {
            standard = CentralBinding::parameter(HBAR, rational_int(1))
                .and_generator(&central, rational_int(1));
            &standard
        }
    };
    // two extra weights for the boundary comparison, two more for the
    // certificate cutoffs above the base
    let env = u_bd(&g, cutoff + 4)?;
    let bound = bind_central(&env, binding)?;
    let (ambient, weights) = sym_complex(&bound.algebra, &bound.differential)?;
    let params = ambient.parameters();
    if !params.is_empty() {
        return Err(Error::UnspecializedParameter {
            parameters: params.into_iter().collect(),
            context: "bind or specialize every parameter before taking cohomology".into(),
        });
    }
    ambient.verify_d_squared()?;

    let cutoffs = [cutoff, cutoff + 1, cutoff + 2];
    let base = stable_summaries(&ambient, &weights, cutoff);
    let profiles = [
        CohomologyReport { degrees: base.clone() }.nonzero(),
        CohomologyReport { degrees: stable_summaries(&ambient, &weights, cutoff + 1) }.nonzero(),
        CohomologyReport { degrees: stable_summaries(&ambient, &weights, cutoff + 2) }.nonzero(),
    ];
    let stable = profiles[0] == profiles[1] && profiles[1] == profiles[2];
    let cohomology = CohomologyReport { degrees: base };
    let det_line = if stable && cohomology.total_dimension() == 1 {
        cohomology.nonzero().into_iter().next()
    } else {
        None
    };
    let complex = restrict_to_weight(&ambient, &weights, cutoff)?;
    Ok(QuantizationResult {
        complex,
        cutoff,
        cohomology,
        det_line,
        stabilization: StabilizationCertificate { cutoffs, profiles, stable },
    })
}

/// The cochain complex of the bound operator with the weight of each basis
/// monomial, in id order.
fn sym_complex(
    alg: &TruncatedSymAlgebra,
    op: &Operator,
) -> Result<(GradedComplex, Vec<u32>)> {
    let complex = complex_of_operator(alg, op)?;
    let weights = alg.basis().iter().map(|m| m.weight()).collect();
    Ok((complex, weights))
}

/// Per degree: cycles of weight at most `m` modulo boundaries of weight at
/// most `m + 2`.  `kernel_dim` counts the cycles, `boundary_dim` the ones
/// that bound in the larger truncation.  The ambient complex must extend at
/// least to weight `m + 2`.
fn stable_summaries(ambient: &GradedComplex, weights: &[u32], m: u32) -> Vec<DegreeSummary> {
    let space = &ambient.space;
    let d = &ambient.differential;
    let mut window: Option<(i64, i64)> = None;
    for i in space.ids() {
        if weights[i] <= m {
            let deg = space.degree(i);
            window = Some(match window {
                None => (deg, deg),
                Some((lo, hi)) => (lo.min(deg), hi.max(deg)),
            });
        }
    }
    let Some((lo, hi)) = window else { return Vec::new() };
    let ids_at = |degree: i64, wmax: u32| -> Vec<GenId> {
        space.ids().filter(|&i| space.degree(i) == degree && weights[i] <= wmax).collect()
    };
    let mut out = Vec::new();
    for degree in lo..=hi {
        let rows = ids_at(degree, m);
        let cols = ids_at(degree + 1, m);
        let kernel = matrix_on_ids(d, &rows, &cols).kernel_basis();

        let cols_large = ids_at(degree, m + 2);
        let position: HashMap<GenId, usize> =
            cols_large.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut cycles = RowMatrix::new(cols_large.len());
        for combo in &kernel {
            cycles.push_row(combo.iter().map(|(r, c)| (position[&rows[*r]], c.clone())));
        }
        let boundaries =
            matrix_on_ids(d, &ids_at(degree - 1, m + 2), &cols_large);
        let boundary_rank = boundaries.rank();
        let surviving = boundaries.rank_with(&cycles) - boundary_rank;
        out.push(DegreeSummary {
            degree,
            space_dim: rows.len(),
            kernel_dim: kernel.len(),
            boundary_dim: kernel.len() - surviving,
            cohomology_dim: surviving,
        });
    }
    out
}

fn restrict_to_weight(
    ambient: &GradedComplex,
    weights: &[u32],
    m: u32,
) -> Result<GradedComplex> {
    let space = &ambient.space;
    let ids: Vec<GenId> = space.ids().filter(|&i| weights[i] <= m).collect();
    let sub = GradedSpace::new(
        ids.iter().map(|&i| (space.name(i).to_string(), space.degree(i))),
    )?;
    let index_of: BTreeMap<GenId, usize> =
        ids.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut d = GradedMap::zero(sub.clone(), sub.clone(), ambient.differential.degree);
    for &i in &ids {
        for (t, c) in ambient.differential.image_of(i) {
            // the differential never raises weight, so targets stay inside
            d.add_to(index_of[&i], index_of[&t], c)?;
        }
    }
    GradedComplex::new(sub, d)
}

/// Where the surviving line of a zero-differential nondegenerate module
/// must sit: the sum of the odd generator degrees.
pub fn predicted_degree(q: &QuadraticModule) -> Result<i64> {
    let space = q.space();
    if !q.complex.differential.is_zero() {
        let witness = space
            .ids()
            .find(|&i| q.complex.differential.image_of(i).values().any(|c| !c.is_zero()))
            .map(|i| space.name(i).to_string())
            .unwrap_or_default();
        return Err(Error::NonzeroDifferential { witness });
    }
    if !is_nondegenerate(q)? {
        return Err(Error::DegeneratePairing {
            context: "the pairing is not a quasi-isomorphism onto the shifted dual".into(),
        });
    }
    Ok(space.ids().filter(|&i| space.degree(i) % 2 != 0).map(|i| space.degree(i)).sum())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetLineVerdict {
    Invertible { degree: i64 },
    NotInvertible { total_dimension: usize },
}

/// Whether quantization produces a single surviving class.  Invertibility
/// is only ever claimed together with the stabilization certificate; a
/// one-class profile without the certificate is an error, not a verdict.
/// For zero-differential nondegenerate modules the degree is checked
/// against `predicted_degree`.
pub fn det_line(q: &QuadraticModule, cutoff: u32) -> Result<DetLineVerdict> {
    let r = quantize(q, cutoff)?;
    let total = r.cohomology.total_dimension();
    if total != 1 {
        return Ok(DetLineVerdict::NotInvertible { total_dimension: total });
    }
    if !r.stabilization.stable {
        return Err(Error::Unstable {
            context: format!(
                "profiles at cutoffs {}, {}, {} disagree; retry with a larger cutoff",
                r.stabilization.cutoffs[0],
                r.stabilization.cutoffs[1],
                r.stabilization.cutoffs[2]
            ),
        });
    }
    let (degree, _) = r.cohomology.nonzero().into_iter().next().expect("one class");
    if q.complex.differential.is_zero() && is_nondegenerate(q)? {
        let want = predicted_degree(q)?;
        if degree != want {
            return Err(Error::ValidationError {
                context: format!(
                    "the line sits in degree {degree} but the odd generator count predicts {want}"
                ),
            });
        }
    }
    Ok(DetLineVerdict::Invertible { degree })
}

/// The classical limit: the deformed envelope with the deformation
/// parameter bound to zero.  The bracket survives; the differential loses
/// its second-order term and the result agrees with the plain Poisson
/// envelope entry by entry.
pub fn dequantize(q: &QuadraticModule, cutoff: u32) -> Result<EnvelopedAlgebra> {
    checked_module(q)?;
    let g = heisenberg(q)?;
    let env = u_bd(&g, cutoff)?;
    bind_central(&env, &CentralBinding::parameter(HBAR, rational_int(0)))
}

/// Quantization of the shifted cotangent module of a complex, together
/// with the degree bookkeeping for the surviving line.
///
/// `degree_count` is the signed count `sum_n (2n+1) (dim W^{2n+1} - dim
/// W^{2n})`.  It predicts the degree of the line up to an overall sign
/// whose two readings disagree in general; both comparisons are exposed so
/// callers can record which one the computation matches.
#[derive(Clone, Debug)]
pub struct CotangentQuantization {
    pub result: QuantizationResult,
    pub degree_count: i64,
    /// Degree of the surviving line, when it is one dimensional.
    pub observed_degree: Option<i64>,
}

impl CotangentQuantization {
    pub fn matches_count(&self) -> Option<bool> {
        self.observed_degree.map(|d| d == self.degree_count)
    }

    pub fn matches_negated_count(&self) -> Option<bool> {
        self.observed_degree.map(|d| d == -self.degree_count)
    }
}

pub fn cotangent_quantize(w: &GradedComplex, cutoff: u32) -> Result<CotangentQuantization> {
    let q = cotangent(w)?;
    let result = quantize(&q, cutoff)?;
    if w.differential.is_zero() && result.det_line.is_none() {
        return Err(Error::Unstable {
            context: "a zero-differential cotangent module must quantize to a single line; \
                      retry with a larger cutoff"
                .into(),
        });
    }
    let degree_count = w
        .space
        .dims_by_degree()
        .into_iter()
        .map(|(d, n)| if d % 2 != 0 { d * n as i64 } else { -(d + 1) * n as i64 })
        .sum();
    let observed_degree = result.det_line.map(|(d, _)| d);
    Ok(CotangentQuantization { result, degree_count, observed_degree })
}

/// A quadratic module whose differential and pairing entries are
/// polynomial in one declared parameter.
#[derive(Clone, Debug)]
pub struct FamilyQuadraticModule {
    pub module: QuadraticModule,
    pub parameter: String,
}

pub fn family_module(
    module: QuadraticModule,
    parameter: impl Into<String>,
) -> Result<FamilyQuadraticModule> {
    let parameter = parameter.into();
    let mut params = module.parameters();
    params.remove(&parameter);
    if !params.is_empty() {
        return Err(Error::ValidationError {
            context: format!("module depends on undeclared parameters {params:?}"),
        });
    }
    Ok(FamilyQuadraticModule { module, parameter })
}

impl FamilyQuadraticModule {
    /// The specialization at one parameter value, fully validated.
    pub fn at(&self, value: &Rational) -> Result<QuadraticModule> {
        let q = self.module.substitute(&self.parameter, value)?;
        checked_module(&q)?;
        Ok(q)
    }
}

#[derive(Clone, Debug)]
pub struct FamilyScanReport {
    /// Stable cohomology profile per scanned value, in input order.
    pub profiles: Vec<(Rational, BTreeMap<i64, usize>)>,
    /// The most common profile; ties go to the earliest value.
    pub generic: BTreeMap<i64, usize>,
    /// Values whose profile differs from the generic one, in input order.
    pub jumps: Vec<Rational>,
}

/// Quantizes every specialization and reports where the cohomology profile
/// jumps away from the generic one.  Specializations run on their own
/// threads; aggregation follows the input order, so the report is
/// deterministic.
pub fn family_scan(
    fq: &FamilyQuadraticModule,
    values: &[Rational],
    cutoff: u32,
) -> Result<FamilyScanReport> {
    if values.is_empty() {
        return Err(Error::ValidationError {
            context: "a family scan needs at least one parameter value".into(),
        });
    }
    let mut slots: Vec<Option<Result<BTreeMap<i64, usize>>>> =
        values.iter().map(|_| None).collect();
    std::thread::scope(|scope| {
        for (slot, value) in slots.iter_mut().zip(values) {
            scope.spawn(move || {
                *slot = Some(
                    fq.at(value)
                        .and_then(|q| quantize(&q, cutoff))
                        .map(|r| r.cohomology.nonzero()),
                );
            });
        }
    });
    let mut profiles = Vec::with_capacity(values.len());
    for (slot, value) in slots.into_iter().zip(values) {
        let profile = slot.expect("every scan thread fills its slot").map_err(|e| {
            Error::InvalidSpecialization { value: value.to_string(), source: Box::new(e) }
        })?;
        profiles.push((value.clone(), profile));
    }
    let mut counts: Vec<(&BTreeMap<i64, usize>, usize)> = Vec::new();
    for (_, p) in &profiles {
        match counts.iter_mut().find(|(q, _)| *q == p) {
            Some(entry) => entry.1 += 1,
            None => counts.push((p, 1)),
        }
    }
    let mut generic = counts[0].0;
    let mut best = counts[0].1;
    for &(p, n) in &counts[1..] {
        if n > best {
            generic = p;
            best = n;
        }
    }
    let generic = generic.clone();
    let jumps =
        profiles.iter().filter(|(_, p)| *p != generic).map(|(v, _)| v.clone()).collect();
    Ok(FamilyScanReport { profiles, generic, jumps })
}

/// Whether quantization takes the direct sum to the tensor product: every
/// basis monomial of the quantized sum is split into its two halves and the
/// differential is compared with the signed Leibniz combination of the
/// factor differentials.  Generator names must be disjoint because the
/// split goes by name.
pub fn check_monoidal(
    left: &QuadraticModule,
    right: &QuadraticModule,
    cutoff: u32,
) -> Result<bool> {
    for i in left.space().ids() {
        if right.space().id(left.space().name(i)).is_ok() {
            return Err(Error::ValidationError {
                context: format!(
                    "generator {:?} appears on both sides of the sum",
                    left.space().name(i)
                ),
            });
        }
    }
    let sum = oplus(left, right)?;
    let env = bound_standard(&sum, cutoff)?;
    let env_l = bound_standard(left, cutoff)?;
    let env_r = bound_standard(right, cutoff)?;
    let alg = &env.algebra;
    let space = alg.space();
    for m in alg.basis() {
        let mut lf: Vec<(GenId, u32)> = Vec::new();
        let mut rf: Vec<(GenId, u32)> = Vec::new();
        for &(g, k) in m.factors() {
            if left.space().id(space.name(g)).is_ok() {
                lf.push((g, k));
            } else {
                rf.push((g, k));
            }
        }
        let ml = transplant(&lf, space, env_l.algebra.space());
        let mr = transplant(&rf, space, env_r.algebra.space());
        let ml_lift = lift_element(
            &Element::from_monomial(ml.clone(), Scalar::one()),
            env_l.algebra.space(),
            space,
        );
        let mr_lift = lift_element(
            &Element::from_monomial(mr.clone(), Scalar::one()),
            env_r.algebra.space(),
            space,
        );
        // multiplication supplies the sign for reordering the two halves,
        // so both sides are compared on the same (possibly negated) monomial
        let product = alg.mul(&ml_lift, &mr_lift);
        let lhs = env.differential.apply(alg, &product);
        let dl = lift_element(
            &env_l.differential.apply_monomial(&env_l.algebra, &ml),
            env_l.algebra.space(),
            space,
        );
        let dr = lift_element(
            &env_r.differential.apply_monomial(&env_r.algebra, &mr),
            env_r.algebra.space(),
            space,
        );
        let rhs = alg
            .mul(&dl, &mr_lift)
            .plus(&alg.mul(&ml_lift, &dr).scale(&sign_pow(ml.degree(env_l.algebra.space()))));
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

fn bound_standard(q: &QuadraticModule, cutoff: u32) -> Result<EnvelopedAlgebra> {
    let g = heisenberg(q)?;
    let central = g
        .space()
        .name(g.central.expect("the Heisenberg algebra has a central generator"))
        .to_string();
    let env = u_bd(&g, cutoff)?;
    bind_central(
        &env,
        &CentralBinding::parameter(HBAR, rational_int(1)).and_generator(&central, rational_int(1)),
    )
}

fn transplant(factors: &[(GenId, u32)], from: &GradedSpace, to: &GradedSpace) -> Monomial {
    let items: Vec<(GenId, u32)> = factors
        .iter()
        .map(|&(g, k)| (to.id(from.name(g)).expect("generator exists on the other side"), k))
        .collect();
    Monomial::from_multiset(to, &items).expect("transplanted monomial is admissible")
}

fn lift_element(e: &Element, from: &GradedSpace, to: &GradedSpace) -> Element {
    let mut out = Element::zero();
    for (m, c) in &e.terms {
        out = out.plus(&Element::from_monomial(transplant(m.factors(), from, to), c.clone()));
    }
    out
}
