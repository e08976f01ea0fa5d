//! Polynomial polyvector fields against a Gaussian measure: the Schouten
//! bracket, the BV Laplacian, the divergence complex of a quadratic action,
//! and exact moments with an independent matching oracle.
//!
//! The divergence of a polyvector field against the volume form
//! `exp(-Q) dx` is `div = Delta - {Q, -}`: on `p xi_i` it evaluates to
//! `dp/dx_i - p dQ/dx_i`, which is the classical integration by parts
//! kernel.  The bracket table `{x_i, xi_j} = delta_ij` and the Laplacian
//! `Delta = sum d^2/dx_i dxi_i` keep their plain signs; the relative minus
//! lives in the divergence operator itself.

use std::collections::HashMap;

use num_traits::Zero;

use crate::cohomology::cohomology;
use crate::error::{Error, Result};
use crate::graded::{GenId, GradedComplex, GradedSpace};
use crate::linalg::{adjugate_inverse, determinant, solve_dense};
use crate::scalar::{Rational, Scalar};
use crate::symalg::{
    complex_of_operator, extend_operator, sym_truncation, Element, Monomial, Operator,
    TruncatedSymAlgebra,
};

/// Polynomial polyvector fields on an n dimensional space: generators
/// `x1..xn` in degree 0 and `xi1..xin` in degree -1, truncated at total
/// letter count `cutoff`.  The `x` generators take ids `0..n` and the `xi`
/// generators `n..2n`, in order.
#[derive(Clone, Debug)]
pub struct PolyvectorAlgebra {
    pub algebra: TruncatedSymAlgebra,
    pub n: usize,
}

impl PolyvectorAlgebra {
    pub fn x(&self, i: usize) -> GenId {
        assert!(i < self.n, "variable index out of range");
        i
    }

    pub fn xi(&self, i: usize) -> GenId {
        assert!(i < self.n, "variable index out of range");
        self.n + i
    }

    pub fn space(&self) -> &GradedSpace {
        self.algebra.space()
    }

    pub fn cutoff(&self) -> u32 {
        self.algebra.cutoff()
    }
}

pub fn polyvectors(n: usize, cutoff: u32) -> Result<PolyvectorAlgebra> {
    let gens = (0..n)
        .map(|i| (format!("x{}", i + 1), 0))
        .chain((0..n).map(|i| (format!("xi{}", i + 1), -1)));
    let space = GradedSpace::new(gens)?;
    let module = GradedComplex::zero_differential(space);
    Ok(PolyvectorAlgebra { algebra: sym_truncation(&module, cutoff)?, n })
}

/// The action `Q(x) = 1/2 x^T A x` of a symmetric rational matrix.  The
/// measure operations demand positive definiteness, certified exactly by
/// positivity of every leading principal minor; the classical complex also
/// accepts degenerate actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticAction {
    pub matrix: Vec<Vec<Rational>>,
}

impl QuadraticAction {
    pub fn n(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_positive_definite(&self) -> bool {
        let n = self.n();
        (1..=n).all(|k| {
            let minor: Vec<Vec<Rational>> =
                self.matrix[..k].iter().map(|row| row[..k].to_vec()).collect();
            determinant(&minor) > Rational::from_integer(0.into())
        })
    }
}

fn symmetric_checked(matrix: Vec<Vec<Rational>>) -> Result<QuadraticAction> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::ValidationError { context: "action matrix must be square".into() });
    }
    for (i, row) in matrix.iter().enumerate() {
        for (j, entry) in row.iter().enumerate().take(i) {
            if *entry != matrix[j][i] {
                return Err(Error::ValidationError {
                    context: format!("action matrix is not symmetric at ({i}, {j})"),
                });
            }
        }
    }
    Ok(QuadraticAction { matrix })
}

/// A positive-definite action, the setting of the measure operations.
pub fn quadratic_action(matrix: Vec<Vec<Rational>>) -> Result<QuadraticAction> {
    let action = symmetric_checked(matrix)?;
    if !action.is_positive_definite() {
        return Err(Error::DegeneratePairing {
            context: "a leading principal minor of the action matrix is not positive".into(),
        });
    }
    Ok(action)
}

/// A merely symmetric action, enough for the classical complex; the
/// measure operations will reject it unless it happens to be positive
/// definite.
pub fn symmetric_action(matrix: Vec<Vec<Rational>>) -> Result<QuadraticAction> {
    symmetric_checked(matrix)
}

/// The identity action, unit covariance.
pub fn unit_action(n: usize) -> QuadraticAction {
    let one = Rational::from_integer(1.into());
    let zero = Rational::from_integer(0.into());
    QuadraticAction {
        matrix: (0..n)
            .map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect())
            .collect(),
    }
}

/// d/dx_i, an even derivation of degree 0.
fn d_x(pv: &PolyvectorAlgebra, i: usize, m: &Monomial) -> Element {
    let target = pv.x(i);
    let mut out = Element::zero();
    for &(g, k) in m.factors() {
        if g != target {
            continue;
        }
        let mut items: Vec<(GenId, u32)> = Vec::new();
        for &(h, l) in m.factors() {
            let l = if h == g { l - 1 } else { l };
            if l > 0 {
                items.push((h, l));
            }
        }
        let reduced = Monomial::from_multiset(pv.space(), &items)
            .expect("removing a letter keeps the monomial admissible");
        out = out.plus(&Element::from_monomial(reduced, Scalar::from_int(k as i64)));
    }
    out
}

/// d/dxi_i acting from the left: the sign counts the odd letters that
/// precede xi_i in the canonical factor order.
fn d_xi(pv: &PolyvectorAlgebra, i: usize, m: &Monomial) -> Element {
    let target = pv.xi(i);
    let mut parity = 0u32;
    for &(g, k) in m.factors() {
        if g == target {
            let mut items: Vec<(GenId, u32)> = Vec::new();
            for &(h, l) in m.factors() {
                let l = if h == g { l - 1 } else { l };
                if l > 0 {
                    items.push((h, l));
                }
            }
            let reduced = Monomial::from_multiset(pv.space(), &items)
                .expect("removing a letter keeps the monomial admissible");
            let sign = if parity.is_multiple_of(2) { 1 } else { -1 };
            return Element::from_monomial(reduced, Scalar::from_int(sign));
        }
        if pv.space().degree(g) % 2 != 0 {
            parity += k;
        }
    }
    Element::zero()
}

/// The Schouten bracket, the degree +1 biderivation with
/// `{x_i, xi_j} = delta_ij` and all other generator pairs zero.  Expanded
/// through odd partial derivatives, independently of the corestriction
/// machinery behind the Laplacian.
pub fn schouten(pv: &PolyvectorAlgebra, p: &Element, q: &Element) -> Result<Element> {
    let cutoff = pv.cutoff();
    for a in p.terms.keys() {
        for b in q.terms.keys() {
            let combined = a.weight() + b.weight();
            if combined > cutoff {
                return Err(Error::CutoffExceeded {
                    weight: combined as usize,
                    cutoff: cutoff as usize,
                });
            }
        }
    }
    let mut out = Element::zero();
    for (a, ca) in &p.terms {
        let sign_a = if a.degree(pv.space()) % 2 == 0 { 1 } else { -1 };
        for (b, cb) in &q.terms {
            let c = ca * cb;
            for i in 0..pv.n {
                let first = pv.algebra.mul(&d_xi(pv, i, a), &d_x(pv, i, b));
                let second = pv.algebra.mul(&d_x(pv, i, a), &d_xi(pv, i, b));
                out = out
                    .plus(&first.scale(&c))
                    .plus(&second.scale(&(&c * &Scalar::from_int(sign_a))));
            }
        }
    }
    Ok(out)
}

/// `Delta = sum_i d^2/dx_i dxi_i` as an operator, through the arity-2
/// corestriction `(x_i, xi_i) -> 1`.
pub fn bv_laplacian(pv: &PolyvectorAlgebra) -> Result<Operator> {
    let entries = (0..pv.n).map(|i| {
        let key = Monomial::from_multiset(pv.space(), &[(pv.x(i), 1), (pv.xi(i), 1)])
            .expect("an even and an odd letter always pair");
        (key, Element::one())
    });
    extend_operator(pv.space(), 1, entries)
}

/// `{Q, -}` as an operator: the odd derivation sending `xi_i` to
/// `dQ/dx_i = sum_j A_ij x_j` and every `x_i` to zero.
pub fn classical_part(pv: &PolyvectorAlgebra, action: &QuadraticAction) -> Result<Operator> {
    check_dimensions(pv, action)?;
    let entries = (0..pv.n).map(|i| {
        let key = Monomial::generator(pv.xi(i));
        let mut value = Element::zero();
        for j in 0..pv.n {
            let c = Scalar::from_rational(action.matrix[i][j].clone());
            if !c.is_zero() {
                value = value.plus(&Element::from_monomial(Monomial::generator(pv.x(j)), c));
            }
        }
        (key, value)
    });
    extend_operator(pv.space(), 1, entries)
}

/// The divergence against the volume form `exp(-Q) dx`:
/// `div = Delta - {Q, -}`.  On `p xi_i` it gives `dp/dx_i - p dQ/dx_i`,
/// so the kernel of the induced expectation is exactly the integration by
/// parts ideal of the Gaussian measure.
pub fn divergence_op(pv: &PolyvectorAlgebra, action: &QuadraticAction) -> Result<Operator> {
    let delta = bv_laplacian(pv)?;
    let classical = classical_part(pv, action)?;
    Ok(delta.plus(&classical.scale(&Scalar::from_int(-1))))
}

fn check_dimensions(pv: &PolyvectorAlgebra, action: &QuadraticAction) -> Result<()> {
    if action.n() != pv.n {
        return Err(Error::ValidationError {
            context: format!(
                "action is {}x{} but the algebra has {} variables",
                action.n(),
                action.n(),
                pv.n
            ),
        });
    }
    Ok(())
}

/// Dimension of `H^0` of the classical complex `(PV, {Q, -})` within the
/// truncation window: functions on the critical set of `Q`, with no claim
/// beyond the cutoff.
pub fn classical_h0(pv: &PolyvectorAlgebra, action: &QuadraticAction) -> Result<usize> {
    let op = classical_part(pv, action)?.scale(&Scalar::from_int(-1));
    let complex = complex_of_operator(&pv.algebra, &op)?;
    let report = cohomology(&complex, Some((0, 0)))?;
    Ok(report.dimension(0))
}

/// Exponent vector of a xi-free monomial.
fn exponents(pv: &PolyvectorAlgebra, m: &Monomial) -> Result<Vec<u32>> {
    let mut e = vec![0u32; pv.n];
    for &(g, k) in m.factors() {
        if g >= pv.n {
            return Err(Error::ValidationError {
                context: format!(
                    "expected a xi-free polynomial, found {}",
                    m.name(pv.space())
                ),
            });
        }
        e[g] += k;
    }
    Ok(e)
}

fn constant_terms(pv: &PolyvectorAlgebra, p: &Element) -> Result<Vec<(Vec<u32>, Rational)>> {
    let mut out = Vec::new();
    for (m, c) in &p.terms {
        let c = c.as_rational().ok_or_else(|| Error::UnspecializedParameter {
            parameters: c.parameters().into_iter().collect(),
            context: "moments need numeric coefficients".into(),
        })?;
        out.push((exponents(pv, m)?, c.clone()));
    }
    Ok(out)
}

/// The Gaussian expectation of a xi-free polynomial, normalized so the
/// expectation of 1 is 1.
///
/// Every monomial is reduced modulo the image of the divergence: a
/// monomial `m x_j` sits in the same divergence class as terms of degree
/// two lower, because `div(m xi_i) = dm/dx_i - m dQ/dx_i` vanishes in
/// expectation.  For each stem `m` those n relations determine the whole
/// block `(E[m x_j])_j` by one exact solve against `A`, so the reduction
/// strictly lowers degree and terminates.
pub fn expectation(
    pv: &PolyvectorAlgebra,
    action: &QuadraticAction,
    p: &Element,
) -> Result<Rational> {
    check_dimensions(pv, action)?;
    if !action.is_positive_definite() {
        return Err(Error::DegeneratePairing {
            context: "moments need a positive-definite action".into(),
        });
    }
    let terms = constant_terms(pv, p)?;
    for (e, _) in &terms {
        let weight: u32 = e.iter().sum();
        if weight + 1 > pv.cutoff() {
            return Err(Error::CutoffExceeded {
                weight: weight as usize,
                cutoff: pv.cutoff() as usize,
            });
        }
    }
    let mut memo: HashMap<Vec<u32>, Rational> = HashMap::new();
    let mut total = Rational::from_integer(0.into());
    for (e, c) in terms {
        total += c * moment(&action.matrix, &mut memo, e);
    }
    Ok(total)
}

fn moment(
    matrix: &[Vec<Rational>],
    memo: &mut HashMap<Vec<u32>, Rational>,
    e: Vec<u32>,
) -> Rational {
    let degree: u32 = e.iter().sum();
    if degree == 0 {
        return Rational::from_integer(1.into());
    }
    if !degree.is_multiple_of(2) {
        return Rational::from_integer(0.into());
    }
    if let Some(v) = memo.get(&e) {
        return v.clone();
    }
    let j = e.iter().position(|&k| k > 0).expect("degree is positive");
    let mut stem = e.clone();
    stem[j] -= 1;
    // E[d(stem)/dx_i] = E[stem dQ/dx_i] = sum_j A_ij E[stem x_j]
    let rhs: Vec<Rational> = (0..stem.len())
        .map(|i| {
            if stem[i] == 0 {
                return Rational::from_integer(0.into());
            }
            let mut reduced = stem.clone();
            reduced[i] -= 1;
            Rational::from_integer(stem[i].into()) * moment(matrix, memo, reduced)
        })
        .collect();
    let block = solve_dense(matrix, &rhs)
        .expect("a positive-definite matrix is invertible");
    let value = block[j].clone();
    for (l, v) in block.into_iter().enumerate() {
        let mut sibling = stem.clone();
        sibling[l] += 1;
        memo.entry(sibling).or_insert(v);
    }
    value
}

/// Independent moment oracle: the pairing sum over perfect matchings with
/// covariance `A^{-1}`, memoized on letter multisets.
pub fn wick_oracle(
    pv: &PolyvectorAlgebra,
    action: &QuadraticAction,
    p: &Element,
) -> Result<Rational> {
    check_dimensions(pv, action)?;
    if !action.is_positive_definite() {
        return Err(Error::DegeneratePairing {
            context: "moments need a positive-definite action".into(),
        });
    }
    let covariance = adjugate_inverse(&action.matrix)
        .expect("a positive-definite matrix is invertible");
    let mut memo: HashMap<Vec<u32>, Rational> = HashMap::new();
    let mut total = Rational::from_integer(0.into());
    for (e, c) in constant_terms(pv, p)? {
        total += c * matchings(&covariance, &mut memo, e);
    }
    Ok(total)
}

fn matchings(
    covariance: &[Vec<Rational>],
    memo: &mut HashMap<Vec<u32>, Rational>,
    e: Vec<u32>,
) -> Rational {
    let degree: u32 = e.iter().sum();
    if degree == 0 {
        return Rational::from_integer(1.into());
    }
    if !degree.is_multiple_of(2) {
        return Rational::from_integer(0.into());
    }
    if let Some(v) = memo.get(&e) {
        return v.clone();
    }
    // pair the first remaining letter with each other letter in turn
    let j = e.iter().position(|&k| k > 0).expect("degree is positive");
    let mut rest = e.clone();
    rest[j] -= 1;
    let mut value = Rational::from_integer(0.into());
    for (i, &k) in rest.clone().iter().enumerate() {
        if k == 0 || covariance[j][i].is_zero() {
            continue;
        }
        let mut reduced = rest.clone();
        reduced[i] -= 1;
        value +=
            &covariance[j][i] * &(Rational::from_integer(k.into()) * matchings(covariance, memo, reduced));
    }
    memo.insert(e, value.clone());
    value
}
