//! Exact scalars: arbitrary-precision rationals, optionally polynomial in
//! declared formal parameters (`hbar`, a family parameter `t`, ...).
//!
//! Scalars form a commutative ring.  Division is only defined by nonzero
//! rationals; nothing in the library ever divides by a genuine polynomial.
//! Every value is kept in canonical form (reduced rationals, no zero terms,
//! no zero exponents), so equality is structural.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub type Rational = num_rational::BigRational;

/// Exponent vector of a parameter monomial: sorted by parameter name, no
/// zero exponents.  The empty vector is the constant monomial.
type Powers = Vec<(String, u32)>;

/// An exact scalar: an element of `Q[p_1, ..., p_k]` for the finitely many
/// parameter names that occur in it.  Constants are the common case and are
/// stored without any polynomial overhead.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(Rational),
    /// Invariant: contains at least one term with a nonempty exponent
    /// vector, and no zero coefficients.
    Polynomial(BTreeMap<Powers, Rational>),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rational(Rational::from_integer(BigInt::from(n)))
    }

    /// `p/q`; panics if `q == 0` (construction-time misuse, not data).
    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Scalar::Rational(Rational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_rational(r: Rational) -> Self {
        Scalar::Rational(r)
    }

    /// The parameter `name` as a degree-one monomial.
    pub fn param(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(name.to_string(), 1)], Rational::one());
        Scalar::Polynomial(terms)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Polynomial(_) => false,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rational(r) if r.is_one())
    }

    /// The underlying rational if the scalar is constant.
    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rational(r) => Some(r),
            Scalar::Polynomial(_) => None,
        }
    }

    /// Every parameter name occurring with a nonzero coefficient.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let Scalar::Polynomial(terms) = self {
            for powers in terms.keys() {
                for (name, _) in powers {
                    out.insert(name.clone());
                }
            }
        }
        out
    }

    /// Substitute a rational value for one parameter; other parameters stay
    /// formal.
    pub fn substitute(&self, name: &str, value: &Rational) -> Scalar {
        match self {
            Scalar::Rational(_) => self.clone(),
            Scalar::Polynomial(terms) => {
                let mut acc = BTreeMap::new();
                for (powers, coeff) in terms {
                    let mut c = coeff.clone();
                    let mut rest: Powers = Vec::new();
                    for (p, e) in powers {
                        if p == name {
                            for _ in 0..*e {
                                c *= value;
                            }
                        } else {
                            rest.push((p.clone(), *e));
                        }
                    }
                    if !c.is_zero() {
                        let slot = acc.entry(rest).or_insert_with(Rational::zero);
                        *slot += c;
                    }
                }
                normalize(acc)
            }
        }
    }

    /// Multiply by a plain rational.
    pub fn scale(&self, r: &Rational) -> Scalar {
        if r.is_zero() {
            return Scalar::zero();
        }
        match self {
            Scalar::Rational(a) => Scalar::Rational(a * r),
            Scalar::Polynomial(terms) => {
                let out = terms
                    .iter()
                    .map(|(k, v)| (k.clone(), v * r))
                    .collect::<BTreeMap<_, _>>();
                normalize(out)
            }
        }
    }

    /// Division by a nonzero rational.
    pub fn div_rational(&self, r: &Rational) -> Scalar {
        assert!(!r.is_zero(), "division by zero");
        self.scale(&r.recip())
    }

    /// Split into the part divisible by `name` (with one power of it
    /// removed) and the part free of it: `self = name * hi + lo`.
    /// Used to separate an `hbar`-linear differential into its classical
    /// and quantum layers.
    pub fn split_once(&self, name: &str) -> (Scalar, Scalar) {
        match self {
            Scalar::Rational(_) => (Scalar::zero(), self.clone()),
            Scalar::Polynomial(terms) => {
                let mut hi = BTreeMap::new();
                let mut lo = BTreeMap::new();
                for (powers, coeff) in terms {
                    match powers.iter().position(|(p, _)| p == name) {
                        Some(i) => {
                            let mut reduced = powers.clone();
                            if reduced[i].1 == 1 {
                                reduced.remove(i);
                            } else {
                                reduced[i].1 -= 1;
                            }
                            hi.insert(reduced, coeff.clone());
                        }
                        None => {
                            lo.insert(powers.clone(), coeff.clone());
                        }
                    }
                }
                (normalize(hi), normalize(lo))
            }
        }
    }

    fn into_terms(self) -> BTreeMap<Powers, Rational> {
        match self {
            Scalar::Rational(r) => {
                let mut terms = BTreeMap::new();
                if !r.is_zero() {
                    terms.insert(Vec::new(), r);
                }
                terms
            }
            Scalar::Polynomial(terms) => terms,
        }
    }
}

/// Integer as a plain rational, the common case when binding values.
pub fn rational_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `p/q` as a rational; panics if `q == 0`.
pub fn rational(p: i64, q: i64) -> Rational {
    assert!(q != 0, "zero denominator");
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Canonicalize: drop zero coefficients, collapse constants back to the
/// rational representation.
fn normalize(mut terms: BTreeMap<Powers, Rational>) -> Scalar {
    terms.retain(|_, v| !v.is_zero());
    if terms.is_empty() {
        return Scalar::zero();
    }
    if terms.len() == 1 {
        if let Some(c) = terms.get(&Vec::new() as &Powers) {
            return Scalar::Rational(c.clone());
        }
    }
    Scalar::Polynomial(terms)
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (a, b) => {
                let mut terms = a.into_terms();
                for (k, v) in b.into_terms() {
                    let slot = terms.entry(k).or_insert_with(Rational::zero);
                    *slot += v;
                }
                normalize(terms)
            }
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        let lhs = std::mem::replace(self, Scalar::zero());
        *self = lhs + rhs;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        let lhs = std::mem::replace(self, Scalar::zero());
        *self = lhs - rhs;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Polynomial(terms) => {
                Scalar::Polynomial(terms.into_iter().map(|(k, v)| (k, -v)).collect())
            }
        }
    }
}

fn mul_powers(a: &Powers, b: &Powers) -> Powers {
    let mut out: BTreeMap<&str, u32> = BTreeMap::new();
    for (p, e) in a.iter().chain(b.iter()) {
        *out.entry(p.as_str()).or_insert(0) += e;
    }
    out.into_iter().map(|(p, e)| (p.to_string(), e)).collect()
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Rational(a), b) | (b, Scalar::Rational(a)) => b.scale(&a),
            (Scalar::Polynomial(a), Scalar::Polynomial(b)) => {
                let mut terms: BTreeMap<Powers, Rational> = BTreeMap::new();
                for (ka, va) in &a {
                    for (kb, vb) in &b {
                        let k = mul_powers(ka, kb);
                        let slot = terms.entry(k).or_insert_with(Rational::zero);
                        *slot += va * vb;
                    }
                }
                normalize(terms)
            }
        }
    }
}

impl MulAssign for Scalar {
    fn mul_assign(&mut self, rhs: Scalar) {
        let lhs = std::mem::replace(self, Scalar::zero());
        *self = lhs * rhs;
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        self.clone() * rhs.clone()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => fmt_rational(r, f),
            Scalar::Polynomial(terms) => {
                // Highest monomials first so "2*t - 1" reads naturally.
                let mut first = true;
                for (powers, coeff) in terms.iter().rev() {
                    let neg = coeff.is_negative();
                    let abs = coeff.abs();
                    if first {
                        if neg {
                            write!(f, "-")?;
                        }
                        first = false;
                    } else if neg {
                        write!(f, " - ")?;
                    } else {
                        write!(f, " + ")?;
                    }
                    let unit_coeff = abs.is_one() && !powers.is_empty();
                    if !unit_coeff {
                        fmt_rational(&abs, f)?;
                    }
                    for (i, (p, e)) in powers.iter().enumerate() {
                        if i > 0 || !unit_coeff {
                            write!(f, "*")?;
                        }
                        if *e == 1 {
                            write!(f, "{p}")?;
                        } else {
                            write!(f, "{p}^{e}")?;
                        }
                    }
                    Ok(())?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
