//! Finitely generated graded spaces, degree-homogeneous maps, and cochain
//! complexes over exact scalars.
//!
//! Conventions, fixed once for the whole library:
//!
//! * Cohomological grading; differentials have degree `+1`.
//! * A shift by `n` moves a generator of degree `d` to degree `d - n` and
//!   multiplies the differential by `(-1)^n`.  So the shift of the ground
//!   field by `1` is one dimension in degree `-1`.
//! * On a tensor product, `d(a (x) b) = da (x) b + (-1)^{|a|} a (x) db`.
//! * The dual negates degrees and transposes the differential with the
//!   sign `(-1)^{|f| + 1}` on the entry targeting `f` (equivalently, the
//!   evaluation pairing `dual(C) (x) C -> k` is a chain map).  The double
//!   dual is canonically identified with the original complex via
//!   `e -> (-1)^{|e|} e**`.
//! * Generators are ordered by `(degree, declaration order)`; every matrix
//!   and basis enumeration uses that order.

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

pub type GenId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
}

#[derive(Debug)]
struct SpaceInner {
    gens: Vec<Generator>,
    /// Generator ids sorted by (degree, declaration order).
    canonical: Vec<GenId>,
    /// rank[id] = position of `id` in `canonical`.
    rank: Vec<usize>,
    by_name: HashMap<String, GenId>,
}

/// A finite graded vector space with named generators.
#[derive(Clone)]
pub struct GradedSpace {
    inner: Arc<SpaceInner>,
}

impl PartialEq for GradedSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.gens == other.inner.gens
    }
}
impl Eq for GradedSpace {}

impl fmt::Debug for GradedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.inner.gens.iter().map(|g| (&g.name, g.degree)))
            .finish()
    }
}

impl GradedSpace {
    pub fn new<S: Into<String>>(gens: impl IntoIterator<Item = (S, i64)>) -> Result<Self> {
        let gens: Vec<Generator> = gens
            .into_iter()
            .map(|(name, degree)| Generator { name: name.into(), degree })
            .collect();
        let mut by_name = HashMap::new();
        for (id, g) in gens.iter().enumerate() {
            if by_name.insert(g.name.clone(), id).is_some() {
                return Err(Error::DuplicateGenerator { name: g.name.clone() });
            }
        }
        let mut canonical: Vec<GenId> = (0..gens.len()).collect();
        canonical.sort_by_key(|&id| (gens[id].degree, id));
        let mut rank = vec![0; gens.len()];
        for (pos, &id) in canonical.iter().enumerate() {
            rank[id] = pos;
        }
        Ok(GradedSpace {
            inner: Arc::new(SpaceInner { gens, canonical, rank, by_name }),
        })
    }

    pub fn empty() -> Self {
        GradedSpace::new(Vec::<(String, i64)>::new()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.inner.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.gens.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = GenId> {
        0..self.len()
    }

    /// Ids in canonical `(degree, declaration)` order.
    pub fn canonical_ids(&self) -> impl Iterator<Item = GenId> + '_ {
        self.inner.canonical.iter().copied()
    }

    pub fn canonical_rank(&self, id: GenId) -> usize {
        self.inner.rank[id]
    }

    pub fn degree(&self, id: GenId) -> i64 {
        self.inner.gens[id].degree
    }

    pub fn name(&self, id: GenId) -> &str {
        &self.inner.gens[id].name
    }

    pub fn generator(&self, id: GenId) -> &Generator {
        &self.inner.gens[id]
    }

    pub fn generators(&self) -> &[Generator] {
        &self.inner.gens
    }

    pub fn id(&self, name: &str) -> Result<GenId> {
        self.inner
            .by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGenerator { name: name.to_string() })
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.inner.by_name.contains_key(name)
    }

    pub fn dims_by_degree(&self) -> BTreeMap<i64, usize> {
        let mut out = BTreeMap::new();
        for g in &self.inner.gens {
            *out.entry(g.degree).or_insert(0) += 1;
        }
        out
    }

    pub fn ids_of_degree(&self, degree: i64) -> Vec<GenId> {
        self.inner
            .canonical
            .iter()
            .copied()
            .filter(|&id| self.degree(id) == degree)
            .collect()
    }
}

/// Sparse linear combination of generators.
pub type LinComb = BTreeMap<GenId, Scalar>;

pub fn lincomb_add(acc: &mut LinComb, id: GenId, coeff: Scalar) {
    if coeff.is_zero() {
        return;
    }
    let slot = acc.entry(id).or_insert_with(Scalar::zero);
    *slot += coeff;
    if slot.is_zero() {
        acc.remove(&id);
    }
}

pub fn format_lincomb(space: &GradedSpace, v: &LinComb) -> String {
    if v.is_empty() {
        return "0".to_string();
    }
    v.iter()
        .map(|(id, c)| format!("({}) {}", c, space.name(*id)))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// A degree-homogeneous linear map between graded spaces, stored sparsely
/// as (source generator, target generator) entries.
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub source: GradedSpace,
    pub target: GradedSpace,
    pub degree: i64,
    entries: BTreeMap<(GenId, GenId), Scalar>,
}

impl GradedMap {
    pub fn zero(source: GradedSpace, target: GradedSpace, degree: i64) -> Self {
        GradedMap { source, target, degree, entries: BTreeMap::new() }
    }

    /// Build from named entries, checking degree homogeneity.
    pub fn from_named_entries<'a>(
        source: GradedSpace,
        target: GradedSpace,
        degree: i64,
        entries: impl IntoIterator<Item = (&'a str, &'a str, Scalar)>,
    ) -> Result<Self> {
        let mut map = GradedMap::zero(source, target, degree);
        for (s, t, c) in entries {
            let sid = map.source.id(s)?;
            let tid = map.target.id(t)?;
            map.set(sid, tid, c)?;
        }
        Ok(map)
    }

    pub fn set(&mut self, s: GenId, t: GenId, coeff: Scalar) -> Result<()> {
        if self.target.degree(t) != self.source.degree(s) + self.degree {
            return Err(Error::DegreeMismatch {
                context: format!(
                    "entry {} -> {} has degree jump {}, map has degree {}",
                    self.source.name(s),
                    self.target.name(t),
                    self.target.degree(t) - self.source.degree(s),
                    self.degree
                ),
            });
        }
        if coeff.is_zero() {
            self.entries.remove(&(s, t));
        } else {
            self.entries.insert((s, t), coeff);
        }
        Ok(())
    }

    pub fn add_to(&mut self, s: GenId, t: GenId, coeff: Scalar) -> Result<()> {
        let mut v = self.entry(s, t);
        v += coeff;
        self.set(s, t, v)
    }

    pub fn entry(&self, s: GenId, t: GenId) -> Scalar {
        self.entries.get(&(s, t)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (GenId, GenId, &Scalar)> {
        self.entries.iter().map(|(&(s, t), c)| (s, t, c))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Image of a single generator.
    pub fn image_of(&self, s: GenId) -> LinComb {
        let mut out = LinComb::new();
        for (&(src, tgt), c) in self.entries.range((s, 0)..=(s, usize::MAX)) {
            debug_assert_eq!(src, s);
            lincomb_add(&mut out, tgt, c.clone());
        }
        out
    }

    pub fn apply(&self, v: &LinComb) -> LinComb {
        let mut out = LinComb::new();
        for (&id, coeff) in v {
            for (tgt, c) in self.image_of(id) {
                lincomb_add(&mut out, tgt, coeff.clone() * c);
            }
        }
        out
    }

    /// `other` after `self` (so the composite runs source -> ... -> other.target).
    pub fn then(&self, other: &GradedMap) -> GradedMap {
        debug_assert!(self.target == other.source);
        let mut out = GradedMap::zero(
            self.source.clone(),
            other.target.clone(),
            self.degree + other.degree,
        );
        for (&(s, mid), c1) in &self.entries {
            for (tgt, c2) in other.image_of(mid) {
                out.add_to(s, tgt, c1.clone() * c2).expect("composite degree");
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> GradedMap {
        let mut out = self.clone();
        if c.is_zero() {
            out.entries.clear();
            return out;
        }
        for v in out.entries.values_mut() {
            *v *= c.clone();
        }
        out
    }

    pub fn plus(&self, other: &GradedMap) -> GradedMap {
        debug_assert!(self.source == other.source && self.target == other.target);
        debug_assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (&(s, t), c) in &other.entries {
            out.add_to(s, t, c.clone()).expect("sum degree");
        }
        out
    }

    pub fn equal(&self, other: &GradedMap) -> bool {
        self.degree == other.degree
            && self.source == other.source
            && self.target == other.target
            && self.entries == other.entries
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for c in self.entries.values() {
            out.extend(c.parameters());
        }
        out
    }

    pub fn substitute(&self, name: &str, value: &Rational) -> GradedMap {
        let mut out = GradedMap::zero(self.source.clone(), self.target.clone(), self.degree);
        for (&(s, t), c) in &self.entries {
            let c = c.substitute(name, value);
            if !c.is_zero() {
                out.entries.insert((s, t), c);
            }
        }
        out
    }
}

/// A cochain complex: a graded space with a verified square-zero
/// differential of degree `+1`.
#[derive(Clone, Debug)]
pub struct GradedComplex {
    pub space: GradedSpace,
    pub differential: GradedMap,
}

impl GradedComplex {
    /// Checks that the differential is an endomorphism of degree `+1` and
    /// squares to zero exactly.
    pub fn new(space: GradedSpace, differential: GradedMap) -> Result<Self> {
        if !(differential.source == space && differential.target == space) {
            return Err(Error::ValidationError {
                context: "differential must be an endomorphism of the space".into(),
            });
        }
        if differential.degree != 1 {
            return Err(Error::DegreeMismatch {
                context: format!("differential must have degree 1, found {}", differential.degree),
            });
        }
        let complex = GradedComplex { space, differential };
        complex.verify_d_squared()?;
        Ok(complex)
    }

    pub fn zero_differential(space: GradedSpace) -> Self {
        let d = GradedMap::zero(space.clone(), space.clone(), 1);
        GradedComplex { space, differential: d }
    }

    pub fn verify_d_squared(&self) -> Result<()> {
        for s in self.space.ids() {
            let once = self.differential.image_of(s);
            let twice = self.differential.apply(&once);
            if !twice.is_empty() {
                return Err(Error::DSquaredNonzero {
                    witness: self.space.name(s).to_string(),
                    value: format_lincomb(&self.space, &twice),
                });
            }
        }
        Ok(())
    }

    pub fn with_differential_entries<'a>(
        space: GradedSpace,
        entries: impl IntoIterator<Item = (&'a str, &'a str, Scalar)>,
    ) -> Result<Self> {
        let d = GradedMap::from_named_entries(space.clone(), space.clone(), 1, entries)?;
        GradedComplex::new(space, d)
    }

    pub fn degree_window(&self) -> Option<(i64, i64)> {
        let dims = self.space.dims_by_degree();
        match (dims.keys().next(), dims.keys().next_back()) {
            (Some(&a), Some(&b)) => Some((a, b)),
            _ => None,
        }
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        self.differential.parameters()
    }

    pub fn substitute(&self, name: &str, value: &Rational) -> Result<GradedComplex> {
        GradedComplex::new(self.space.clone(), self.differential.substitute(name, value))
    }
}

pub(crate) fn sign_pow(n: i64) -> Scalar {
    if n.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        Scalar::from_int(-1)
    }
}

/// Shift by `n`: degree `d` generators move to degree `d - n`, the
/// differential picks up `(-1)^n`.  Generator names are preserved.
pub fn shift(c: &GradedComplex, n: i64) -> GradedComplex {
    let space = GradedSpace::new(
        c.space
            .generators()
            .iter()
            .map(|g| (g.name.clone(), g.degree - n)),
    )
    .expect("shift preserves name uniqueness");
    let mut d = GradedMap::zero(space.clone(), space.clone(), 1);
    let sign = sign_pow(n);
    for (s, t, coeff) in c.differential.entries() {
        d.set(s, t, sign.clone() * coeff.clone()).expect("shift degree");
    }
    GradedComplex { space, differential: d }
}

/// Dual complex: degrees negate, names gain a `*`, and the differential
/// transposes with the sign `(-1)^{|f| + 1}` on the entry out of `f*`.
pub fn dual(c: &GradedComplex) -> GradedComplex {
    let space = GradedSpace::new(
        c.space
            .generators()
            .iter()
            .map(|g| (format!("{}*", g.name), -g.degree)),
    )
    .expect("dual preserves name uniqueness");
    let mut d = GradedMap::zero(space.clone(), space.clone(), 1);
    for (e, f, coeff) in c.differential.entries() {
        let sign = sign_pow(c.space.degree(f) + 1);
        d.add_to(f, e, sign * coeff.clone()).expect("dual degree");
    }
    GradedComplex { space, differential: d }
}

/// The canonical chain isomorphism `C -> dual(dual(C))`,
/// `e -> (-1)^{|e|} e**`.
pub fn double_dual_identification(c: &GradedComplex, dd: &GradedComplex) -> GradedMap {
    let mut f = GradedMap::zero(c.space.clone(), dd.space.clone(), 0);
    for id in c.space.ids() {
        f.set(id, id, sign_pow(c.space.degree(id))).expect("double dual degree");
    }
    f
}

/// Tensor product with the standard sign rule.  Generator `(a, b)` is
/// named `a⊗b` and has id `a * len(B) + b`.
pub fn tensor(a: &GradedComplex, b: &GradedComplex) -> GradedComplex {
    let nb = b.space.len();
    let space = GradedSpace::new(a.space.ids().flat_map(|i| {
        let an = a.space.name(i).to_string();
        let ad = a.space.degree(i);
        b.space.ids().map(move |j| {
            (
                format!("{}⊗{}", an, b.space.name(j)),
                ad + b.space.degree(j),
            )
        })
    }))
    .expect("tensor names are unique");
    let mut d = GradedMap::zero(space.clone(), space.clone(), 1);
    for i in a.space.ids() {
        for j in b.space.ids() {
            let src = i * nb + j;
            for (t, coeff) in a.differential.image_of(i) {
                d.add_to(src, t * nb + j, coeff).expect("tensor degree");
            }
            let sign = sign_pow(a.space.degree(i));
            for (t, coeff) in b.differential.image_of(j) {
                d.add_to(src, i * nb + t, sign.clone() * coeff).expect("tensor degree");
            }
        }
    }
    GradedComplex { space, differential: d }
}

/// Direct sum; generator names must not collide.
pub fn oplus_complex(a: &GradedComplex, b: &GradedComplex) -> Result<GradedComplex> {
    let na = a.space.len();
    let space = GradedSpace::new(
        a.space
            .generators()
            .iter()
            .chain(b.space.generators())
            .map(|g| (g.name.clone(), g.degree)),
    )?;
    let mut d = GradedMap::zero(space.clone(), space.clone(), 1);
    for (s, t, c) in a.differential.entries() {
        d.set(s, t, c.clone())?;
    }
    for (s, t, c) in b.differential.entries() {
        d.set(na + s, na + t, c.clone())?;
    }
    Ok(GradedComplex { space, differential: d })
}

/// Is `f` a chain map?  For a map of degree `r` this means
/// `d_target . f = (-1)^r f . d_source`.
pub fn check_chain_map(f: &GradedMap, source: &GradedComplex, target: &GradedComplex) -> bool {
    debug_assert!(f.source == source.space && f.target == target.space);
    let lhs = f.then(&target.differential);
    let rhs = source.differential.then(f).scale(&sign_pow(f.degree));
    lhs.equal(&rhs)
}

/// Mapping cone of a degree-0 chain map `f : A -> B`: the space is
/// `B + A[1]` (source generators suffixed with `~` and lowered one
/// degree, so cone degree `n` holds `A^{n+1} + B^n`), with `d(b) = d_B b`
/// and `d(a~) = -(d_A a)~ + f(a)`.
/// The cone is acyclic exactly when `f` is a quasi-isomorphism.
pub fn cone(f: &GradedMap, a: &GradedComplex, b: &GradedComplex) -> Result<GradedComplex> {
    debug_assert_eq!(f.degree, 0);
    debug_assert!(f.source == a.space && f.target == b.space);
    let nb = b.space.len();
    let taken: BTreeSet<String> = b
        .space
        .generators()
        .iter()
        .map(|g| g.name.clone())
        .collect();
    let shifted_names: Vec<String> = a
        .space
        .generators()
        .iter()
        .map(|g| {
            let mut n = format!("{}~", g.name);
            while taken.contains(&n) {
                n.push('~');
            }
            n
        })
        .collect();
    let space = GradedSpace::new(
        b.space
            .generators()
            .iter()
            .map(|g| (g.name.clone(), g.degree))
            .chain(
                a.space
                    .generators()
                    .iter()
                    .zip(&shifted_names)
                    .map(|(g, n)| (n.clone(), g.degree - 1)),
            ),
    )?;
    let mut d = GradedMap::zero(space.clone(), space.clone(), 1);
    for (s, t, c) in b.differential.entries() {
        d.set(s, t, c.clone())?;
    }
    for s in a.space.ids() {
        for (t, c) in a.differential.image_of(s) {
            d.add_to(nb + s, nb + t, -c)?;
        }
        for (t, c) in f.image_of(s) {
            d.add_to(nb + s, t, c)?;
        }
    }
    GradedComplex::new(space, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::cohomology;

    fn two_term() -> GradedComplex {
        // a in degree 0, b in degree 1, d(a) = b.
        let space = GradedSpace::new([("a", 0), ("b", 1)]).unwrap();
        GradedComplex::with_differential_entries(space, [("a", "b", Scalar::one())]).unwrap()
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = GradedSpace::new([("a", 0), ("a", 1)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateGenerator { .. }));
    }

    #[test]
    fn d_squared_enforced() {
        // a -> b -> c with unit entries does not square to zero.
        let space = GradedSpace::new([("a", 0), ("b", 1), ("c", 2)]).unwrap();
        let err = GradedComplex::with_differential_entries(
            space,
            [("a", "b", Scalar::one()), ("b", "c", Scalar::one())],
        )
        .unwrap_err();
        match err {
            Error::DSquaredNonzero { witness, .. } => assert_eq!(witness, "a"),
            other => panic!("expected DSquaredNonzero, got {other}"),
        }
    }

    #[test]
    fn degree_mismatch_rejected() {
        let space = GradedSpace::new([("a", 0), ("b", 2)]).unwrap();
        let err =
            GradedComplex::with_differential_entries(space, [("a", "b", Scalar::one())])
                .unwrap_err();
        assert!(matches!(err, Error::DegreeMismatch { .. }));
    }

    #[test]
    fn shift_convention() {
        // Shift of the ground field by 1 sits in degree -1.
        let k = GradedComplex::zero_differential(GradedSpace::new([("e", 0)]).unwrap());
        let shifted = shift(&k, 1);
        assert_eq!(shifted.space.degree(0), -1);

        // Odd shift flips the differential sign.
        let c = two_term();
        let s = shift(&c, 1);
        assert_eq!(s.differential.entry(0, 1), Scalar::from_int(-1));
        assert_eq!(s.space.degree(0), -1);
        assert_eq!(s.space.degree(1), 0);
        // Even shift keeps it.
        let s2 = shift(&c, 2);
        assert_eq!(s2.differential.entry(0, 1), Scalar::one());
        // Shifting back and forth is the identity on entries.
        let round = shift(&shift(&c, 3), -3);
        assert!(round.differential.equal(&c.differential));
    }

    #[test]
    fn dual_sign_and_d_squared() {
        // d(a) = b with |a| = 0, |b| = 1; the dual has d(b*) = (+1) a*.
        let c = two_term();
        let dc = dual(&c);
        assert_eq!(dc.space.name(0), "a*");
        assert_eq!(dc.space.degree(0), 0);
        assert_eq!(dc.space.degree(1), -1);
        // Entry out of b* (id 1) into a* (id 0): sign (-1)^{|b|+1} = +1.
        assert_eq!(dc.differential.entry(1, 0), Scalar::one());
        dc.verify_d_squared().unwrap();
    }

    #[test]
    fn double_dual_is_canonically_the_identity() {
        let c = two_term();
        let dd = dual(&dual(&c));
        assert_eq!(dd.space.degree(0), 0);
        assert_eq!(dd.space.degree(1), 1);
        // Under the naive identification the differential flips sign;
        // the canonical signed identification is a chain isomorphism.
        assert_eq!(dd.differential.entry(0, 1), Scalar::from_int(-1));
        let iota = double_dual_identification(&c, &dd);
        assert!(check_chain_map(&iota, &c, &dd));
    }

    #[test]
    fn evaluation_pairing_is_a_chain_map() {
        // ev : dual(C) (x) C -> k, (f*, e) -> f*(e), as a degree-0 map to
        // the one-generator complex in degree 0.  This pins the dual sign.
        let c = two_term();
        let dc = dual(&c);
        let t = tensor(&dc, &c);
        let k = GradedComplex::zero_differential(GradedSpace::new([("1", 0)]).unwrap());
        let mut ev = GradedMap::zero(t.space.clone(), k.space.clone(), 0);
        let n = c.space.len();
        for i in c.space.ids() {
            // generator i* ⊗ i sits at id i * n + i and has degree 0.
            ev.set(i * n + i, 0, Scalar::one()).unwrap();
        }
        assert!(check_chain_map(&ev, &t, &k));
    }

    #[test]
    fn tensor_signs_by_hand() {
        // A = (a0 -> a1), B = (b0 -> b1) with unit differentials.
        // d(a0 (x) b0) = a1 (x) b0 + a0 (x) b1         (|a0| = 0)
        // d(a1 (x) b0) = - a1 (x) b1                    (|a1| = 1, d a1 = 0)
        let a = two_term();
        let b = two_term();
        let t = tensor(&a, &b);
        let img00 = t.differential.image_of(0);
        assert_eq!(img00.len(), 2);
        assert_eq!(img00.get(&2), Some(&Scalar::one())); // a1⊗b0
        assert_eq!(img00.get(&1), Some(&Scalar::one())); // a0⊗b1
        let img10 = t.differential.image_of(2);
        assert_eq!(img10.get(&3), Some(&Scalar::from_int(-1))); // -a1⊗b1
        t.verify_d_squared().unwrap();
    }

    #[test]
    fn braiding_is_a_chain_map() {
        let a = two_term();
        let b = {
            let space = GradedSpace::new([("x", -1), ("y", 0)]).unwrap();
            GradedComplex::with_differential_entries(space, [("x", "y", Scalar::one())]).unwrap()
        };
        let ab = tensor(&a, &b);
        let ba = tensor(&b, &a);
        let (na, nb) = (a.space.len(), b.space.len());
        let mut braid = GradedMap::zero(ab.space.clone(), ba.space.clone(), 0);
        for i in a.space.ids() {
            for j in b.space.ids() {
                let sign = sign_pow(a.space.degree(i) * b.space.degree(j));
                braid.set(i * nb + j, j * na + i, sign).unwrap();
            }
        }
        assert!(check_chain_map(&braid, &ab, &ba));
    }

    #[test]
    fn cone_detects_quasi_isomorphism() {
        // Identity map has acyclic cone.
        let c = two_term();
        let mut id = GradedMap::zero(c.space.clone(), c.space.clone(), 0);
        for i in c.space.ids() {
            id.set(i, i, Scalar::one()).unwrap();
        }
        let cone_id = cone(&id, &c, &c).unwrap();
        let report = cohomology(&cone_id, None).unwrap();
        assert!(report.total_dimension() == 0);

        // Zero map to an acyclic complex is a quasi-isomorphism only when
        // the source is acyclic too; here the source is k in degree 0.
        let k = GradedComplex::zero_differential(GradedSpace::new([("e", 0)]).unwrap());
        let z = GradedMap::zero(k.space.clone(), c.space.clone(), 0);
        let cone_z = cone(&z, &k, &c).unwrap();
        let report = cohomology(&cone_z, None).unwrap();
        assert_eq!(report.total_dimension(), 1);
    }
}
