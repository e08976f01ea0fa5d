//! Weight-truncated free graded-commutative algebras and the operators
//! used on them.
//!
//! `Sym(V)` on a finite graded module `V` is spanned by monomials: finite
//! multisets of generators in which odd generators appear at most once.
//! The truncation at weight `N` keeps word length at most `N`.  Products
//! silently drop overflow terms (the truncation is the quotient by the
//! ideal of weight `> N`); the coproduct needs no truncation because the
//! weight filtration is a filtration by subcoalgebras.
//!
//! Operators are stored by their corestrictions: a map `cor` from key
//! monomials to algebra elements.  The extension to the whole algebra is
//!
//! `D(m) = sum over sub-multisets S of m matching a key:
//!         multiplicity(S in m) * koszul(S, m) * cor(S) * (m minus S)`
//!
//! where `koszul(S, m)` is the sign that moves the selected factors to
//! the front of `m` (odd-odd crossings only).  This is exactly the
//! coderivation on `Sym(V)` determined by the corestriction, for any
//! operator degree; the check `is_coderivation` verifies that statement
//! on the truncation for weight-non-increasing operators.

use crate::error::{Error, Result};
use crate::graded::{GenId, GradedComplex, GradedMap, GradedSpace, LinComb};
use crate::scalar::{Rational, Scalar};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

/// A monomial: factors sorted by the canonical rank of the generator,
/// odd generators with multiplicity at most one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    factors: Vec<(GenId, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { factors: vec![] }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn generator(id: GenId) -> Self {
        Monomial { factors: vec![(id, 1)] }
    }

    /// Builds a monomial from an unsorted multiset.  Returns `None` when an
    /// odd generator repeats (its square is zero).
    pub fn from_multiset(space: &GradedSpace, items: &[(GenId, u32)]) -> Option<Self> {
        let mut acc: BTreeMap<usize, (GenId, u32)> = BTreeMap::new();
        for &(id, k) in items {
            if k == 0 {
                continue;
            }
            let e = acc.entry(space.canonical_rank(id)).or_insert((id, 0));
            e.1 += k;
        }
        let factors: Vec<(GenId, u32)> = acc.into_values().collect();
        for &(id, k) in &factors {
            if space.degree(id).rem_euclid(2) == 1 && k > 1 {
                return None;
            }
        }
        Some(Monomial { factors })
    }

    pub fn factors(&self) -> &[(GenId, u32)] {
        &self.factors
    }

    pub fn weight(&self) -> u32 {
        self.factors.iter().map(|&(_, k)| k).sum()
    }

    pub fn degree(&self, space: &GradedSpace) -> i64 {
        self.factors
            .iter()
            .map(|&(id, k)| space.degree(id) * k as i64)
            .sum()
    }

    pub fn multiplicity(&self, id: GenId) -> u32 {
        self.factors
            .iter()
            .find(|&&(g, _)| g == id)
            .map(|&(_, k)| k)
            .unwrap_or(0)
    }

    pub fn name(&self, space: &GradedSpace) -> String {
        if self.factors.is_empty() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|&(id, k)| {
                if k == 1 {
                    space.name(id).to_string()
                } else {
                    format!("{}^{}", space.name(id), k)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Multiset containment.
    pub fn contains(&self, sub: &Monomial) -> bool {
        sub.factors
            .iter()
            .all(|&(id, k)| self.multiplicity(id) >= k)
    }

    /// Multiset difference; caller must ensure containment.
    pub fn remove(&self, sub: &Monomial) -> Monomial {
        let factors = self
            .factors
            .iter()
            .filter_map(|&(id, k)| {
                let r = k - sub.multiplicity(id);
                (r > 0).then_some((id, r))
            })
            .collect();
        Monomial { factors }
    }
}

fn is_odd(space: &GradedSpace, id: GenId) -> bool {
    space.degree(id).rem_euclid(2) == 1
}

/// Product of sorted monomials with the Koszul sign; `None` when an odd
/// generator squares.
pub fn mul_monomials(
    space: &GradedSpace,
    a: &Monomial,
    b: &Monomial,
) -> Option<(Monomial, bool)> {
    // Suffix counts of odd factors in `a` by rank position, to count how
    // many odd factors of `a` each odd factor of `b` must cross.
    let ranks_a: Vec<usize> = a.factors.iter().map(|&(id, _)| space.canonical_rank(id)).collect();
    let odd_suffix: Vec<u32> = {
        let mut v = vec![0u32; a.factors.len() + 1];
        for i in (0..a.factors.len()).rev() {
            let (id, _) = a.factors[i];
            v[i] = v[i + 1] + if is_odd(space, id) { 1 } else { 0 };
        }
        v
    };
    let mut neg = false;
    for &(id, _) in &b.factors {
        if !is_odd(space, id) {
            continue;
        }
        if a.multiplicity(id) > 0 {
            return None;
        }
        let rank = space.canonical_rank(id);
        // first position in a with rank > rank(id)
        let pos = ranks_a.partition_point(|&r| r < rank);
        if odd_suffix[pos] % 2 == 1 {
            neg = !neg;
        }
    }
    let mut acc: BTreeMap<usize, (GenId, u32)> = BTreeMap::new();
    for &(id, k) in a.factors.iter().chain(&b.factors) {
        let e = acc.entry(space.canonical_rank(id)).or_insert((id, 0));
        e.1 += k;
    }
    Some((Monomial { factors: acc.into_values().collect() }, neg))
}

fn binomial(k: u32, s: u32) -> Rational {
    let mut num = Rational::from_integer(1.into());
    for i in 0..s {
        num *= Rational::from_integer((k - i).into());
        num /= Rational::from_integer((i + 1).into());
    }
    num
}

/// Multiplicity and Koszul sign of extracting the sub-multiset `sel` from
/// `m` (selected factors move to the front).  `None` when not contained.
pub fn extraction_data(
    space: &GradedSpace,
    m: &Monomial,
    sel: &Monomial,
) -> Option<(Rational, bool)> {
    if !m.contains(sel) {
        return None;
    }
    let mut mult = Rational::from_integer(1.into());
    let mut neg = false;
    let mut odd_unselected = 0u32;
    for &(id, k) in &m.factors {
        let s = sel.multiplicity(id);
        if is_odd(space, id) {
            if s == 1 && odd_unselected % 2 == 1 {
                neg = !neg;
            }
            odd_unselected += k - s;
        } else if s > 0 {
            mult *= binomial(k, s);
        }
    }
    Some((mult, neg))
}

/// A sparse algebra element: scalar combination of monomials.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Element {
    pub terms: BTreeMap<Monomial, Scalar>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_monomial(m: Monomial, c: Scalar) -> Self {
        let mut e = Element::zero();
        e.add_term(m, c);
        e
    }

    pub fn one() -> Self {
        Element::from_monomial(Monomial::one(), Scalar::one())
    }

    pub fn generator(id: GenId) -> Self {
        Element::from_monomial(Monomial::generator(id), Scalar::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn plus(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Element) -> Element {
        self.plus(&other.scale(&Scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    /// Degree if every term has the same one.
    pub fn homogeneous_degree(&self, space: &GradedSpace) -> Option<i64> {
        let mut it = self.terms.keys();
        let first = it.next()?.degree(space);
        it.all(|m| m.degree(space) == first).then_some(first)
    }

    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|m| m.weight()).max().unwrap_or(0)
    }

    pub fn parameters(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        for c in self.terms.values() {
            out.extend(c.parameters());
        }
        out
    }

    pub fn substitute(&self, name: &str, value: &Rational) -> Element {
        let mut out = Element::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.substitute(name, value));
        }
        out
    }

    pub fn format(&self, space: &GradedSpace) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, c)| format!("({}) {}", c, m.name(space)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Element of the tensor square, used by coproduct checks.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TensorElement {
    pub terms: BTreeMap<(Monomial, Monomial), Scalar>,
}

impl TensorElement {
    pub fn zero() -> Self {
        TensorElement::default()
    }

    pub fn add_term(&mut self, l: Monomial, r: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((l, r)) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

struct AlgebraInner {
    module: GradedComplex,
    cutoff: u32,
    basis: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

/// The weight truncation of the free graded-commutative algebra on the
/// generators of a module, with its monomial basis enumerated in
/// (weight, lexicographic) order.  The basis at a smaller cutoff is a
/// prefix of the basis at a larger one.
#[derive(Clone)]
pub struct TruncatedSymAlgebra {
    inner: Arc<AlgebraInner>,
}

impl fmt::Debug for TruncatedSymAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TruncatedSymAlgebra(cutoff {}, basis {})",
            self.inner.cutoff,
            self.inner.basis.len()
        )
    }
}

pub(crate) fn basis_ceiling() -> usize {
    std::env::var("BVQ_MAX_BASIS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(200_000)
}

/// Builds the weight truncation `Sym(V) / (weight > cutoff)`.  The basis
/// size is capped by the `BVQ_MAX_BASIS` environment variable
/// (default 200000).
pub fn sym_truncation(module: &GradedComplex, cutoff: u32) -> Result<TruncatedSymAlgebra> {
    sym_truncation_with_ceiling(module, cutoff, basis_ceiling())
}

pub fn sym_truncation_with_ceiling(
    module: &GradedComplex,
    cutoff: u32,
    ceiling: usize,
) -> Result<TruncatedSymAlgebra> {
    let space = &module.space;
    let gens: Vec<GenId> = {
        let mut v: Vec<GenId> = space.ids().collect();
        v.sort_by_key(|&id| space.canonical_rank(id));
        v
    };
    let mut basis: Vec<Monomial> = Vec::new();
    // Depth-first over generators in rank order; every partial choice is
    // already sorted, so monomials come out canonical.
    fn rec(
        space: &GradedSpace,
        gens: &[GenId],
        pos: usize,
        remaining: u32,
        current: &mut Vec<(GenId, u32)>,
        out: &mut Vec<Monomial>,
        ceiling: usize,
    ) -> Result<()> {
        if out.len() > ceiling {
            return Err(Error::CutoffTooLargeForMemory { basis: out.len(), ceiling });
        }
        out.push(Monomial { factors: current.clone() });
        for i in pos..gens.len() {
            let id = gens[i];
            let max = if is_odd(space, id) { 1.min(remaining) } else { remaining };
            for k in 1..=max {
                current.push((id, k));
                rec(space, gens, i + 1, remaining - k, current, out, ceiling)?;
                current.pop();
            }
        }
        Ok(())
    }
    rec(space, &gens, 0, cutoff, &mut Vec::new(), &mut basis, ceiling)?;
    if basis.len() > ceiling {
        return Err(Error::CutoffTooLargeForMemory { basis: basis.len(), ceiling });
    }
    basis.sort_by(|a, b| (a.weight(), &a.factors).cmp(&(b.weight(), &b.factors)));
    let index = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.clone(), i))
        .collect();
    Ok(TruncatedSymAlgebra {
        inner: Arc::new(AlgebraInner { module: module.clone(), cutoff, basis, index }),
    })
}

impl TruncatedSymAlgebra {
    pub fn module(&self) -> &GradedComplex {
        &self.inner.module
    }

    pub fn space(&self) -> &GradedSpace {
        &self.inner.module.space
    }

    pub fn cutoff(&self) -> u32 {
        self.inner.cutoff
    }

    pub fn basis_len(&self) -> usize {
        self.inner.basis.len()
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.inner.basis
    }

    pub fn monomial(&self, idx: usize) -> &Monomial {
        &self.inner.basis[idx]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.inner.index.get(m).copied()
    }

    /// Truncating product.
    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        let space = self.space();
        let mut out = Element::zero();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if ma.weight() + mb.weight() > self.inner.cutoff {
                    continue;
                }
                if let Some((m, neg)) = mul_monomials(space, ma, mb) {
                    let mut c = ca.clone() * cb.clone();
                    if neg {
                        c = -c;
                    }
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    /// Full coproduct of a monomial (both tensor factors stay within the
    /// cutoff automatically).
    pub fn coproduct_monomial(&self, m: &Monomial) -> TensorElement {
        let space = self.space();
        let mut out = TensorElement::zero();
        // Enumerate all sub-multisets.
        let factors = m.factors().to_vec();
        let mut choice: Vec<u32> = vec![0; factors.len()];
        loop {
            let sel = Monomial {
                factors: factors
                    .iter()
                    .zip(&choice)
                    .filter_map(|(&(id, _), &s)| (s > 0).then_some((id, s)))
                    .collect(),
            };
            let rest = m.remove(&sel);
            let (mult, neg) = extraction_data(space, m, &sel).expect("sub-multiset");
            let mut c = Scalar::from_rational(mult);
            if neg {
                c = -c;
            }
            out.add_term(sel, rest, c);
            // next choice
            let mut i = 0;
            loop {
                if i == factors.len() {
                    return out;
                }
                if choice[i] < factors[i].1 {
                    choice[i] += 1;
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    pub fn coproduct(&self, e: &Element) -> TensorElement {
        let mut out = TensorElement::zero();
        for (m, c) in &e.terms {
            for ((l, r), v) in self.coproduct_monomial(m).terms {
                out.add_term(l, r, v * c.clone());
            }
        }
        out
    }
}

/// Convenience free function mirroring `TruncatedSymAlgebra::coproduct`.
pub fn coproduct(alg: &TruncatedSymAlgebra, e: &Element) -> TensorElement {
    alg.coproduct(e)
}

/// An operator on `Sym(V)` determined by corestrictions.  Keys of
/// different weights may mix (so a differential plus a pairing term is a
/// single operator).  The empty key is disallowed, hence `D(1) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    pub degree: i64,
    cor: BTreeMap<Monomial, Element>,
}

/// Builds an operator from corestriction data, checking degree
/// homogeneity of every entry.
pub fn extend_operator(
    space: &GradedSpace,
    degree: i64,
    entries: impl IntoIterator<Item = (Monomial, Element)>,
) -> Result<Operator> {
    let mut cor = BTreeMap::new();
    for (key, out) in entries {
        if key.is_one() {
            return Err(Error::ValidationError {
                context: "constant (empty-key) corestrictions are not allowed".into(),
            });
        }
        let key_deg = key.degree(space);
        for m in out.terms.keys() {
            if m.degree(space) != key_deg + degree {
                return Err(Error::DegreeMismatch {
                    context: format!(
                        "corestriction {} -> {} jumps {} in an operator of degree {}",
                        key.name(space),
                        m.name(space),
                        m.degree(space) - key_deg,
                        degree
                    ),
                });
            }
        }
        if out.is_zero() {
            continue;
        }
        if cor.insert(key.clone(), out).is_some() {
            return Err(Error::ValidationError {
                context: format!("duplicate corestriction key {}", key.name(space)),
            });
        }
    }
    Ok(Operator { degree, cor })
}

impl Operator {
    pub fn zero(degree: i64) -> Self {
        Operator { degree, cor: BTreeMap::new() }
    }

    /// The derivation extending the differential of the module.
    pub fn derivation_from(module: &GradedComplex) -> Operator {
        let mut cor = BTreeMap::new();
        for id in module.space.ids() {
            let img: LinComb = module.differential.image_of(id);
            if img.is_empty() {
                continue;
            }
            let mut e = Element::zero();
            for (t, c) in img {
                e.add_term(Monomial::generator(t), c);
            }
            cor.insert(Monomial::generator(id), e);
        }
        Operator { degree: 1, cor }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn corestrictions(&self) -> impl Iterator<Item = (&Monomial, &Element)> {
        self.cor.iter()
    }

    pub fn corestriction(&self, key: &Monomial) -> Option<&Element> {
        self.cor.get(key)
    }

    pub fn max_key_weight(&self) -> u32 {
        self.cor.keys().map(|k| k.weight()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.cor.is_empty()
    }

    pub fn plus(&self, other: &Operator) -> Operator {
        debug_assert_eq!(self.degree, other.degree);
        let mut cor = self.cor.clone();
        for (k, v) in &other.cor {
            let slot = cor.entry(k.clone()).or_insert_with(Element::zero);
            *slot = slot.plus(v);
            if slot.is_zero() {
                cor.remove(k);
            }
        }
        Operator { degree: self.degree, cor }
    }

    pub fn scale(&self, c: &Scalar) -> Operator {
        if c.is_zero() {
            return Operator::zero(self.degree);
        }
        Operator {
            degree: self.degree,
            cor: self.cor.iter().map(|(k, v)| (k.clone(), v.scale(c))).collect(),
        }
    }

    pub fn parameters(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        for v in self.cor.values() {
            out.extend(v.parameters());
        }
        out
    }

    pub fn substitute(&self, name: &str, value: &Rational) -> Operator {
        let mut cor = BTreeMap::new();
        for (k, v) in &self.cor {
            let v = v.substitute(name, value);
            if !v.is_zero() {
                cor.insert(k.clone(), v);
            }
        }
        Operator { degree: self.degree, cor }
    }

    /// Extension of the corestrictions to a monomial.
    pub fn apply_monomial(&self, alg: &TruncatedSymAlgebra, m: &Monomial) -> Element {
        let space = alg.space();
        let mut out = Element::zero();
        for (key, value) in &self.cor {
            let Some((mult, neg)) = extraction_data(space, m, key) else {
                continue;
            };
            let rest = m.remove(key);
            let mut c = Scalar::from_rational(mult);
            if neg {
                c = -c;
            }
            let contribution = alg.mul(value, &Element::from_monomial(rest, c));
            out = out.plus(&contribution);
        }
        out
    }

    pub fn apply(&self, alg: &TruncatedSymAlgebra, e: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in &e.terms {
            out = out.plus(&self.apply_monomial(alg, m).scale(c));
        }
        out
    }

    /// Materializes the operator as a linear map on the basis.
    pub fn to_algebra_map(&self, alg: &TruncatedSymAlgebra) -> AlgebraMap {
        let entries = alg
            .basis()
            .iter()
            .map(|m| self.apply_monomial(alg, m))
            .collect();
        AlgebraMap { source: alg.clone(), target: alg.clone(), degree: self.degree, entries }
    }
}

/// The cochain complex of a degree-1 square-zero operator on the
/// truncated algebra.  Generator ids equal basis indices, so canonical
/// per-degree orderings are weight-ascending.
pub fn complex_of_operator(
    alg: &TruncatedSymAlgebra,
    d: &Operator,
) -> Result<GradedComplex> {
    if d.degree != 1 {
        return Err(Error::DegreeMismatch {
            context: format!("complex differential must have degree 1, found {}", d.degree),
        });
    }
    let space = alg.space();
    let sym_space = GradedSpace::new(
        alg.basis()
            .iter()
            .map(|m| (m.name(space), m.degree(space))),
    )?;
    let mut diff = GradedMap::zero(sym_space.clone(), sym_space.clone(), 1);
    for (idx, m) in alg.basis().iter().enumerate() {
        let img = d.apply_monomial(alg, m);
        for (t, c) in img.terms {
            let tidx = alg.index_of(&t).expect("image stays within cutoff");
            diff.add_to(idx, tidx, c)?;
        }
    }
    GradedComplex::new(sym_space, diff)
}

/// A plain linear map between truncated algebras, stored as the image of
/// every source basis monomial.
#[derive(Clone)]
pub struct AlgebraMap {
    pub source: TruncatedSymAlgebra,
    pub target: TruncatedSymAlgebra,
    pub degree: i64,
    entries: Vec<Element>,
}

impl AlgebraMap {
    pub fn identity(alg: &TruncatedSymAlgebra) -> Self {
        AlgebraMap {
            source: alg.clone(),
            target: alg.clone(),
            degree: 0,
            entries: alg
                .basis()
                .iter()
                .map(|m| Element::from_monomial(m.clone(), Scalar::one()))
                .collect(),
        }
    }

    pub fn from_images(
        source: &TruncatedSymAlgebra,
        target: &TruncatedSymAlgebra,
        degree: i64,
        entries: Vec<Element>,
    ) -> Self {
        debug_assert_eq!(entries.len(), source.basis_len());
        AlgebraMap { source: source.clone(), target: target.clone(), degree, entries }
    }

    pub fn image_of_index(&self, idx: usize) -> &Element {
        &self.entries[idx]
    }

    pub fn apply(&self, e: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in &e.terms {
            let idx = self
                .source
                .index_of(m)
                .expect("element outside the source truncation");
            out = out.plus(&self.entries[idx].scale(c));
        }
        out
    }

    /// `other` after `self`.
    pub fn then(&self, other: &AlgebraMap) -> AlgebraMap {
        let entries = self.entries.iter().map(|e| other.apply(e)).collect();
        AlgebraMap {
            source: self.source.clone(),
            target: other.target.clone(),
            degree: self.degree + other.degree,
            entries,
        }
    }

    pub fn equal(&self, other: &AlgebraMap) -> bool {
        self.degree == other.degree && self.entries == other.entries
    }

    /// The multiplicative extension of a degree-0 linear map on
    /// generators: a monomial maps to the product of the images of its
    /// letters.
    pub fn sym_of_linear(
        source: &TruncatedSymAlgebra,
        target: &TruncatedSymAlgebra,
        f: &GradedMap,
    ) -> AlgebraMap {
        debug_assert_eq!(f.degree, 0);
        debug_assert!(f.source == *source.space() && f.target == *target.space());
        let entries = source
            .basis()
            .iter()
            .map(|m| {
                let mut acc = Element::one();
                for &(id, k) in m.factors() {
                    let img: LinComb = f.image_of(id);
                    let mut letter = Element::zero();
                    for (t, c) in img {
                        letter.add_term(Monomial::generator(t), c);
                    }
                    for _ in 0..k {
                        acc = target.mul(&acc, &letter);
                    }
                }
                acc
            })
            .collect();
        AlgebraMap { source: source.clone(), target: target.clone(), degree: 0, entries }
    }
}

/// Exponential of a degree-0, strictly weight-lowering operator.  The sum
/// terminates because each application lowers weight.
pub fn exp_weight_lowering(alg: &TruncatedSymAlgebra, op: &Operator) -> Result<AlgebraMap> {
    if op.degree != 0 {
        return Err(Error::NotDegreeZero { degree: op.degree });
    }
    for (key, out) in op.corestrictions() {
        if out.max_weight() >= key.weight() {
            return Err(Error::NotWeightLowering {
                witness: format!(
                    "corestriction {} has output weight {} >= key weight {}",
                    key.name(alg.space()),
                    out.max_weight(),
                    key.weight()
                ),
            });
        }
    }
    let entries = alg
        .basis()
        .iter()
        .map(|m| {
            let mut acc = Element::from_monomial(m.clone(), Scalar::one());
            let mut term = acc.clone();
            let mut k = 1u64;
            loop {
                term = op.apply(alg, &term).scale(&Scalar::from_ratio(1, k as i64));
                if term.is_zero() {
                    break;
                }
                acc = acc.plus(&term);
                k += 1;
            }
            acc
        })
        .collect();
    Ok(AlgebraMap { source: alg.clone(), target: alg.clone(), degree: 0, entries })
}

fn tensor_apply(
    alg: &TruncatedSymAlgebra,
    map: &AlgebraMap,
    te: &TensorElement,
    right: bool,
) -> TensorElement {
    let space = alg.space();
    let mut out = TensorElement::zero();
    for ((l, r), c) in &te.terms {
        if right {
            // (1 (x) D)(l (x) r) = (-1)^{|D| |l|} l (x) D(r)
            let sign = if (map.degree * l.degree(space)).rem_euclid(2) == 1 {
                Scalar::from_int(-1)
            } else {
                Scalar::one()
            };
            let dr = map.apply(&Element::from_monomial(r.clone(), Scalar::one()));
            for (m, v) in dr.terms {
                out.add_term(l.clone(), m, sign.clone() * v * c.clone());
            }
        } else {
            let dl = map.apply(&Element::from_monomial(l.clone(), Scalar::one()));
            for (m, v) in dl.terms {
                out.add_term(m, r.clone(), v * c.clone());
            }
        }
    }
    out
}

/// Checks `coproduct . D = (D (x) 1 + 1 (x) D) . coproduct` on every
/// basis monomial.  Exact for weight-non-increasing maps.  Extraction
/// operators satisfy this exactly when their corestrictions take values
/// in `Sym^1` (linear coefficients); constant-coefficient operators are
/// comodule maps instead, see `is_comodule_map`.
pub fn is_coderivation(alg: &TruncatedSymAlgebra, map: &AlgebraMap) -> bool {
    for m in alg.basis() {
        let e = Element::from_monomial(m.clone(), Scalar::one());
        let lhs = alg.coproduct(&map.apply(&e));
        let delta = alg.coproduct_monomial(m);
        let mut rhs = tensor_apply(alg, map, &delta, false);
        for ((l, r), c) in tensor_apply(alg, map, &delta, true).terms {
            rhs.add_term(l, r, c);
        }
        if lhs != rhs {
            return false;
        }
    }
    true
}

/// Checks `coproduct . D = (1 (x) D) . coproduct`, the law satisfied by
/// constant-coefficient differential operators (contraction products).
pub fn is_comodule_map(alg: &TruncatedSymAlgebra, map: &AlgebraMap) -> bool {
    for m in alg.basis() {
        let e = Element::from_monomial(m.clone(), Scalar::one());
        let lhs = alg.coproduct(&map.apply(&e));
        let delta = alg.coproduct_monomial(m);
        let rhs = tensor_apply(alg, map, &delta, true);
        if lhs != rhs {
            return false;
        }
    }
    true
}

/// Recovers corestriction data from a linear map by projecting images to
/// `Sym^1`.  For a coderivation with linear-coefficient corestrictions
/// this reconstructs the operator exactly (the projection of `D(m)` to
/// `Sym^1` is the corestriction at `m` itself).
pub fn corestrictions_of_map(
    alg: &TruncatedSymAlgebra,
    map: &AlgebraMap,
) -> Result<Operator> {
    let space = alg.space();
    let mut entries = Vec::new();
    for (idx, m) in alg.basis().iter().enumerate() {
        if m.is_one() {
            continue;
        }
        let img = map.image_of_index(idx);
        let mut lin = Element::zero();
        for (t, c) in &img.terms {
            if t.weight() == 1 {
                lin.add_term(t.clone(), c.clone());
            }
        }
        if !lin.is_zero() {
            entries.push((m.clone(), lin));
        }
    }
    extend_operator(space, map.degree, entries)
}

/// `D(a b) - D(a) b - (-1)^{r |a|} a D(b)` for homogeneous `a`; the
/// failure of an operator to be a derivation, which for second-order
/// operators is the induced bracket.
pub fn leibniz_failure(
    alg: &TruncatedSymAlgebra,
    op: &Operator,
    a: &Element,
    b: &Element,
) -> Result<Element> {
    let Some(da) = a.homogeneous_degree(alg.space()) else {
        return Err(Error::ValidationError {
            context: "leibniz_failure requires a homogeneous first argument".into(),
        });
    };
    let ab = alg.mul(a, b);
    let mut out = op.apply(alg, &ab);
    out = out.minus(&alg.mul(&op.apply(alg, a), b));
    let sign = if (op.degree * da).rem_euclid(2) == 1 {
        Scalar::from_int(-1)
    } else {
        Scalar::one()
    };
    out = out.minus(&alg.mul(a, &op.apply(alg, b)).scale(&sign));
    Ok(out)
}
