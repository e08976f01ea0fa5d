//! Degree `+1` Lie brackets, quadratic modules, and Heisenberg algebras.
//!
//! A shifted Lie algebra here is a complex `g` with a bracket of degree `+1`.
//! All axioms are stated in transported form, i.e. as the images of the
//! ordinary super Lie axioms under the fixed identification with the
//! desuspension (where a generator of degree `d` sits in degree `d+1`):
//!
//!   [x,y] = (-1)^{|x||y|} [y,x]
//!   [x,[y,z]] = (-1)^{|x|+1} [[x,y],z] + (-1)^{(|x|+1)(|y|+1)} [y,[x,z]]
//!   d[x,y] = -[dx,y] - (-1)^{|x|} [x,dy]
//!
//! A quadratic module is a complex with a pairing of degree `-1`; on its
//! support (degree sum `-1`, so exactly one argument even) the transported
//! symmetry reads `w(y,x) = w(x,y)` with no sign.  The Heisenberg algebra of
//! a quadratic module adjoins one central degree-0 generator `c` and sets
//! `[x,y] = w(x,y) c`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cohomology::cohomology;
use crate::error::{Error, Result, ValidationReport};
use crate::graded::{
    check_chain_map, cone, dual, format_lincomb, lincomb_add, oplus_complex, shift, sign_pow,
    GenId, GradedComplex, GradedMap, GradedSpace, LinComb,
};
use crate::linalg::Rref;
use crate::scalar::{Rational, Scalar};

/// A finite linear combination of Lie algebra generators.
pub type LieElement = LinComb;

pub(crate) fn singleton(id: GenId) -> LinComb {
    let mut v = LinComb::new();
    v.insert(id, Scalar::one());
    v
}

pub(crate) fn add_scaled(acc: &mut LinComb, v: &LinComb, c: &Scalar) {
    if c.is_zero() {
        return;
    }
    for (id, coeff) in v {
        lincomb_add(acc, *id, c * coeff);
    }
}

fn lincomb_is_zero(v: &LinComb) -> bool {
    v.values().all(|c| c.is_zero())
}

/// A complex with a degree `+1` bracket stored as a sparse table on
/// generator pairs; absent pairs bracket to zero.
#[derive(Clone, Debug)]
pub struct ShiftedLieAlgebra {
    pub complex: GradedComplex,
    pub table: BTreeMap<(GenId, GenId), LieElement>,
    /// Set by constructions that adjoin a central generator (`heisenberg`).
    pub central: Option<GenId>,
}

impl ShiftedLieAlgebra {
    pub fn abelian(complex: GradedComplex) -> Self {
        ShiftedLieAlgebra { complex, table: BTreeMap::new(), central: None }
    }

    /// Build from named bracket entries `[x,y] = sum of (name, coeff)`.
    pub fn from_named_table<'a>(
        complex: GradedComplex,
        entries: impl IntoIterator<Item = (&'a str, &'a str, Vec<(&'a str, Scalar)>)>,
    ) -> Result<Self> {
        let mut table: BTreeMap<(GenId, GenId), LieElement> = BTreeMap::new();
        for (x, y, value) in entries {
            let xi = complex.space.id(x)?;
            let yi = complex.space.id(y)?;
            let mut v = LinComb::new();
            for (name, c) in value {
                lincomb_add(&mut v, complex.space.id(name)?, c);
            }
            v.retain(|_, c| !c.is_zero());
            if !v.is_empty() {
                table.insert((xi, yi), v);
            }
        }
        Ok(ShiftedLieAlgebra { complex, table, central: None })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.complex.space
    }

    pub fn bracket(&self, x: GenId, y: GenId) -> LieElement {
        self.table.get(&(x, y)).cloned().unwrap_or_default()
    }

    /// Bilinear extension of the bracket table.
    pub fn bracket_lin(&self, a: &LinComb, b: &LinComb) -> LieElement {
        let mut acc = LinComb::new();
        for (x, cx) in a {
            for (y, cy) in b {
                if let Some(v) = self.table.get(&(*x, *y)) {
                    add_scaled(&mut acc, v, &(cx * cy));
                }
            }
        }
        acc
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut ps = self.complex.parameters();
        for v in self.table.values() {
            for c in v.values() {
                ps.extend(c.parameters());
            }
        }
        ps
    }
}

/// Checks every bracket axiom on every generator tuple and reports all
/// failures with witnesses.
pub fn validate_lie1(l: &ShiftedLieAlgebra) -> ValidationReport {
    let mut report = ValidationReport::new();
    let space = l.space();
    let ids: Vec<GenId> = space.ids().collect();
    let pair_name =
        |x: GenId, y: GenId| format!("({}, {})", space.name(x), space.name(y));

    for (&(x, y), v) in &l.table {
        let want = space.degree(x) + space.degree(y) + 1;
        for (g, c) in v {
            if !c.is_zero() && space.degree(*g) != want {
                report.push(
                    "bracket degree",
                    pair_name(x, y),
                    format!(
                        "term {} sits in degree {}, bracket must land in degree {}",
                        space.name(*g),
                        space.degree(*g),
                        want
                    ),
                );
            }
        }
    }

    let mut seen: BTreeSet<(GenId, GenId)> = BTreeSet::new();
    for &(x, y) in l.table.keys() {
        let key = (x.min(y), x.max(y));
        if !seen.insert(key) {
            continue;
        }
        let (x, y) = key;
        let sign = sign_pow(space.degree(x) * space.degree(y));
        let mut diff = l.bracket(x, y);
        add_scaled(&mut diff, &l.bracket(y, x), &-sign);
        if !lincomb_is_zero(&diff) {
            report.push(
                "transported antisymmetry",
                pair_name(x, y),
                format!(
                    "[x,y] - (-1)^(|x||y|)[y,x] = {}",
                    format_lincomb(space, &diff)
                ),
            );
        }
    }

    let d = &l.complex.differential;
    for &x in &ids {
        for &y in &ids {
            // d[x,y] + [dx,y] + (-1)^{|x|} [x,dy] must vanish
            let mut acc = d.apply(&l.bracket(x, y));
            add_scaled(&mut acc, &l.bracket_lin(&d.image_of(x), &singleton(y)), &Scalar::one());
            add_scaled(
                &mut acc,
                &l.bracket_lin(&singleton(x), &d.image_of(y)),
                &sign_pow(space.degree(x)),
            );
            if !lincomb_is_zero(&acc) {
                report.push(
                    "bracket chain rule",
                    pair_name(x, y),
                    format!(
                        "d[x,y] + [dx,y] + (-1)^|x|[x,dy] = {}",
                        format_lincomb(space, &acc)
                    ),
                );
            }
        }
    }

    for &x in &ids {
        for &y in &ids {
            for &z in &ids {
                let mut acc = l.bracket_lin(&singleton(x), &l.bracket(y, z));
                add_scaled(
                    &mut acc,
                    &l.bracket_lin(&l.bracket(x, y), &singleton(z)),
                    &-sign_pow(space.degree(x) + 1),
                );
                add_scaled(
                    &mut acc,
                    &l.bracket_lin(&singleton(y), &l.bracket(x, z)),
                    &-sign_pow((space.degree(x) + 1) * (space.degree(y) + 1)),
                );
                if !lincomb_is_zero(&acc) {
                    report.push(
                        "transported Jacobi",
                        format!(
                            "({}, {}, {})",
                            space.name(x),
                            space.name(y),
                            space.name(z)
                        ),
                        format!("defect {}", format_lincomb(space, &acc)),
                    );
                }
            }
        }
    }
    report
}

/// A complex with a degree `-1` pairing stored on generator pairs.
#[derive(Clone, Debug)]
pub struct QuadraticModule {
    pub complex: GradedComplex,
    pub pairing: BTreeMap<(GenId, GenId), Scalar>,
}

impl QuadraticModule {
    pub fn with_zero_pairing(complex: GradedComplex) -> Self {
        QuadraticModule { complex, pairing: BTreeMap::new() }
    }

    /// Build from named entries, inserting both orientations of every pair
    /// (the pairing is symmetric on its degree support).
    pub fn from_entries<'a>(
        complex: GradedComplex,
        entries: impl IntoIterator<Item = (&'a str, &'a str, Scalar)>,
    ) -> Result<Self> {
        let mut pairing = BTreeMap::new();
        for (x, y, c) in entries {
            let xi = complex.space.id(x)?;
            let yi = complex.space.id(y)?;
            for key in [(xi, yi), (yi, xi)] {
                match pairing.get(&key) {
                    None => {
                        pairing.insert(key, c.clone());
                    }
                    Some(old) if *old == c => {}
                    Some(old) => {
                        return Err(Error::ValidationError {
                            context: format!(
                                "conflicting pairing entries for ({}, {}): {} vs {}",
                                complex.space.name(key.0),
                                complex.space.name(key.1),
                                old,
                                c
                            ),
                        })
                    }
                }
            }
        }
        pairing.retain(|_, c| !c.is_zero());
        Ok(QuadraticModule { complex, pairing })
    }

    /// Exact table as given, one orientation per entry.  Lets tests and
    /// diagnostics build deliberately broken modules.
    pub fn from_raw_entries<'a>(
        complex: GradedComplex,
        entries: impl IntoIterator<Item = (&'a str, &'a str, Scalar)>,
    ) -> Result<Self> {
        let mut pairing = BTreeMap::new();
        for (x, y, c) in entries {
            let key = (complex.space.id(x)?, complex.space.id(y)?);
            if !c.is_zero() {
                pairing.insert(key, c);
            }
        }
        Ok(QuadraticModule { complex, pairing })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.complex.space
    }

    pub fn pairing_of(&self, x: GenId, y: GenId) -> Scalar {
        self.pairing.get(&(x, y)).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Bilinear extension of the pairing table.
    pub fn pair_lin(&self, a: &LinComb, b: &LinComb) -> Scalar {
        let mut acc = Scalar::zero();
        for (x, cx) in a {
            for (y, cy) in b {
                if let Some(w) = self.pairing.get(&(*x, *y)) {
                    acc += cx * cy * w.clone();
                }
            }
        }
        acc
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut ps = self.complex.parameters();
        for c in self.pairing.values() {
            ps.extend(c.parameters());
        }
        ps
    }

    pub fn substitute(&self, name: &str, value: &Rational) -> Result<QuadraticModule> {
        let complex = self.complex.substitute(name, value)?;
        let mut pairing = BTreeMap::new();
        for (k, c) in &self.pairing {
            let c = c.substitute(name, value);
            if !c.is_zero() {
                pairing.insert(*k, c);
            }
        }
        Ok(QuadraticModule { complex, pairing })
    }
}

/// Checks degree support, symmetry, and compatibility with the differential;
/// reports all failures with witnesses.
pub fn validate_quadratic(q: &QuadraticModule) -> ValidationReport {
    let mut report = ValidationReport::new();
    let space = q.space();
    let pair_name =
        |x: GenId, y: GenId| format!("({}, {})", space.name(x), space.name(y));

    for (&(x, y), c) in &q.pairing {
        if c.is_zero() {
            continue;
        }
        if space.degree(x) + space.degree(y) != -1 {
            report.push(
                "pairing degree",
                pair_name(x, y),
                format!(
                    "degrees {} + {} must sum to -1",
                    space.degree(x),
                    space.degree(y)
                ),
            );
        }
    }

    let mut seen: BTreeSet<(GenId, GenId)> = BTreeSet::new();
    for &(x, y) in q.pairing.keys() {
        let key = (x.min(y), x.max(y));
        if !seen.insert(key) {
            continue;
        }
        let (x, y) = key;
        let diff = q.pairing_of(x, y) - q.pairing_of(y, x);
        if !diff.is_zero() {
            report.push(
                "pairing symmetry",
                pair_name(x, y),
                format!("w(x,y) - w(y,x) = {}", diff),
            );
        }
    }

    let d = &q.complex.differential;
    let ids: Vec<GenId> = space.ids().collect();
    for &x in &ids {
        for &y in &ids {
            // w(dx,y) + (-1)^{|x|} w(x,dy) must vanish
            let mut acc = q.pair_lin(&d.image_of(x), &singleton(y));
            acc += sign_pow(space.degree(x)) * q.pair_lin(&singleton(x), &d.image_of(y));
            if !acc.is_zero() {
                report.push(
                    "differential compatibility",
                    pair_name(x, y),
                    format!("w(dx,y) + (-1)^|x| w(x,dy) = {}", acc),
                );
            }
        }
    }
    report
}

fn fresh_name(space: &GradedSpace, base: &str) -> String {
    let mut name = base.to_string();
    while space.contains_name(&name) {
        name.push('\'');
    }
    name
}

/// The Heisenberg algebra of a quadratic module: one central degree-0
/// generator `c` is adjoined and `[x,y] = w(x,y) c`.
pub fn heisenberg(q: &QuadraticModule) -> Result<ShiftedLieAlgebra> {
    let report = validate_quadratic(q);
    if !report.is_valid() {
        return Err(Error::InvalidQuadraticModule { report });
    }
    let old = q.space();
    let cname = fresh_name(old, "c");
    let gens: Vec<(String, i64)> = old
        .generators()
        .iter()
        .map(|g| (g.name.clone(), g.degree))
        .chain(std::iter::once((cname, 0)))
        .collect();
    let space = GradedSpace::new(gens)?;
    let central = space.len() - 1;
    let mut d = GradedMap::zero(space.clone(), space.clone(), 1);
    for (s, t, c) in q.complex.differential.entries() {
        d.add_to(s, t, c.clone())?;
    }
    let complex = GradedComplex::new(space, d)?;
    let mut table = BTreeMap::new();
    for (&(x, y), w) in &q.pairing {
        if !w.is_zero() {
            let mut v = LinComb::new();
            v.insert(central, w.clone());
            table.insert((x, y), v);
        }
    }
    Ok(ShiftedLieAlgebra { complex, table, central: Some(central) })
}

/// Direct sum of quadratic modules (orthogonal pairing).
pub fn oplus(a: &QuadraticModule, b: &QuadraticModule) -> Result<QuadraticModule> {
    let complex = oplus_complex(&a.complex, &b.complex)?;
    let offset = a.space().len();
    let mut pairing = a.pairing.clone();
    for (&(x, y), c) in &b.pairing {
        pairing.insert((x + offset, y + offset), c.clone());
    }
    Ok(QuadraticModule { complex, pairing })
}

/// `W + dual(W)[1]` with the evaluation pairing `w(e_i, e_i^*) = 1`.
pub fn cotangent(w: &GradedComplex) -> Result<QuadraticModule> {
    let covectors = shift(&dual(w), 1);
    let complex = oplus_complex(w, &covectors)?;
    let n = w.space.len();
    let mut pairing = BTreeMap::new();
    for i in 0..n {
        pairing.insert((i, n + i), Scalar::one());
        pairing.insert((n + i, i), Scalar::one());
    }
    Ok(QuadraticModule { complex, pairing })
}

/// Whether the pairing map `V -> dual(V)[1]` is a quasi-isomorphism, decided
/// by acyclicity of its cone.  Requires a valid, parameter-free module.
pub fn is_nondegenerate(q: &QuadraticModule) -> Result<bool> {
    let params = q.parameters();
    if !params.is_empty() {
        return Err(Error::UnspecializedParameter {
            parameters: params.into_iter().collect(),
            context: "nondegeneracy is decided per specialization".into(),
        });
    }
    let report = validate_quadratic(q);
    if !report.is_valid() {
        return Err(Error::InvalidQuadraticModule { report });
    }
    let target = shift(&dual(&q.complex), 1);
    let mut f = GradedMap::zero(q.space().clone(), target.space.clone(), 0);
    for (&(x, y), c) in &q.pairing {
        // the dual keeps generator ids, so y names the covector slot
        f.add_to(x, y, c.clone())?;
    }
    debug_assert!(check_chain_map(&f, &q.complex, &target));
    let c = cone(&f, &q.complex, &target)?;
    Ok(cohomology(&c, None)?.total_dimension() == 0)
}

/// One hyperbolic pair: `plus` of degree `n >= 0`, `minus` of degree
/// `-1-n`, pairing `w(plus, minus) = 1`.
#[derive(Clone, Debug)]
pub struct SymplecticAtom {
    pub plus: LinComb,
    pub minus: LinComb,
    pub degree: i64,
}

/// A basis change splitting a nondegenerate pairing on a zero-differential
/// module into hyperbolic atoms.
#[derive(Clone, Debug)]
pub struct SymplecticAtomDecomposition {
    pub atoms: Vec<SymplecticAtom>,
    /// Standard model: generators `e{i}`, `f{i}` with unit pairings and zero
    /// differential.
    pub model: QuadraticModule,
    /// Chain isomorphism from the model onto the original module carrying
    /// the model pairing to the original one.
    pub change_of_basis: GradedMap,
}

pub fn symplectic_normal_form(q: &QuadraticModule) -> Result<SymplecticAtomDecomposition> {
    let params = q.parameters();
    if !params.is_empty() {
        return Err(Error::UnspecializedParameter {
            parameters: params.into_iter().collect(),
            context: "normal form is computed per specialization".into(),
        });
    }
    let report = validate_quadratic(q);
    if !report.is_valid() {
        return Err(Error::InvalidQuadraticModule { report });
    }
    if let Some((s, _, _)) = q.complex.differential.entries().next() {
        return Err(Error::NonzeroDifferential { witness: q.space().name(s).to_string() });
    }

    let space = q.space();
    let mut remaining: Vec<(LinComb, i64)> = space
        .canonical_ids()
        .map(|id| (singleton(id), space.degree(id)))
        .collect();
    let mut atoms = Vec::new();
    while !remaining.is_empty() {
        let (x, xdeg) = remaining.remove(0);
        let partner = remaining
            .iter()
            .position(|(z, _)| !q.pair_lin(&x, z).is_zero());
        let Some(j) = partner else {
            return Err(Error::DegeneratePairing {
                context: format!(
                    "{} pairs to zero with everything left",
                    format_lincomb(space, &x)
                ),
            });
        };
        let (mut y, ydeg) = remaining.remove(j);
        let w = q.pair_lin(&x, &y);
        let winv = w
            .as_rational()
            .expect("parameter-free by the guard above")
            .recip();
        for c in y.values_mut() {
            *c = c.scale(&winv);
        }
        // no self-pairing in odd total degree -1, so one sweep cleans both
        for (z, _) in remaining.iter_mut() {
            let a = q.pair_lin(z, &y);
            let b = q.pair_lin(z, &x);
            let mut znew = z.clone();
            add_scaled(&mut znew, &x, &-a);
            add_scaled(&mut znew, &y, &-b);
            znew.retain(|_, c| !c.is_zero());
            *z = znew;
        }
        let atom = if xdeg >= 0 {
            SymplecticAtom { plus: x, minus: y, degree: xdeg }
        } else {
            SymplecticAtom { plus: y, minus: x, degree: ydeg }
        };
        atoms.push(atom);
    }

    let mut gens: Vec<(String, i64)> = Vec::new();
    for (i, atom) in atoms.iter().enumerate() {
        gens.push((format!("e{}", i + 1), atom.degree));
        gens.push((format!("f{}", i + 1), -1 - atom.degree));
    }
    let model_space = GradedSpace::new(gens)?;
    let model_complex = GradedComplex::zero_differential(model_space.clone());
    let mut pairing = BTreeMap::new();
    let mut change = GradedMap::zero(model_space, space.clone(), 0);
    for (i, atom) in atoms.iter().enumerate() {
        let (e, f) = (2 * i, 2 * i + 1);
        pairing.insert((e, f), Scalar::one());
        pairing.insert((f, e), Scalar::one());
        for (g, c) in &atom.plus {
            change.add_to(e, *g, c.clone())?;
        }
        for (g, c) in &atom.minus {
            change.add_to(f, *g, c.clone())?;
        }
    }
    let model = QuadraticModule { complex: model_complex, pairing };
    Ok(SymplecticAtomDecomposition { atoms, model, change_of_basis: change })
}

/// A map of quadratic modules: a chain map `f` together with a homotopy
/// `eta` measuring the failure to preserve pairings, in the orientation
///
///   eta(dx,y) + (-1)^{|x|} eta(x,dy) = w(x,y) - w'(fx,fy).
#[derive(Clone, Debug)]
pub struct QuadraticMorphism {
    pub source: QuadraticModule,
    pub target: QuadraticModule,
    pub f: GradedMap,
    /// Degree-0 symmetric table on source pairs:
    /// `eta(y,x) = (-1)^{|x||y|} eta(x,y)`.
    pub eta: BTreeMap<(GenId, GenId), Scalar>,
}

impl QuadraticMorphism {
    pub fn new<'a>(
        source: QuadraticModule,
        target: QuadraticModule,
        f: GradedMap,
        eta_entries: impl IntoIterator<Item = (&'a str, &'a str, Scalar)>,
    ) -> Result<Self> {
        let space = source.space().clone();
        let mut eta = BTreeMap::new();
        for (x, y, c) in eta_entries {
            let xi = space.id(x)?;
            let yi = space.id(y)?;
            let mirror = sign_pow(space.degree(xi) * space.degree(yi)) * c.clone();
            for (key, val) in [((xi, yi), c), ((yi, xi), mirror)] {
                match eta.get(&key) {
                    None => {
                        eta.insert(key, val);
                    }
                    Some(old) if *old == val => {}
                    Some(old) => {
                        return Err(Error::ValidationError {
                            context: format!(
                                "conflicting homotopy entries for ({}, {}): {} vs {}",
                                space.name(key.0),
                                space.name(key.1),
                                old,
                                val
                            ),
                        })
                    }
                }
            }
        }
        eta.retain(|_, c| !c.is_zero());
        Ok(QuadraticMorphism { source, target, f, eta })
    }

    pub fn identity(q: &QuadraticModule) -> Self {
        let space = q.space().clone();
        let mut f = GradedMap::zero(space.clone(), space.clone(), 0);
        for id in space.ids() {
            f.set(id, id, Scalar::one()).expect("identity is degree 0");
        }
        QuadraticMorphism {
            source: q.clone(),
            target: q.clone(),
            f,
            eta: BTreeMap::new(),
        }
    }

    pub fn eta_of(&self, x: GenId, y: GenId) -> Scalar {
        self.eta.get(&(x, y)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn eta_lin(&self, a: &LinComb, b: &LinComb) -> Scalar {
        let mut acc = Scalar::zero();
        for (x, cx) in a {
            for (y, cy) in b {
                if let Some(w) = self.eta.get(&(*x, *y)) {
                    acc += cx * cy * w.clone();
                }
            }
        }
        acc
    }
}

/// Checks that `f` is a degree-0 chain map and that `eta` is a symmetric
/// degree-0 table satisfying the homotopy identity; reports all failures.
pub fn validate_morphism(m: &QuadraticMorphism) -> ValidationReport {
    let mut report = ValidationReport::new();
    let src = m.source.space();
    let tgt = m.target.space();
    let pair_name = |x: GenId, y: GenId| format!("({}, {})", src.name(x), src.name(y));

    if m.f.degree != 0 {
        report.push("map degree", "f", format!("degree {} map, expected 0", m.f.degree));
    }

    let ids: Vec<GenId> = src.ids().collect();
    for &x in &ids {
        let mut diff = m.target.complex.differential.apply(&m.f.image_of(x));
        add_scaled(&mut diff, &m.f.apply(&m.source.complex.differential.image_of(x)), &Scalar::from_int(-1));
        if !lincomb_is_zero(&diff) {
            report.push(
                "chain map",
                src.name(x).to_string(),
                format!("d'f(x) - f(dx) = {}", format_lincomb(tgt, &diff)),
            );
        }
    }

    for (&(x, y), c) in &m.eta {
        if c.is_zero() {
            continue;
        }
        if src.degree(x) + src.degree(y) != 0 {
            report.push(
                "homotopy degree",
                pair_name(x, y),
                format!("degrees {} + {} must sum to 0", src.degree(x), src.degree(y)),
            );
        }
    }
    let mut seen: BTreeSet<(GenId, GenId)> = BTreeSet::new();
    for &(x, y) in m.eta.keys() {
        let key = (x.min(y), x.max(y));
        if !seen.insert(key) {
            continue;
        }
        let (x, y) = key;
        let diff = m.eta_of(y, x) - sign_pow(src.degree(x) * src.degree(y)) * m.eta_of(x, y);
        if !diff.is_zero() {
            report.push(
                "homotopy symmetry",
                pair_name(x, y),
                format!("eta(y,x) - (-1)^(|x||y|) eta(x,y) = {}", diff),
            );
        }
    }

    for &x in &ids {
        for &y in &ids {
            let dx = m.source.complex.differential.image_of(x);
            let dy = m.source.complex.differential.image_of(y);
            let mut lhs = m.eta_lin(&dx, &singleton(y));
            lhs += sign_pow(src.degree(x)) * m.eta_lin(&singleton(x), &dy);
            let rhs = m.source.pairing_of(x, y)
                - m.target.pair_lin(&m.f.image_of(x), &m.f.image_of(y));
            let diff = lhs - rhs;
            if !diff.is_zero() {
                report.push(
                    "homotopy identity",
                    pair_name(x, y),
                    format!(
                        "eta(dx,y) + (-1)^|x| eta(x,dy) - w(x,y) + w'(fx,fy) = {}",
                        diff
                    ),
                );
            }
        }
    }
    report
}

/// Diagrammatic composite: `first` from Q to Q', then `second` from Q' to
/// Q''.  The composite homotopy is `eta + f^* gamma`.
pub fn compose_morphisms(
    first: &QuadraticMorphism,
    second: &QuadraticMorphism,
) -> Result<QuadraticMorphism> {
    let mid_ok = first.target.space() == second.source.space()
        && first.target.complex.differential.equal(&second.source.complex.differential)
        && first.target.pairing == second.source.pairing;
    if !mid_ok {
        return Err(Error::ValidationError {
            context: "composition interface mismatch: target of the first map must be the source of the second".into(),
        });
    }
    let mut eta = BTreeMap::new();
    let src = first.source.space();
    let ids: Vec<GenId> = src.ids().collect();
    for &x in &ids {
        for &y in &ids {
            let pulled = second.eta_lin(&first.f.image_of(x), &first.f.image_of(y));
            let total = first.eta_of(x, y) + pulled;
            if !total.is_zero() {
                eta.insert((x, y), total);
            }
        }
    }
    Ok(QuadraticMorphism {
        source: first.source.clone(),
        target: second.target.clone(),
        f: first.f.then(&second.f),
        eta,
    })
}

/// A weight-truncated free shifted Lie algebra: the underlying algebra plus
/// the total letter-weight of each basis word.
#[derive(Clone, Debug)]
pub struct FreeLieTruncation {
    pub algebra: ShiftedLieAlgebra,
    /// Indexed by generator id.
    pub weights: Vec<u32>,
    /// How each basis word arose: `None` for a letter, or the pair of
    /// earlier basis ids it brackets.
    pub built_from: Vec<Option<(GenId, GenId)>>,
    pub cutoff: u32,
}

/// Free shifted Lie algebra on the given space, each generator counting as
/// one letter, truncated at bracket words of weight `cutoff`.
pub fn free_lie1(letters: &GradedSpace, cutoff: u32) -> Result<FreeLieTruncation> {
    let entries: Vec<(String, i64, u32)> = letters
        .generators()
        .iter()
        .map(|g| (g.name.clone(), g.degree, 1))
        .collect();
    free_lie1_weighted(&entries, cutoff)
}

fn rat_sign(n: i64) -> Rational {
    if n.rem_euclid(2) == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// Free shifted Lie algebra on weighted letters `(name, degree, weight)`,
/// truncated at total letter-weight `cutoff`.
///
/// Built one weight at a time: candidate words `[b_i, b_j]` over the basis
/// found so far are cut down by the span of the bilinearized antisymmetry
/// and Jacobi relators, which is the whole relation ideal because relator
/// consequences of lower weight are already zero in the table.
pub fn free_lie1_weighted(
    letters: &[(String, i64, u32)],
    cutoff: u32,
) -> Result<FreeLieTruncation> {
    for (name, _, w) in letters {
        if *w == 0 {
            return Err(Error::ValidationError {
                context: format!("letter {} must have weight at least 1", name),
            });
        }
    }
    let mut names: Vec<String> = Vec::new();
    let mut degrees: Vec<i64> = Vec::new();
    let mut weights: Vec<u32> = Vec::new();
    let mut built_from: Vec<Option<(GenId, GenId)>> = Vec::new();
    let mut by_weight: Vec<Vec<usize>> = vec![Vec::new(); cutoff as usize + 1];
    // reduction of [b_i, b_j] to the chosen basis; empty combinations are
    // not stored
    let mut table: BTreeMap<(usize, usize), BTreeMap<usize, Rational>> = BTreeMap::new();

    for w in 1..=cutoff {
        for (name, deg, lw) in letters.iter().filter(|l| l.2 == w) {
            let idx = names.len();
            names.push(name.clone());
            degrees.push(*deg);
            weights.push(*lw);
            built_from.push(None);
            by_weight[w as usize].push(idx);
        }

        // candidate bracket words grouped by degree; relators are
        // degree-homogeneous so each block reduces independently
        let mut blocks: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
        for wa in 1..w {
            let wb = w - wa;
            for &i in &by_weight[wa as usize] {
                for &j in &by_weight[wb as usize] {
                    blocks
                        .entry(degrees[i] + degrees[j] + 1)
                        .or_default()
                        .push((i, j));
                }
            }
        }
        for cands in blocks.values_mut() {
            cands.sort_unstable();
        }
        let mut col_of: HashMap<(usize, usize), usize> = HashMap::new();
        for cands in blocks.values() {
            for (k, &c) in cands.iter().enumerate() {
                col_of.insert(c, k);
            }
        }
        let mut rrefs: BTreeMap<i64, Rref> = blocks.keys().map(|&d| (d, Rref::new())).collect();

        for (deg, cands) in &blocks {
            let rref = rrefs.get_mut(deg).unwrap();
            for &(i, j) in cands.iter().filter(|&&(i, j)| i <= j) {
                let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                if i == j {
                    // [x,x] = (-1)^{|x|} [x,x]
                    if degrees[i].rem_euclid(2) == 1 {
                        row.insert(col_of[&(i, i)], Rational::from_integer(2.into()));
                    }
                } else {
                    row.insert(col_of[&(i, j)], Rational::one());
                    *row.entry(col_of[&(j, i)]).or_insert_with(Rational::zero) -=
                        rat_sign(degrees[i] * degrees[j]);
                }
                let r: Vec<(usize, Rational)> =
                    row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
                if !r.is_empty() {
                    rref.absorb(r);
                }
            }
        }

        for wa in 1..=w.saturating_sub(2) {
            for wb in 1..=(w - wa - 1) {
                let wc = w - wa - wb;
                for &i in &by_weight[wa as usize] {
                    for &j in &by_weight[wb as usize] {
                        for &k in &by_weight[wc as usize] {
                            let deg = degrees[i] + degrees[j] + degrees[k] + 2;
                            let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
                            if let Some(inner) = table.get(&(j, k)) {
                                for (b, c) in inner {
                                    *row.entry(col_of[&(i, *b)]).or_insert_with(Rational::zero) +=
                                        c;
                                }
                            }
                            let s1 = rat_sign(degrees[i] + 1);
                            if let Some(inner) = table.get(&(i, j)) {
                                for (b, c) in inner {
                                    *row.entry(col_of[&(*b, k)]).or_insert_with(Rational::zero) -=
                                        &s1 * c;
                                }
                            }
                            let s2 = rat_sign((degrees[i] + 1) * (degrees[j] + 1));
                            if let Some(inner) = table.get(&(i, k)) {
                                for (b, c) in inner {
                                    *row.entry(col_of[&(j, *b)]).or_insert_with(Rational::zero) -=
                                        &s2 * c;
                                }
                            }
                            let r: Vec<(usize, Rational)> =
                                row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
                            if !r.is_empty() {
                                rrefs.get_mut(&deg).unwrap().absorb(r);
                            }
                        }
                    }
                }
            }
        }

        // free columns become new basis words, in block then candidate order
        let mut basis_of: HashMap<(i64, usize), usize> = HashMap::new();
        for (deg, cands) in &blocks {
            let rref = &rrefs[deg];
            for (kcol, &(i, j)) in cands.iter().enumerate() {
                if !rref.is_pivot(kcol) {
                    let name = format!("[{},{}]", names[i], names[j]);
                    let idx = names.len();
                    names.push(name);
                    degrees.push(*deg);
                    weights.push(w);
                    built_from.push(Some((i, j)));
                    by_weight[w as usize].push(idx);
                    basis_of.insert((*deg, kcol), idx);
                }
            }
        }
        for (deg, cands) in &blocks {
            let rref = &rrefs[deg];
            for (kcol, &(i, j)) in cands.iter().enumerate() {
                let mut rep: BTreeMap<usize, Rational> = BTreeMap::new();
                if let Some(&b) = basis_of.get(&(*deg, kcol)) {
                    rep.insert(b, Rational::one());
                } else {
                    let row = rref.row_for_pivot(kcol).expect("dependent candidate has a pivot row");
                    for (c, v) in row {
                        if *c != kcol {
                            rep.insert(basis_of[&(*deg, *c)], -v.clone());
                        }
                    }
                }
                if !rep.is_empty() {
                    table.insert((i, j), rep);
                }
            }
        }
    }

    let space = GradedSpace::new(names.into_iter().zip(degrees))?;
    let complex = GradedComplex::zero_differential(space);
    let mut bracket: BTreeMap<(GenId, GenId), LieElement> = BTreeMap::new();
    for ((i, j), rep) in &table {
        let mut v = LinComb::new();
        for (b, c) in rep {
            v.insert(*b, Scalar::from_rational(c.clone()));
        }
        bracket.insert((*i, *j), v);
    }
    Ok(FreeLieTruncation {
        algebra: ShiftedLieAlgebra { complex, table: bracket, central: None },
        weights,
        built_from,
        cutoff,
    })
}

fn big_binomial(n: &BigInt, k: usize) -> BigInt {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= n - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Independent dimension count for `free_lie1_weighted`, by (weight, degree).
///
/// Works on the desuspension, where a letter of degree `d` is an ordinary
/// super Lie generator of degree `d+1`: the tensor algebra dimensions are
/// compositions of letters, and the Poincare-Birkhoff-Witt factorization
/// `Sym(L) = T(letters)` is peeled one weight at a time, each new factor
/// contributing linearly at its own weight.
pub fn free_lie1_dimensions(
    letters: &[(i64, u32)],
    cutoff: u32,
) -> BTreeMap<(u32, i64), usize> {
    let n = cutoff as usize;
    let mut tensor: Vec<BTreeMap<i64, BigInt>> = vec![BTreeMap::new(); n + 1];
    tensor[0].insert(0, BigInt::one());
    for w in 1..=n {
        for (d, lw) in letters {
            assert!(*lw >= 1, "letter weights must be at least 1");
            let lw = *lw as usize;
            if lw > w {
                continue;
            }
            let prev: Vec<(i64, BigInt)> =
                tensor[w - lw].iter().map(|(k, v)| (*k, v.clone())).collect();
            for (dd, c) in prev {
                *tensor[w].entry(dd + d + 1).or_insert_with(BigInt::zero) += c;
            }
        }
    }

    let mut product: Vec<BTreeMap<i64, BigInt>> = vec![BTreeMap::new(); n + 1];
    product[0].insert(0, BigInt::one());
    let mut dims = BTreeMap::new();
    for w in 1..=n {
        let keys: BTreeSet<i64> = tensor[w]
            .keys()
            .chain(product[w].keys())
            .copied()
            .collect();
        let mut found: Vec<(i64, BigInt)> = Vec::new();
        for dh in keys {
            let t = tensor[w].get(&dh).cloned().unwrap_or_default();
            let p = product[w].get(&dh).cloned().unwrap_or_default();
            let diff = t - p;
            assert!(!diff.is_negative(), "free Lie dimension bookkeeping went negative");
            if !diff.is_zero() {
                found.push((dh, diff));
            }
        }
        for (dh, dim) in found {
            dims.insert((w as u32, dh - 1), dim.to_usize().expect("dimension fits usize"));
            let exterior = dh.rem_euclid(2) == 1;
            let kmax = n / w;
            let mut coeffs: Vec<BigInt> = Vec::with_capacity(kmax + 1);
            for k in 0..=kmax {
                let c = if exterior {
                    big_binomial(&dim, k)
                } else {
                    big_binomial(&(&dim + BigInt::from(k) - BigInt::one()), k)
                };
                coeffs.push(c);
            }
            let mut next: Vec<BTreeMap<i64, BigInt>> = vec![BTreeMap::new(); n + 1];
            for (k, ck) in coeffs.iter().enumerate() {
                if ck.is_zero() {
                    continue;
                }
                for wq in 0..=(n - k * w) {
                    for (dq, c) in &product[wq] {
                        *next[wq + k * w]
                            .entry(dq + (k as i64) * dh)
                            .or_insert_with(BigInt::zero) += c * ck;
                    }
                }
            }
            product = next;
        }
    }
    dims
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RowMatrix;
    use proptest::prelude::*;

    fn hyperbolic(xdeg: i64) -> QuadraticModule {
        let space = GradedSpace::new([("x", xdeg), ("xi", -1 - xdeg)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        QuadraticModule::from_entries(complex, [("x", "xi", Scalar::one())]).unwrap()
    }

    #[test]
    fn heisenberg_of_a_hyperbolic_pair() {
        let q = hyperbolic(0);
        let l = heisenberg(&q).unwrap();
        let space = l.space();
        assert_eq!(space.len(), 3);
        let c = l.central.unwrap();
        assert_eq!(space.name(c), "c");
        assert_eq!(space.degree(c), 0);
        assert!(validate_lie1(&l).is_valid());
        let x = space.id("x").unwrap();
        let xi = space.id("xi").unwrap();
        // symmetric on support: both orientations give +c
        assert_eq!(l.bracket(x, xi), singleton(c));
        assert_eq!(l.bracket(xi, x), singleton(c));
    }

    #[test]
    fn transported_antisymmetry_direction_is_frozen() {
        // the sign-flipped table is the mutant, not the valid one
        let space = GradedSpace::new([("x", 0), ("xi", -1), ("c", 0)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        let l = ShiftedLieAlgebra::from_named_table(
            complex,
            [
                ("x", "xi", vec![("c", Scalar::one())]),
                ("xi", "x", vec![("c", Scalar::from_int(-1))]),
            ],
        )
        .unwrap();
        let report = validate_lie1(&l);
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| v.check == "transported antisymmetry" && v.witness.contains("x")));

        let space = GradedSpace::new([("x", 0), ("xi", -1)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        let q = QuadraticModule::from_raw_entries(
            complex,
            [
                ("x", "xi", Scalar::one()),
                ("xi", "x", Scalar::from_int(-1)),
            ],
        )
        .unwrap();
        let report = validate_quadratic(&q);
        assert!(report.violations.iter().any(|v| v.check == "pairing symmetry"));
        assert!(matches!(heisenberg(&q), Err(Error::InvalidQuadraticModule { .. })));
    }

    #[test]
    fn pairing_degree_support_is_enforced() {
        let space = GradedSpace::new([("x", 0), ("y", 0)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        let q = QuadraticModule::from_entries(complex, [("x", "y", Scalar::one())]).unwrap();
        let report = validate_quadratic(&q);
        assert!(report.violations.iter().any(|v| v.check == "pairing degree"));
    }

    #[test]
    fn one_sided_tables_break_compatibility() {
        let space = GradedSpace::new([("x", 0), ("xi", -1)]).unwrap();
        let complex = GradedComplex::with_differential_entries(space, [("xi", "x", Scalar::one())])
            .unwrap();
        let q = QuadraticModule::from_raw_entries(complex, [("x", "xi", Scalar::one())]).unwrap();
        let report = validate_quadratic(&q);
        assert!(report.violations.iter().any(|v| v.check == "pairing symmetry"));
        assert!(report
            .violations
            .iter()
            .any(|v| v.check == "differential compatibility" && v.witness == "(xi, xi)"));
        // the mirrored table is compatible: w(d xi, xi) - w(xi, d xi) = 0
        let space = GradedSpace::new([("x", 0), ("xi", -1)]).unwrap();
        let complex = GradedComplex::with_differential_entries(space, [("xi", "x", Scalar::one())])
            .unwrap();
        let q = QuadraticModule::from_entries(complex, [("x", "xi", Scalar::one())]).unwrap();
        assert!(validate_quadratic(&q).is_valid());
        assert!(is_nondegenerate(&q).unwrap());
    }

    #[test]
    fn heisenberg_of_a_sum_has_one_center() {
        let q1 = hyperbolic(0);
        let q2 = {
            let space = GradedSpace::new([("y", 1), ("eta", -2)]).unwrap();
            let complex = GradedComplex::zero_differential(space);
            QuadraticModule::from_entries(complex, [("y", "eta", Scalar::from_int(2))]).unwrap()
        };
        let q = oplus(&q1, &q2).unwrap();
        let l = heisenberg(&q).unwrap();
        assert!(validate_lie1(&l).is_valid());
        let s = l.space();
        let c = l.central.unwrap();
        assert_eq!(s.len(), 5);
        let (x, xi) = (s.id("x").unwrap(), s.id("xi").unwrap());
        let (y, eta) = (s.id("y").unwrap(), s.id("eta").unwrap());
        assert_eq!(l.bracket(x, xi), singleton(c));
        let mut two_c = LinComb::new();
        two_c.insert(c, Scalar::from_int(2));
        assert_eq!(l.bracket(y, eta), two_c);
        assert!(l.bracket(x, y).is_empty());
        assert!(l.bracket(x, eta).is_empty());
    }

    #[test]
    fn central_name_stays_fresh() {
        let space = GradedSpace::new([("c", 0), ("c'", -1)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        let q =
            QuadraticModule::from_entries(complex, [("c", "c'", Scalar::one())]).unwrap();
        let l = heisenberg(&q).unwrap();
        assert_eq!(l.space().name(l.central.unwrap()), "c''");
    }

    fn modules_agree_by_name(a: &QuadraticModule, b: &QuadraticModule) -> bool {
        let (sa, sb) = (a.space(), b.space());
        if sa.len() != sb.len() {
            return false;
        }
        for id in sa.ids() {
            let name = sa.name(id);
            let Ok(other) = sb.id(name) else { return false };
            if sa.degree(id) != sb.degree(other) {
                return false;
            }
        }
        for x in sa.ids() {
            let bx = sb.id(sa.name(x)).unwrap();
            for y in sa.ids() {
                let by = sb.id(sa.name(y)).unwrap();
                if a.pairing_of(x, y) != b.pairing_of(bx, by) {
                    return false;
                }
                let da = a.complex.differential.entry(x, y);
                let db = b.complex.differential.entry(bx, by);
                if da != db {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn cotangent_shape_and_signs() {
        let w = GradedComplex::with_differential_entries(
            GradedSpace::new([("w0", 0), ("w1", 1)]).unwrap(),
            [("w0", "w1", Scalar::one())],
        )
        .unwrap();
        let t = cotangent(&w).unwrap();
        let s = t.space();
        assert_eq!(
            s.generators().iter().map(|g| (g.name.as_str(), g.degree)).collect::<Vec<_>>(),
            vec![("w0", 0), ("w1", 1), ("w0*", -1), ("w1*", -2)]
        );
        assert!(validate_quadratic(&t).is_valid());
        assert!(is_nondegenerate(&t).unwrap());
        // dual of d(w0) = w1, shifted: d(w1*) = -w0*
        let (s1, s0) = (s.id("w1*").unwrap(), s.id("w0*").unwrap());
        assert_eq!(t.complex.differential.entry(s1, s0), Scalar::from_int(-1));
        assert_eq!(t.pairing_of(s.id("w0").unwrap(), s0), Scalar::one());
        assert_eq!(t.pairing_of(s0, s.id("w0").unwrap()), Scalar::one());
    }

    #[test]
    fn cotangent_is_additive_up_to_relabeling() {
        let w1 = GradedComplex::with_differential_entries(
            GradedSpace::new([("a", 0), ("b", 1)]).unwrap(),
            [("a", "b", Scalar::from_int(3))],
        )
        .unwrap();
        let w2 = GradedComplex::zero_differential(GradedSpace::new([("u", -2)]).unwrap());
        let lhs = cotangent(&oplus_complex(&w1, &w2).unwrap()).unwrap();
        let rhs = oplus(&cotangent(&w1).unwrap(), &cotangent(&w2).unwrap()).unwrap();
        assert!(modules_agree_by_name(&lhs, &rhs));
    }

    #[test]
    fn degenerate_and_parametric_modules_are_rejected() {
        let space = GradedSpace::new([("x", 0), ("xi", -1), ("y", 0)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        let q = QuadraticModule::from_entries(complex, [("x", "xi", Scalar::one())]).unwrap();
        assert!(!is_nondegenerate(&q).unwrap());
        assert!(matches!(
            symplectic_normal_form(&q),
            Err(Error::DegeneratePairing { .. })
        ));

        let space = GradedSpace::new([("x", 0), ("xi", -1)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        let q = QuadraticModule::from_entries(complex, [("x", "xi", Scalar::param("t"))])
            .unwrap();
        assert!(matches!(
            is_nondegenerate(&q),
            Err(Error::UnspecializedParameter { .. })
        ));

        let nonzero_d = QuadraticModule::from_entries(
            GradedComplex::with_differential_entries(
                GradedSpace::new([("x", 0), ("xi", -1)]).unwrap(),
                [("xi", "x", Scalar::one())],
            )
            .unwrap(),
            [("x", "xi", Scalar::one())],
        )
        .unwrap();
        assert!(matches!(
            symplectic_normal_form(&nonzero_d),
            Err(Error::NonzeroDifferential { .. })
        ));
    }

    #[test]
    fn normal_form_splits_a_mixed_pairing() {
        let space =
            GradedSpace::new([("a", 0), ("b", 0), ("al", -1), ("be", -1)]).unwrap();
        let complex = GradedComplex::zero_differential(space);
        let q = QuadraticModule::from_entries(
            complex,
            [
                ("a", "al", Scalar::one()),
                ("a", "be", Scalar::from_int(2)),
                ("b", "be", Scalar::one()),
            ],
        )
        .unwrap();
        assert!(is_nondegenerate(&q).unwrap());
        let nf = symplectic_normal_form(&q).unwrap();
        assert_eq!(nf.atoms.len(), 2);
        assert!(nf.atoms.iter().all(|a| a.degree == 0));

        // the change of basis is invertible and transports the model pairing
        let model = &nf.model;
        let mspace = model.space();
        let mut m = RowMatrix::new(q.space().len());
        for id in mspace.ids() {
            m.push_row(
                nf.change_of_basis
                    .image_of(id)
                    .iter()
                    .map(|(g, c)| (*g, c.as_rational().unwrap().clone())),
            );
        }
        assert_eq!(m.rank(), q.space().len());
        for u in mspace.ids() {
            for v in mspace.ids() {
                let transported = q.pair_lin(
                    &nf.change_of_basis.image_of(u),
                    &nf.change_of_basis.image_of(v),
                );
                assert_eq!(transported, model.pairing_of(u, v));
            }
        }
    }

    #[test]
    fn free_lie_on_one_even_letter_stops_at_weight_two() {
        let letters = GradedSpace::new([("x", 0)]).unwrap();
        let free = free_lie1(&letters, 5).unwrap();
        let space = free.algebra.space();
        assert_eq!(
            space.generators().iter().map(|g| (g.name.as_str(), g.degree)).collect::<Vec<_>>(),
            vec![("x", 0), ("[x,x]", 1)]
        );
        assert_eq!(free.weights, vec![1, 2]);
        assert!(validate_lie1(&free.algebra).is_valid());
        let x = space.id("x").unwrap();
        let xx = space.id("[x,x]").unwrap();
        assert_eq!(free.algebra.bracket(x, x), singleton(xx));
        // weight 3 dies rationally: 3[x,[x,x]] = 0
        assert!(free.algebra.bracket(x, xx).is_empty());
        let dims = free_lie1_dimensions(&[(0, 1)], 5);
        assert_eq!(dims, BTreeMap::from([((1, 0), 1), ((2, 1), 1)]));
    }

    #[test]
    fn odd_letter_brackets_to_zero() {
        let letters = GradedSpace::new([("xi", -1)]).unwrap();
        let free = free_lie1(&letters, 4).unwrap();
        assert_eq!(free.algebra.space().len(), 1);
        assert!(free.algebra.table.is_empty());
    }

    fn dims_of(free: &FreeLieTruncation) -> BTreeMap<(u32, i64), usize> {
        let mut out: BTreeMap<(u32, i64), usize> = BTreeMap::new();
        let space = free.algebra.space();
        for id in space.ids() {
            *out.entry((free.weights[id], space.degree(id))).or_default() += 1;
        }
        out
    }

    #[test]
    fn free_lie_matches_the_independent_dimension_count() {
        let cases: Vec<(Vec<(String, i64, u32)>, u32)> = vec![
            (vec![("x".into(), 0, 1), ("y".into(), 0, 1)], 5),
            (vec![("x".into(), 0, 1), ("xi".into(), -1, 1)], 5),
            (vec![("u".into(), 1, 1)], 4),
            (vec![("x".into(), 0, 1), ("v".into(), 1, 2)], 6),
            (vec![("a".into(), 0, 1), ("b".into(), -1, 2), ("c".into(), 2, 3)], 6),
        ];
        for (letters, cutoff) in cases {
            let free = free_lie1_weighted(&letters, cutoff).unwrap();
            let plain: Vec<(i64, u32)> = letters.iter().map(|l| (l.1, l.2)).collect();
            let expected = free_lie1_dimensions(&plain, cutoff);
            assert_eq!(dims_of(&free), expected, "letters {:?}", letters);
            assert!(validate_lie1(&free.algebra).is_valid(), "letters {:?}", letters);
        }
    }

    #[test]
    fn corrupted_free_table_fails_validation() {
        let letters = GradedSpace::new([("x", 0), ("y", 0)]).unwrap();
        let mut free = free_lie1(&letters, 3).unwrap();
        let key = *free
            .algebra
            .table
            .keys()
            .find(|(i, j)| free.weights[*i] + free.weights[*j] == 3)
            .unwrap();
        let v = free.algebra.table.get_mut(&key).unwrap();
        for c in v.values_mut() {
            *c = c.clone() * Scalar::from_int(-1);
        }
        assert!(!validate_lie1(&free.algebra).is_valid());
    }

    fn morphism_fixture() -> (QuadraticModule, QuadraticModule, GradedMap) {
        let target = QuadraticModule::from_entries(
            GradedComplex::with_differential_entries(
                GradedSpace::new([("x", 0), ("xi", -1)]).unwrap(),
                [("xi", "x", Scalar::one())],
            )
            .unwrap(),
            [("x", "xi", Scalar::one())],
        )
        .unwrap();
        let source = QuadraticModule::from_entries(
            GradedComplex::with_differential_entries(
                GradedSpace::new([("a", 0), ("b", -1)]).unwrap(),
                [("b", "a", Scalar::one())],
            )
            .unwrap(),
            [("a", "b", Scalar::from_int(3))],
        )
        .unwrap();
        let f = GradedMap::from_named_entries(
            source.space().clone(),
            target.space().clone(),
            0,
            [("a", "x", Scalar::one()), ("b", "xi", Scalar::one())],
        )
        .unwrap();
        (source, target, f)
    }

    #[test]
    fn morphism_homotopy_identity_is_checked() {
        let (source, target, f) = morphism_fixture();
        // eta(da, b)... the only constraint: eta(a,a) = w(a,b) - w'(x,xi) = 2
        let good = QuadraticMorphism::new(
            source.clone(),
            target.clone(),
            f.clone(),
            [("a", "a", Scalar::from_int(2))],
        )
        .unwrap();
        assert!(validate_morphism(&good).is_valid());

        let bad = QuadraticMorphism::new(source, target, f, [("a", "a", Scalar::from_int(3))])
            .unwrap();
        let report = validate_morphism(&bad);
        assert!(report.violations.iter().any(|v| v.check == "homotopy identity"));
    }

    #[test]
    fn composition_with_identities_is_neutral() {
        let (source, target, f) = morphism_fixture();
        let m = QuadraticMorphism::new(
            source.clone(),
            target.clone(),
            f,
            [("a", "a", Scalar::from_int(2))],
        )
        .unwrap();
        let left = compose_morphisms(&QuadraticMorphism::identity(&source), &m).unwrap();
        let right = compose_morphisms(&m, &QuadraticMorphism::identity(&target)).unwrap();
        for c in [&left, &right] {
            assert!(c.f.equal(&m.f));
            assert_eq!(c.eta, m.eta);
            assert!(validate_morphism(c).is_valid());
        }
        let mismatch = compose_morphisms(&m, &m);
        assert!(matches!(mismatch, Err(Error::ValidationError { .. })));
    }

    #[test]
    fn composite_homotopy_pulls_back() {
        // two maps with nonzero homotopies compose to a valid morphism
        let (source, target, f) = morphism_fixture();
        let first = QuadraticMorphism::new(
            source.clone(),
            target.clone(),
            f,
            [("a", "a", Scalar::from_int(2))],
        )
        .unwrap();
        // second: target -> target2 scales the pairing by 4 via f(x) = 2x
        let target2 = QuadraticModule::from_entries(
            GradedComplex::with_differential_entries(
                GradedSpace::new([("u", 0), ("v", -1)]).unwrap(),
                [("v", "u", Scalar::one())],
            )
            .unwrap(),
            [("u", "v", Scalar::from_ratio(1, 4))],
        )
        .unwrap();
        let g = GradedMap::from_named_entries(
            target.space().clone(),
            target2.space().clone(),
            0,
            [("x", "u", Scalar::from_int(2)), ("xi", "v", Scalar::from_int(2))],
        )
        .unwrap();
        let second = QuadraticMorphism::new(target, target2, g, []).unwrap();
        assert!(validate_morphism(&second).is_valid());
        let comp = compose_morphisms(&first, &second).unwrap();
        assert!(validate_morphism(&comp).is_valid());
        let a = comp.source.space().id("a").unwrap();
        assert_eq!(comp.eta_of(a, a), Scalar::from_int(2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn heisenberg_of_random_symmetric_pairings_is_a_lie_algebra(
            degrees in proptest::collection::vec(prop_oneof![Just(0i64), Just(-1), Just(1), Just(-2)], 2..5),
            coeffs in proptest::collection::vec(-3i64..=3, 16),
        ) {
            let gens: Vec<(String, i64)> = degrees
                .iter()
                .enumerate()
                .map(|(i, d)| (format!("g{}", i), *d))
                .collect();
            let space = GradedSpace::new(gens).unwrap();
            let complex = GradedComplex::zero_differential(space.clone());
            let mut pairing = BTreeMap::new();
            let mut k = 0;
            for x in space.ids() {
                for y in space.ids() {
                    if x <= y && space.degree(x) + space.degree(y) == -1 {
                        let c = Scalar::from_int(coeffs[k % coeffs.len()]);
                        k += 1;
                        if !c.is_zero() {
                            pairing.insert((x, y), c.clone());
                            pairing.insert((y, x), c);
                        }
                    }
                }
            }
            let q = QuadraticModule { complex, pairing };
            prop_assert!(validate_quadratic(&q).is_valid());
            let l = heisenberg(&q).unwrap();
            prop_assert!(validate_lie1(&l).is_valid());
        }

        #[test]
        fn free_lie_brackets_satisfy_the_axioms(
            degs in proptest::collection::vec(-2i64..=2, 1..3),
            cutoff in 2u32..=4,
        ) {
            let letters: Vec<(String, i64, u32)> = degs
                .iter()
                .enumerate()
                .map(|(i, d)| (format!("l{}", i), *d, 1))
                .collect();
            let free = free_lie1_weighted(&letters, cutoff).unwrap();
            prop_assert!(validate_lie1(&free.algebra).is_valid());
            let plain: Vec<(i64, u32)> = letters.iter().map(|l| (l.1, l.2)).collect();
            prop_assert_eq!(dims_of(&free), free_lie1_dimensions(&plain, cutoff));
        }
    }
}
