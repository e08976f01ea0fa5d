//! Enveloping algebras of a shifted Lie algebra on the weight-truncated
//! symmetric algebra.
//!
//! All four structures live on the same underlying truncation `Sym(g)` and
//! differ in how the degree `+1` bracket enters:
//!
//!   P0   differential = derivation extending d_g; bracket carried
//!        separately as a second order operator
//!   BD   differential = derivation + h * bracket, over Q[h]
//!   E0t  differential = derivation + bracket
//!   CE   the E0t differential read as a coderivation on the symmetric
//!        coalgebra (Chevalley-Eilenberg chains)
//!
//! `bind_central` specializes formal parameters and collapses central
//! degree zero generators (`c^k m -> v^k m`), which turns the bracket
//! corestrictions of a Heisenberg algebra into constant ones and produces
//! the BV-style complexes the quantization pipeline consumes.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, ValidationReport};
use crate::graded::{sign_pow, GenId, GradedComplex, GradedMap, GradedSpace, LinComb};
use crate::lie1::{validate_lie1, ShiftedLieAlgebra};
use crate::scalar::{Rational, Scalar};
use crate::symalg::{
    complex_of_operator, extend_operator, is_coderivation, is_comodule_map, leibniz_failure,
    sym_truncation, Element, Monomial, Operator, TruncatedSymAlgebra,
};

/// Reserved name of the interpolation parameter introduced by `u_bd`.
pub const HBAR: &str = "h";

/// Which structure the truncated symmetric algebra carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvKind {
    P0,
    BD,
    E0t,
    CE,
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EnvKind::P0 => "P0",
            EnvKind::BD => "BD",
            EnvKind::E0t => "E0t",
            EnvKind::CE => "CE",
        };
        write!(f, "{s}")
    }
}

/// A truncated symmetric algebra with the differential and bracket package
/// of one enveloping construction.  Fields are public so tests can
/// assemble deliberately broken structures; `check_axioms` is the audit
/// that the honest constructors guarantee to pass.
#[derive(Clone)]
pub struct EnvelopedAlgebra {
    pub kind: EnvKind,
    /// The Lie structure the envelope was built from; dropped once a
    /// central generator is bound away, because the quotient is no longer
    /// a Lie algebra on the surviving generators.
    pub lie: Option<ShiftedLieAlgebra>,
    pub algebra: TruncatedSymAlgebra,
    /// Degree `+1` operator with corestriction keys of weight 1 and 2.
    pub differential: Operator,
    /// Degree `+1` bracket, one corestriction per unordered generator
    /// pair.  Absent on the chain coalgebra.
    pub bracket: Option<Operator>,
    /// Name of the interpolation parameter when the differential is
    /// linear in one.
    pub hbar: Option<String>,
}

impl std::fmt::Debug for EnvelopedAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnvelopedAlgebra")
            .field("kind", &self.kind)
            .field("generators", &self.algebra.space().len())
            .field("cutoff", &self.algebra.cutoff())
            .field("basis", &self.algebra.basis_len())
            .field("hbar", &self.hbar)
            .finish()
    }
}

impl EnvelopedAlgebra {
    pub fn space(&self) -> &GradedSpace {
        self.algebra.space()
    }

    pub fn cutoff(&self) -> u32 {
        self.algebra.cutoff()
    }

    /// The binary bracket of two homogeneous elements, read off the
    /// bracket operator as its failure to be a derivation.
    pub fn binary_bracket(&self, a: &Element, b: &Element) -> Result<Element> {
        let Some(br) = &self.bracket else {
            return Err(Error::ValidationError {
                context: "this envelope carries no bracket operator".into(),
            });
        };
        op_bracket(&self.algebra, br, a, b)
    }

    /// The underlying cochain complex, one generator per basis monomial.
    pub fn complex(&self) -> Result<GradedComplex> {
        complex_of_operator(&self.algebra, &self.differential)
    }

    fn verify(&self) -> Result<()> {
        verify_filtration(&self.algebra, &self.differential)?;
        if let Some(br) = &self.bracket {
            verify_filtration(&self.algebra, br)?;
        }
        verify_square_zero(&self.algebra, &self.differential)
    }
}

/// `B(ab) - B(a)b - (-1)^{|a|} a B(b)`: the binary bracket encoded by a
/// degree `+1` second order operator.  Zero inputs short-circuit so that
/// nested brackets stay total.
fn op_bracket(
    alg: &TruncatedSymAlgebra,
    br: &Operator,
    a: &Element,
    b: &Element,
) -> Result<Element> {
    if a.is_zero() || b.is_zero() {
        return Ok(Element::zero());
    }
    leibniz_failure(alg, br, a, b)
}

fn element_of(v: &LinComb) -> Element {
    let mut out = Element::zero();
    for (id, c) in v {
        out.add_term(Monomial::generator(*id), c.clone());
    }
    out
}

/// One corestriction per unordered generator pair with nonzero bracket.
/// An odd square cannot index a monomial, and its bracket vanishes in any
/// valid table, so only a corrupt table can reach the error below.
fn bracket_operator(g: &ShiftedLieAlgebra) -> Result<Operator> {
    let space = g.space();
    let mut entries = Vec::new();
    for ((x, y), value) in &g.table {
        if x > y {
            continue;
        }
        let out = element_of(value);
        if out.is_zero() {
            continue;
        }
        let items: Vec<(GenId, u32)> = if x == y {
            vec![(*x, 2)]
        } else {
            vec![(*x, 1), (*y, 1)]
        };
        let Some(key) = Monomial::from_multiset(space, &items) else {
            return Err(Error::ValidationError {
                context: format!(
                    "bracket [{0}, {0}] must vanish for the odd generator {0}",
                    space.name(*x)
                ),
            });
        };
        entries.push((key, out));
    }
    extend_operator(space, 1, entries)
}

fn validated(g: &ShiftedLieAlgebra) -> Result<()> {
    let report = validate_lie1(g);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidLieAlgebra { report })
    }
}

/// Values may not outweigh their key, so operators never escape the
/// truncation and the square-zero shortcut below is sound.
fn verify_filtration(alg: &TruncatedSymAlgebra, op: &Operator) -> Result<()> {
    let space = alg.space();
    for (key, value) in op.corestrictions() {
        if value.max_weight() > key.weight() {
            return Err(Error::ValidationError {
                context: format!("corestriction on {} raises weight", key.name(space)),
            });
        }
    }
    Ok(())
}

/// Keys have weight at most two and values never raise weight, so the
/// corestrictions of d∘d sit on keys of weight at most four and are read
/// off inductively from the values on low weight monomials: vanishing
/// through twice the key weight forces vanishing on the whole truncation.
fn verify_square_zero(alg: &TruncatedSymAlgebra, d: &Operator) -> Result<()> {
    let bound = 2 * d.max_key_weight();
    for m in alg.basis() {
        if m.weight() > bound {
            break;
        }
        let img = d.apply(alg, &d.apply_monomial(alg, m));
        if !img.is_zero() {
            return Err(Error::DSquaredNonzero {
                witness: m.name(alg.space()),
                value: img.format(alg.space()),
            });
        }
    }
    Ok(())
}

/// Poisson envelope: the module differential extends as a derivation and
/// the bracket rides along as a separate operator.
pub fn u_p0(g: &ShiftedLieAlgebra, cutoff: u32) -> Result<EnvelopedAlgebra> {
    validated(g)?;
    let algebra = sym_truncation(&g.complex, cutoff)?;
    let env = EnvelopedAlgebra {
        kind: EnvKind::P0,
        lie: Some(g.clone()),
        differential: Operator::derivation_from(&g.complex),
        bracket: Some(bracket_operator(g)?),
        hbar: None,
        algebra,
    };
    env.verify()?;
    Ok(env)
}

/// Twisted envelope: the bracket is folded into the differential, which
/// is then second order instead of a derivation.
pub fn u_e0t(g: &ShiftedLieAlgebra, cutoff: u32) -> Result<EnvelopedAlgebra> {
    validated(g)?;
    let algebra = sym_truncation(&g.complex, cutoff)?;
    let bracket = bracket_operator(g)?;
    let env = EnvelopedAlgebra {
        kind: EnvKind::E0t,
        lie: Some(g.clone()),
        differential: Operator::derivation_from(&g.complex).plus(&bracket),
        bracket: Some(bracket),
        hbar: None,
        algebra,
    };
    env.verify()?;
    Ok(env)
}

/// Interpolating envelope over Q[h]: differential = derivation + h times
/// the bracket.  The parameter name is reserved, so modules that already
/// depend on it are rejected rather than silently collapsed.
pub fn u_bd(g: &ShiftedLieAlgebra, cutoff: u32) -> Result<EnvelopedAlgebra> {
    validated(g)?;
    if g.parameters().contains(HBAR) {
        return Err(Error::ValidationError {
            context: format!("parameter name {HBAR:?} is reserved for the interpolation scale"),
        });
    }
    let algebra = sym_truncation(&g.complex, cutoff)?;
    let bracket = bracket_operator(g)?;
    let env = EnvelopedAlgebra {
        kind: EnvKind::BD,
        lie: Some(g.clone()),
        differential: Operator::derivation_from(&g.complex)
            .plus(&bracket.scale(&Scalar::param(HBAR))),
        bracket: Some(bracket),
        hbar: Some(HBAR.to_string()),
        algebra,
    };
    env.verify()?;
    Ok(env)
}

/// Chevalley-Eilenberg chains: the twisted differential read as a
/// coderivation on the symmetric coalgebra.  Construction verifies the
/// weight filtration and square-zero; the coalgebra laws are audited by
/// `check_axioms` and `compare_env_ce`, which are quadratic in the basis
/// and too heavy to rerun on the large truncations the quantization
/// pipeline builds.
pub fn ce_chains(g: &ShiftedLieAlgebra, cutoff: u32) -> Result<EnvelopedAlgebra> {
    validated(g)?;
    let algebra = sym_truncation(&g.complex, cutoff)?;
    let bracket = bracket_operator(g)?;
    let env = EnvelopedAlgebra {
        kind: EnvKind::CE,
        lie: Some(g.clone()),
        differential: Operator::derivation_from(&g.complex).plus(&bracket),
        bracket: None,
        hbar: None,
        algebra,
    };
    env.verify()?;
    Ok(env)
}

/// Assignments applied by `bind_central`: parameters are substituted
/// first, then central degree zero generators are collapsed onto rational
/// values, each list in the order given.
#[derive(Clone, Debug, Default)]
pub struct CentralBinding {
    pub parameters: Vec<(String, Rational)>,
    pub generators: Vec<(String, Rational)>,
}

impl CentralBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parameter(name: &str, value: Rational) -> Self {
        Self::new().and_parameter(name, value)
    }

    pub fn generator(name: &str, value: Rational) -> Self {
        Self::new().and_generator(name, value)
    }

    pub fn and_parameter(mut self, name: &str, value: Rational) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub fn and_generator(mut self, name: &str, value: Rational) -> Self {
        self.generators.push((name.to_string(), value));
        self
    }
}

/// Specializes parameters and collapses central generators.  Binding the
/// interpolation parameter of a BD envelope renames the kind to the end
/// it lands on: P0 at zero, E0t elsewhere.  Binding a generator `c` to
/// the value `v` sends `c^k m` to `v^k m`, which requires `c` closed,
/// central and of degree zero.
pub fn bind_central(env: &EnvelopedAlgebra, binding: &CentralBinding) -> Result<EnvelopedAlgebra> {
    let mut out = env.clone();
    for (name, value) in &binding.parameters {
        out.differential = out.differential.substitute(name, value);
        out.bracket = out.bracket.as_ref().map(|b| b.substitute(name, value));
        if out.hbar.as_deref() == Some(name.as_str()) {
            out.hbar = None;
            if out.kind == EnvKind::BD {
                out.kind = if value.is_zero() { EnvKind::P0 } else { EnvKind::E0t };
            }
        }
        // keep the algebra's reference module in step with the operators
        let module = out.algebra.module().substitute(name, value)?;
        out.algebra = sym_truncation(&module, out.algebra.cutoff())?;
        if let Some(lie) = &out.lie {
            if lie.parameters().contains(name) {
                out.lie = None;
            }
        }
    }
    for (name, value) in &binding.generators {
        collapse_generator(&mut out, name, value)?;
    }
    out.verify()?;
    Ok(out)
}

fn collapse_generator(env: &mut EnvelopedAlgebra, name: &str, value: &Rational) -> Result<()> {
    let space = env.algebra.space().clone();
    let id = space.id(name)?;
    if space.degree(id) != 0 {
        return Err(Error::DegreeMismatch {
            context: format!(
                "cannot bind {name:?} of degree {}, only degree zero generators collapse",
                space.degree(id)
            ),
        });
    }
    let single = Monomial::generator(id);
    if env.differential.corestriction(&single).is_some() {
        return Err(Error::NotClosed { name: name.to_string() });
    }
    let check_central = |op: &Operator| -> Result<()> {
        for (key, _) in op.corestrictions() {
            if key.weight() >= 2 && key.multiplicity(id) > 0 {
                return Err(Error::NotCentral {
                    name: name.to_string(),
                    witness: key.remove(&single).name(&space),
                });
            }
        }
        Ok(())
    };
    check_central(&env.differential)?;
    if let Some(br) = &env.bracket {
        check_central(br)?;
    }

    // surviving module: drop the generator and any differential flow into
    // it; nothing flows out of a closed generator, so the restriction
    // still squares to zero
    let survivors: Vec<GenId> = space.ids().filter(|i| *i != id).collect();
    let new_space = GradedSpace::new(
        survivors
            .iter()
            .map(|i| (space.name(*i).to_string(), space.degree(*i))),
    )?;
    let remap: BTreeMap<GenId, GenId> =
        survivors.iter().enumerate().map(|(n, i)| (*i, n)).collect();
    let old_module = env.algebra.module().clone();
    let mut diff = GradedMap::zero(new_space.clone(), new_space.clone(), 1);
    for (s, t, c) in old_module.differential.entries() {
        if s == id || t == id {
            continue;
        }
        diff.add_to(remap[&s], remap[&t], c.clone())?;
    }
    let module = GradedComplex::new(new_space.clone(), diff)?;
    module.verify_d_squared()?;
    let algebra = sym_truncation(&module, env.algebra.cutoff())?;

    let collapse_monomial = |m: &Monomial| -> (Monomial, Rational) {
        let mut pow = Rational::one();
        let mut items: Vec<(GenId, u32)> = Vec::new();
        for &(gid, mult) in m.factors() {
            if gid == id {
                for _ in 0..mult {
                    pow *= value;
                }
            } else {
                items.push((remap[&gid], mult));
            }
        }
        let m2 = Monomial::from_multiset(&new_space, &items)
            .expect("collapse keeps every parity profile");
        (m2, pow)
    };
    let collapse_element = |e: &Element| -> Element {
        let mut out = Element::zero();
        for (m, c) in &e.terms {
            let (m2, pow) = collapse_monomial(m);
            out.add_term(m2, c.scale(&pow));
        }
        out
    };
    let collapse_operator = |op: &Operator| -> Result<Operator> {
        let mut entries = Vec::new();
        for (key, val) in op.corestrictions() {
            let (key2, pow) = collapse_monomial(key);
            debug_assert!(pow.is_one(), "keys were checked free of the bound generator");
            let out = collapse_element(val);
            if !out.is_zero() {
                entries.push((key2, out));
            }
        }
        extend_operator(&new_space, op.degree(), entries)
    };

    env.differential = collapse_operator(&env.differential)?;
    env.bracket = match &env.bracket {
        Some(br) => Some(collapse_operator(br)?),
        None => None,
    };
    env.algebra = algebra;
    env.lie = None;
    Ok(())
}

/// Audits every structural identity the kind promises, on all generator
/// pairs and triples plus seeded random basis monomials.  An empty report
/// means every checked identity held exactly.
pub fn check_axioms(env: &EnvelopedAlgebra) -> ValidationReport {
    let mut report = ValidationReport::new();
    let alg = &env.algebra;
    let space = alg.space();
    let d = &env.differential;

    if d.degree() != 1 {
        report.push(
            "differential degree",
            format!("{}", d.degree()),
            "expected degree 1",
        );
    }
    for (key, _) in d.corestrictions() {
        let w = key.weight();
        let bad = match env.kind {
            EnvKind::P0 => w != 1,
            _ => w == 0 || w > 2,
        };
        if bad {
            report.push(
                "corestriction arity",
                key.name(space),
                format!("weight {w} key on a {} differential", env.kind),
            );
        }
    }
    for op in [Some(d), env.bracket.as_ref()].into_iter().flatten() {
        for (key, value) in op.corestrictions() {
            if value.max_weight() > key.weight() {
                report.push(
                    "weight filtration",
                    key.name(space),
                    format!("value {} outweighs the key", value.format(space)),
                );
            }
        }
    }

    let bound = (2 * d.max_key_weight()).max(2).min(alg.cutoff());
    for m in alg.basis() {
        if m.weight() > bound {
            break;
        }
        let img = d.apply(alg, &d.apply_monomial(alg, m));
        if !img.is_zero() {
            report.push(
                "square zero",
                m.name(space),
                format!("d^2 = {}", img.format(space)),
            );
            break;
        }
    }

    // exhaustive generator pairs, then seeded random monomial pairs
    let gens: Vec<GenId> = space.ids().collect();
    let gen_elem = |i: GenId| Element::generator(i);
    let mut rng = ChaCha8Rng::seed_from_u64(0xE57);
    let low: Vec<&Monomial> = alg
        .basis()
        .iter()
        .filter(|m| m.weight() >= 1 && m.weight() <= bound)
        .collect();
    let mut pairs: Vec<(Element, Element)> = Vec::new();
    for &x in &gens {
        for &y in &gens {
            pairs.push((gen_elem(x), gen_elem(y)));
        }
    }
    if !low.is_empty() {
        for _ in 0..16 {
            let a = *low.choose(&mut rng).expect("nonempty");
            let b = *low.choose(&mut rng).expect("nonempty");
            if a.weight() + b.weight() <= alg.cutoff() {
                pairs.push((
                    Element::from_monomial(a.clone(), Scalar::one()),
                    Element::from_monomial(b.clone(), Scalar::one()),
                ));
            }
        }
    }
    let mut triples: Vec<(Element, Element, Element)> = Vec::new();
    for &x in &gens {
        for &y in &gens {
            for &z in &gens {
                triples.push((gen_elem(x), gen_elem(y), gen_elem(z)));
            }
        }
    }
    if !low.is_empty() {
        for _ in 0..8 {
            let a = *low.choose(&mut rng).expect("nonempty");
            let b = *low.choose(&mut rng).expect("nonempty");
            let c = *low.choose(&mut rng).expect("nonempty");
            if a.weight() + b.weight() + c.weight() <= alg.cutoff() {
                triples.push((
                    Element::from_monomial(a.clone(), Scalar::one()),
                    Element::from_monomial(b.clone(), Scalar::one()),
                    Element::from_monomial(c.clone(), Scalar::one()),
                ));
            }
        }
    }

    let pair_name = |a: &Element, b: &Element| format!("({}, {})", a.format(space), b.format(space));

    for (a, b) in pairs.iter().take(24) {
        let (Some(da), Some(db)) = (
            a.homogeneous_degree(space),
            b.homogeneous_degree(space),
        ) else {
            continue;
        };
        let gap = alg.mul(a, b).minus(&alg.mul(b, a).scale(&sign_pow(da * db)));
        if !gap.is_zero() {
            report.push(
                "graded commutativity",
                pair_name(a, b),
                format!("ab - (-1)^{{|a||b|}} ba = {}", gap.format(space)),
            );
        }
    }

    if matches!(env.kind, EnvKind::BD) && env.hbar.is_none() {
        report.push(
            "interpolation parameter",
            "-",
            "BD kind without a declared parameter",
        );
    }
    if matches!(env.kind, EnvKind::P0 | EnvKind::BD | EnvKind::E0t) && env.bracket.is_none() {
        report.push(
            "bracket presence",
            "-",
            format!("{} kind without a bracket operator", env.kind),
        );
    }

    match env.kind {
        EnvKind::P0 => {
            for (a, b) in &pairs {
                let Ok(lf) = leibniz_failure(alg, d, a, b) else { continue };
                if !lf.is_zero() {
                    report.push(
                        "differential is a derivation",
                        pair_name(a, b),
                        format!("Leibniz failure {}", lf.format(space)),
                    );
                }
            }
        }
        EnvKind::BD => {
            if let (Some(br), Some(hname)) = (&env.bracket, env.hbar.as_deref()) {
                let h = Scalar::param(hname);
                for (a, b) in &pairs {
                    let (Ok(lf), Ok(bk)) = (
                        leibniz_failure(alg, d, a, b),
                        op_bracket(alg, br, a, b),
                    ) else {
                        continue;
                    };
                    let gap = lf.minus(&bk.scale(&h));
                    if !gap.is_zero() {
                        report.push(
                            "interpolated Leibniz rule",
                            pair_name(a, b),
                            format!("gap {}", gap.format(space)),
                        );
                    }
                }
                // classical and quantum layers square to zero separately
                // and anticommute; over Q[h] this is the coefficient-wise
                // content of d^2 = 0, checked here after specialization
                let d0 = d.substitute(hname, &Rational::zero());
                let d1 = d
                    .plus(&d0.scale(&Scalar::from_int(-1)))
                    .substitute(hname, &Rational::one());
                let layer_checks: [(&'static str, &Operator, &Operator); 3] = [
                    ("classical layer squares", &d0, &d0),
                    ("layers anticommute", &d0, &d1),
                    ("quantum layer squares", &d1, &d1),
                ];
                for (label, op_a, op_b) in layer_checks {
                    for m in alg.basis() {
                        if m.weight() > bound {
                            break;
                        }
                        let img = op_a
                            .apply(alg, &op_b.apply_monomial(alg, m))
                            .plus(&op_b.apply(alg, &op_a.apply_monomial(alg, m)));
                        if !img.is_zero() {
                            report.push(label, m.name(space), img.format(space));
                            break;
                        }
                    }
                }
            }
        }
        EnvKind::E0t => {
            if let Some(br) = &env.bracket {
                for (a, b) in &pairs {
                    let (Ok(lf), Ok(bk)) = (
                        leibniz_failure(alg, d, a, b),
                        op_bracket(alg, br, a, b),
                    ) else {
                        continue;
                    };
                    let gap = lf.minus(&bk);
                    if !gap.is_zero() {
                        report.push(
                            "twisted Leibniz rule",
                            pair_name(a, b),
                            format!("gap {}", gap.format(space)),
                        );
                    }
                }
            }
        }
        EnvKind::CE => {
            // the linear layer must be a coderivation and the constant
            // layer (present after binding a center) a comodule map
            let mut linear: Vec<(Monomial, Element)> = Vec::new();
            let mut constant: Vec<(Monomial, Element)> = Vec::new();
            for (key, value) in d.corestrictions() {
                let mut lin = Element::zero();
                let mut cst = Element::zero();
                for (m, c) in &value.terms {
                    match m.weight() {
                        0 => cst.add_term(m.clone(), c.clone()),
                        1 => lin.add_term(m.clone(), c.clone()),
                        w => report.push(
                            "corestriction shape",
                            key.name(space),
                            format!("value term {} has weight {w}", m.name(space)),
                        ),
                    }
                }
                if !lin.is_zero() {
                    linear.push((key.clone(), lin));
                }
                if !cst.is_zero() {
                    constant.push((key.clone(), cst));
                }
            }
            match extend_operator(space, 1, linear) {
                Ok(op) => {
                    if !is_coderivation(alg, &op.to_algebra_map(alg)) {
                        report.push(
                            "coderivation law",
                            "linear layer",
                            "coproduct does not intertwine",
                        );
                    }
                }
                Err(e) => report.push("coderivation law", "linear layer", e.to_string()),
            }
            if !constant.is_empty() {
                match extend_operator(space, 1, constant) {
                    Ok(op) => {
                        if !is_comodule_map(alg, &op.to_algebra_map(alg)) {
                            report.push(
                                "comodule law",
                                "constant layer",
                                "coproduct does not intertwine",
                            );
                        }
                    }
                    Err(e) => {
                        report.push("comodule law", "constant layer", e.to_string())
                    }
                }
            }
        }
    }

    if let Some(br) = &env.bracket {
        let bk = |p: &Element, q: &Element| op_bracket(alg, br, p, q).unwrap_or_default();
        if br.degree() != 1 {
            report.push(
                "bracket degree",
                format!("{}", br.degree()),
                "expected degree 1",
            );
        }
        for (key, _) in br.corestrictions() {
            if key.weight() != 2 {
                report.push(
                    "bracket arity",
                    key.name(space),
                    "bracket corestrictions sit on weight 2 keys",
                );
            }
        }
        for &x in &gens {
            for &y in &gens {
                let bxy = bk(&gen_elem(x), &gen_elem(y));
                let byx = bk(&gen_elem(y), &gen_elem(x));
                let sign = sign_pow(space.degree(x) * space.degree(y));
                let gap = bxy.minus(&byx.scale(&sign));
                let witness = format!("({}, {})", space.name(x), space.name(y));
                if !gap.is_zero() {
                    report.push(
                        "bracket symmetry",
                        witness.clone(),
                        format!("gap {}", gap.format(space)),
                    );
                }
                if let Some(lie) = &env.lie {
                    let table = element_of(&lie.bracket(x, y));
                    if bxy != table {
                        report.push(
                            "bracket matches the Lie table",
                            witness,
                            format!(
                                "operator gives {}, table gives {}",
                                bxy.format(space),
                                table.format(space)
                            ),
                        );
                    }
                }
            }
        }
        for (a, b, c) in &triples {
            let (Some(da), Some(db)) = (
                a.homogeneous_degree(space),
                b.homogeneous_degree(space),
            ) else {
                continue;
            };
            let name = format!(
                "({}, {}, {})",
                a.format(space),
                b.format(space),
                c.format(space)
            );
            // biderivation in the second slot
            let lhs = bk(a, &alg.mul(b, c));
            let t1 = alg.mul(&bk(a, b), c);
            let t2 = alg.mul(b, &bk(a, c)).scale(&sign_pow(db * (da + 1)));
            let gap = lhs.minus(&t1).minus(&t2);
            if !gap.is_zero() {
                report.push(
                    "bracket biderivation",
                    name.clone(),
                    format!("gap {}", gap.format(space)),
                );
            }
            // transported Jacobi on monomials
            let j0 = bk(a, &bk(b, c));
            let j1 = bk(&bk(a, b), c).scale(&sign_pow(da + 1));
            let j2 = bk(b, &bk(a, c)).scale(&sign_pow((da + 1) * (db + 1)));
            let jgap = j0.minus(&j1).minus(&j2);
            if !jgap.is_zero() {
                report.push(
                    "bracket Jacobi",
                    name,
                    format!("gap {}", jgap.format(space)),
                );
            }
        }
        if env.kind == EnvKind::P0 {
            for (a, b) in &pairs {
                let Some(da) = a.homogeneous_degree(space) else { continue };
                let gap = d
                    .apply(alg, &bk(a, b))
                    .plus(&bk(&d.apply(alg, a), b))
                    .plus(&bk(a, &d.apply(alg, b)).scale(&sign_pow(da)));
                if !gap.is_zero() {
                    report.push(
                        "bracket chain rule",
                        pair_name(a, b),
                        format!("gap {}", gap.format(space)),
                    );
                }
            }
        }
    }

    report
}

/// Outcome of assembling the twisted differential by two routes: the
/// operator extraction formula against filtering the full coproduct
/// through the corestriction keys, plus the coderivation law for the
/// coalgebra reading of the same matrix.
#[derive(Clone, Debug)]
pub struct EnvCeComparison {
    pub basis_len: usize,
    pub matrices_agree: bool,
    pub coderivation_law: bool,
    pub mismatch: Option<String>,
}

impl EnvCeComparison {
    pub fn exact(&self) -> bool {
        self.matrices_agree && self.coderivation_law
    }
}

/// Builds `u_e0t` and `ce_chains` on the same truncation and checks that
/// the extraction route and the coproduct route produce the same matrix
/// entry by entry, and that it obeys the coderivation law.
pub fn compare_env_ce(g: &ShiftedLieAlgebra, cutoff: u32) -> Result<EnvCeComparison> {
    let env = u_e0t(g, cutoff)?;
    let ce = ce_chains(g, cutoff)?;
    let alg = &ce.algebra;
    let space = alg.space();
    let mut matrices_agree = env.differential == ce.differential;
    let mut mismatch = None;
    for m in alg.basis() {
        let direct = env.differential.apply_monomial(alg, m);
        let mut routed = Element::zero();
        for ((s, t), c) in &alg.coproduct_monomial(m).terms {
            if let Some(value) = ce.differential.corestriction(s) {
                let tail = Element::from_monomial(t.clone(), c.clone());
                routed = routed.plus(&alg.mul(value, &tail));
            }
        }
        if direct != routed {
            matrices_agree = false;
            mismatch = Some(format!(
                "{}: extraction {}, coproduct {}",
                m.name(space),
                direct.format(space),
                routed.format(space)
            ));
            break;
        }
    }
    let coderivation_law = is_coderivation(alg, &ce.differential.to_algebra_map(alg));
    Ok(EnvCeComparison {
        basis_len: alg.basis_len(),
        matrices_agree,
        coderivation_law,
        mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::GradedComplex;
    use crate::lie1::{heisenberg, oplus, QuadraticModule};
    use crate::scalar::rational_int;
    use proptest::prelude::*;

    fn v0() -> QuadraticModule {
        let space = GradedSpace::new([("x", 0), ("xi", -1)]).unwrap();
        QuadraticModule::from_entries(
            GradedComplex::zero_differential(space),
            [("x", "xi", Scalar::one())],
        )
        .unwrap()
    }

    fn v1() -> QuadraticModule {
        let space = GradedSpace::new([("y", 1), ("eta", -2)]).unwrap();
        QuadraticModule::from_entries(
            GradedComplex::zero_differential(space),
            [("y", "eta", Scalar::one())],
        )
        .unwrap()
    }

    fn degenerate() -> QuadraticModule {
        let space = GradedSpace::new([("x", 0), ("xi", -1)]).unwrap();
        QuadraticModule::with_zero_pairing(GradedComplex::zero_differential(space))
    }

    fn abelian_with_differential() -> ShiftedLieAlgebra {
        let space = GradedSpace::new([("a", 0), ("b", 1)]).unwrap();
        let complex =
            GradedComplex::with_differential_entries(space, [("a", "b", Scalar::one())]).unwrap();
        ShiftedLieAlgebra::abelian(complex)
    }

    fn monomial(alg: &TruncatedSymAlgebra, items: &[(&str, u32)]) -> Monomial {
        let space = alg.space();
        let ids: Vec<(GenId, u32)> = items
            .iter()
            .map(|(n, k)| (space.id(n).unwrap(), *k))
            .collect();
        Monomial::from_multiset(space, &ids).unwrap()
    }

    fn elem(alg: &TruncatedSymAlgebra, coeff: Scalar, items: &[(&str, u32)]) -> Element {
        Element::from_monomial(monomial(alg, items), coeff)
    }

    fn has(report: &ValidationReport, check: &str) -> bool {
        report.violations.iter().any(|v| v.check == check)
    }

    #[test]
    fn poisson_envelope_matches_hand_computed_brackets() {
        let g = heisenberg(&v0()).unwrap();
        let env = u_p0(&g, 4).unwrap();
        let alg = &env.algebra;
        let x = elem(alg, Scalar::one(), &[("x", 1)]);
        let xi = elem(alg, Scalar::one(), &[("xi", 1)]);
        let xx = elem(alg, Scalar::one(), &[("x", 2)]);
        let c = elem(alg, Scalar::one(), &[("c", 1)]);
        assert_eq!(env.binary_bracket(&x, &xi).unwrap(), c);
        assert_eq!(env.binary_bracket(&xi, &x).unwrap(), c);
        assert_eq!(
            env.binary_bracket(&xx, &xi).unwrap(),
            elem(alg, Scalar::from_int(2), &[("x", 1), ("c", 1)])
        );
        assert!(env.binary_bracket(&x, &x).unwrap().is_zero());
        assert!(env.differential.is_zero());
        assert!(check_axioms(&env).is_valid());
    }

    #[test]
    fn twisted_differential_hand_values() {
        let g = heisenberg(&v0()).unwrap();
        let env = u_e0t(&g, 5).unwrap();
        let alg = &env.algebra;
        let d = &env.differential;
        assert_eq!(
            d.apply_monomial(alg, &monomial(alg, &[("x", 1), ("xi", 1)])),
            elem(alg, Scalar::one(), &[("c", 1)])
        );
        assert_eq!(
            d.apply_monomial(alg, &monomial(alg, &[("x", 2), ("xi", 1)])),
            elem(alg, Scalar::from_int(2), &[("x", 1), ("c", 1)])
        );
        assert!(d.apply_monomial(alg, &monomial(alg, &[("x", 2)])).is_zero());
        assert!(d
            .apply_monomial(alg, &monomial(alg, &[("c", 1), ("xi", 1)]))
            .is_zero());
        assert_eq!(
            d.apply_monomial(alg, &monomial(alg, &[("x", 1), ("xi", 1), ("c", 1)])),
            elem(alg, Scalar::one(), &[("c", 2)])
        );
        assert!(check_axioms(&env).is_valid());
    }

    #[test]
    fn interpolated_differential_is_linear_in_the_parameter() {
        let g = heisenberg(&v0()).unwrap();
        let env = u_bd(&g, 4).unwrap();
        let alg = &env.algebra;
        assert_eq!(
            env.differential
                .apply_monomial(alg, &monomial(alg, &[("x", 1), ("xi", 1)])),
            elem(alg, Scalar::param(HBAR), &[("c", 1)])
        );
        let d0 = env.differential.substitute(HBAR, &Rational::zero());
        assert!(d0.is_zero());
        let d1 = env
            .differential
            .substitute(HBAR, &rational_int(1));
        assert_eq!(Some(d1), env.bracket);
        assert!(check_axioms(&env).is_valid());
    }

    #[test]
    fn binding_the_parameter_recovers_both_ends() {
        let q = oplus(&v0(), &v1()).unwrap();
        let g = heisenberg(&q).unwrap();
        let bd = u_bd(&g, 4).unwrap();

        let at0 = bind_central(&bd, &CentralBinding::parameter(HBAR, Rational::zero())).unwrap();
        let p0 = u_p0(&g, 4).unwrap();
        assert_eq!(at0.kind, EnvKind::P0);
        assert_eq!(at0.hbar, None);
        assert_eq!(at0.differential, p0.differential);
        assert_eq!(at0.bracket, p0.bracket);
        assert!(at0
            .complex()
            .unwrap()
            .differential
            .equal(&p0.complex().unwrap().differential));
        assert!(at0.lie.is_some());

        let at1 = bind_central(&bd, &CentralBinding::parameter(HBAR, rational_int(1))).unwrap();
        let e0t = u_e0t(&g, 4).unwrap();
        assert_eq!(at1.kind, EnvKind::E0t);
        assert_eq!(at1.differential, e0t.differential);
        assert_eq!(at1.bracket, e0t.bracket);
        assert!(at1
            .complex()
            .unwrap()
            .differential
            .equal(&e0t.complex().unwrap().differential));
    }

    #[test]
    fn binding_the_center_makes_constant_corestrictions() {
        let g = heisenberg(&v0()).unwrap();
        let ce = ce_chains(&g, 6).unwrap();
        assert!(ce.bracket.is_none());
        assert!(ce.binary_bracket(&Element::one(), &Element::one()).is_err());

        let bound = bind_central(&ce, &CentralBinding::generator("c", rational_int(1))).unwrap();
        assert_eq!(bound.kind, EnvKind::CE);
        assert!(bound.lie.is_none());
        let alg = &bound.algebra;
        assert_eq!(alg.space().len(), 2);
        let d = &bound.differential;
        assert_eq!(
            d.apply_monomial(alg, &monomial(alg, &[("x", 1), ("xi", 1)])),
            Element::one()
        );
        assert_eq!(
            d.apply_monomial(alg, &monomial(alg, &[("x", 3), ("xi", 1)])),
            elem(alg, Scalar::from_int(3), &[("x", 2)])
        );
        assert!(check_axioms(&bound).is_valid());

        let killed = bind_central(&ce, &CentralBinding::generator("c", Rational::zero())).unwrap();
        assert_eq!(killed.differential, Operator::zero(1));
    }

    #[test]
    fn binding_rejects_bad_generators() {
        let g = heisenberg(&v0()).unwrap();
        let env = u_p0(&g, 3).unwrap();
        let not_central =
            bind_central(&env, &CentralBinding::generator("x", rational_int(1))).unwrap_err();
        assert!(matches!(not_central, Error::NotCentral { .. }));
        let wrong_degree =
            bind_central(&env, &CentralBinding::generator("xi", rational_int(1))).unwrap_err();
        assert!(matches!(wrong_degree, Error::DegreeMismatch { .. }));
        let unknown =
            bind_central(&env, &CentralBinding::generator("nope", rational_int(1))).unwrap_err();
        assert!(matches!(unknown, Error::UnknownGenerator { .. }));

        let open = u_p0(&abelian_with_differential(), 3).unwrap();
        let not_closed =
            bind_central(&open, &CentralBinding::generator("a", rational_int(1))).unwrap_err();
        assert!(matches!(not_closed, Error::NotClosed { .. }));
    }

    #[test]
    fn reserved_parameter_name_is_rejected() {
        let space = GradedSpace::new([("x", 0), ("xi", -1)]).unwrap();
        let q = QuadraticModule::from_entries(
            GradedComplex::zero_differential(space),
            [("x", "xi", Scalar::param(HBAR))],
        )
        .unwrap();
        let g = heisenberg(&q).unwrap();
        let err = u_bd(&g, 3).unwrap_err();
        assert!(matches!(err, Error::ValidationError { .. }));
        assert!(err.to_string().contains("reserved"));
        // the other envelopes accept parametric modules
        assert!(u_p0(&g, 3).is_ok());
    }

    #[test]
    fn envelope_of_a_direct_sum_factors() {
        let space = GradedSpace::new([
            ("x1", 0),
            ("xi1", -1),
            ("c1", 0),
            ("x2", 0),
            ("xi2", -1),
            ("c2", 0),
        ])
        .unwrap();
        let complex =
            GradedComplex::with_differential_entries(space, [("xi1", "x1", Scalar::one())])
                .unwrap();
        let c = |n: i64| vec![("c1", Scalar::from_int(n))];
        let c2 = |n: i64| vec![("c2", Scalar::from_int(n))];
        let g12 = ShiftedLieAlgebra::from_named_table(
            complex,
            [
                ("x1", "xi1", c(1)),
                ("xi1", "x1", c(1)),
                ("x2", "xi2", c2(1)),
                ("xi2", "x2", c2(1)),
            ],
        )
        .unwrap();
        assert!(validate_lie1(&g12).is_valid());

        let left_space = GradedSpace::new([("x1", 0), ("xi1", -1), ("c1", 0)]).unwrap();
        let left_complex = GradedComplex::with_differential_entries(
            left_space,
            [("xi1", "x1", Scalar::one())],
        )
        .unwrap();
        let g1 = ShiftedLieAlgebra::from_named_table(
            left_complex,
            [("x1", "xi1", c(1)), ("xi1", "x1", c(1))],
        )
        .unwrap();
        let right_space = GradedSpace::new([("x2", 0), ("xi2", -1), ("c2", 0)]).unwrap();
        let g2 = ShiftedLieAlgebra::from_named_table(
            GradedComplex::zero_differential(right_space),
            [("x2", "xi2", c2(1)), ("xi2", "x2", c2(1))],
        )
        .unwrap();

        let env = u_e0t(&g12, 4).unwrap();
        let env1 = u_e0t(&g1, 4).unwrap();
        let env2 = u_e0t(&g2, 4).unwrap();
        let alg = &env.algebra;
        let space = alg.space();

        // transfer an element of a factor into the sum by generator name
        let lift = |e: &Element, from: &TruncatedSymAlgebra| -> Element {
            let mut out = Element::zero();
            for (m, coeff) in &e.terms {
                let items: Vec<(GenId, u32)> = m
                    .factors()
                    .iter()
                    .map(|&(gid, k)| (space.id(from.space().name(gid)).unwrap(), k))
                    .collect();
                out.add_term(Monomial::from_multiset(space, &items).unwrap(), coeff.clone());
            }
            out
        };
        let project = |m: &Monomial, to: &TruncatedSymAlgebra| -> Monomial {
            let items: Vec<(GenId, u32)> = m
                .factors()
                .iter()
                .filter_map(|&(gid, k)| to.space().id(space.name(gid)).ok().map(|i| (i, k)))
                .collect();
            Monomial::from_multiset(to.space(), &items).unwrap()
        };

        for m in alg.basis() {
            let m1 = project(m, &env1.algebra);
            let m2 = project(m, &env2.algebra);
            let d1 = alg.mul(
                &lift(&env1.differential.apply_monomial(&env1.algebra, &m1), &env1.algebra),
                &lift(
                    &Element::from_monomial(m2.clone(), Scalar::one()),
                    &env2.algebra,
                ),
            );
            let d2 = alg
                .mul(
                    &lift(
                        &Element::from_monomial(m1.clone(), Scalar::one()),
                        &env1.algebra,
                    ),
                    &lift(&env2.differential.apply_monomial(&env2.algebra, &m2), &env2.algebra),
                )
                .scale(&sign_pow(m1.degree(env1.algebra.space())));
            assert_eq!(
                env.differential.apply_monomial(alg, m),
                d1.plus(&d2),
                "differential does not factor on {}",
                m.name(space)
            );
        }
    }

    #[test]
    fn axiom_audit_is_clean_across_kinds_and_modules() {
        let modules = [
            heisenberg(&v0()).unwrap(),
            heisenberg(&oplus(&v0(), &v1()).unwrap()).unwrap(),
            heisenberg(&degenerate()).unwrap(),
            abelian_with_differential(),
        ];
        for g in &modules {
            for env in [
                u_p0(g, 4).unwrap(),
                u_bd(g, 4).unwrap(),
                u_e0t(g, 4).unwrap(),
                ce_chains(g, 4).unwrap(),
            ] {
                let report = check_axioms(&env);
                assert!(
                    report.is_valid(),
                    "kind {} failed: {}",
                    env.kind,
                    report
                );
            }
        }
    }

    #[test]
    fn axiom_audit_names_planted_defects() {
        let g = heisenberg(&v0()).unwrap();

        // bracket folded in without the interpolation scale
        let mut m1 = u_e0t(&g, 3).unwrap();
        m1.kind = EnvKind::BD;
        m1.hbar = Some(HBAR.to_string());
        assert!(has(&check_axioms(&m1), "interpolated Leibniz rule"));

        // bracket operator disagreeing with the Lie table
        let mut m2 = u_p0(&g, 3).unwrap();
        let alg = m2.algebra.clone();
        m2.bracket = Some(
            extend_operator(
                alg.space(),
                1,
                [(
                    monomial(&alg, &[("x", 1), ("xi", 1)]),
                    elem(&alg, Scalar::from_int(-1), &[("c", 1)]),
                )],
            )
            .unwrap(),
        );
        assert!(has(&check_axioms(&m2), "bracket matches the Lie table"));

        // second order differential claiming to be a derivation
        let mut m3 = u_e0t(&g, 3).unwrap();
        m3.kind = EnvKind::P0;
        let r3 = check_axioms(&m3);
        assert!(has(&r3, "differential is a derivation"));
        assert!(has(&r3, "corestriction arity"));

        // bracket violating Jacobi: [x,[x,x]] must vanish for even x
        let jspace = GradedSpace::new([("x", 0), ("y", 1), ("z", 2)]).unwrap();
        let jlie = ShiftedLieAlgebra::from_named_table(
            GradedComplex::zero_differential(jspace),
            [
                ("x", "x", vec![("y", Scalar::one())]),
                ("x", "y", vec![("z", Scalar::one())]),
                ("y", "x", vec![("z", Scalar::one())]),
            ],
        )
        .unwrap();
        let jalg = sym_truncation(&jlie.complex, 3).unwrap();
        let m4 = EnvelopedAlgebra {
            kind: EnvKind::P0,
            lie: Some(jlie.clone()),
            differential: Operator::zero(1),
            bracket: Some(bracket_operator(&jlie).unwrap()),
            hbar: None,
            algebra: jalg,
        };
        assert!(has(&check_axioms(&m4), "bracket Jacobi"));

        // corestriction value outweighing its key
        let wlie = abelian_with_differential();
        let walg = sym_truncation(&wlie.complex, 4).unwrap();
        let heavy = extend_operator(
            walg.space(),
            1,
            [(
                monomial(&walg, &[("a", 1)]),
                elem(&walg, Scalar::one(), &[("a", 1), ("b", 1)]),
            )],
        )
        .unwrap();
        let m5 = EnvelopedAlgebra {
            kind: EnvKind::P0,
            lie: None,
            differential: heavy,
            bracket: Some(Operator::zero(1)),
            hbar: None,
            algebra: walg,
        };
        assert!(has(&check_axioms(&m5), "weight filtration"));

        // differential that fails to square to zero
        let qspace = GradedSpace::new([("a", 0), ("b", 1), ("e", 2)]).unwrap();
        let qcomplex = GradedComplex::zero_differential(qspace);
        let qalg = sym_truncation(&qcomplex, 3).unwrap();
        let broken = extend_operator(
            qalg.space(),
            1,
            [
                (monomial(&qalg, &[("a", 1)]), elem(&qalg, Scalar::one(), &[("b", 1)])),
                (monomial(&qalg, &[("b", 1)]), elem(&qalg, Scalar::one(), &[("e", 1)])),
            ],
        )
        .unwrap();
        let m6 = EnvelopedAlgebra {
            kind: EnvKind::P0,
            lie: None,
            differential: broken,
            bracket: Some(Operator::zero(1)),
            hbar: None,
            algebra: qalg,
        };
        assert!(has(&check_axioms(&m6), "square zero"));
    }

    #[test]
    fn dual_route_comparison_agrees() {
        let modules = [
            heisenberg(&v0()).unwrap(),
            heisenberg(&oplus(&v0(), &v1()).unwrap()).unwrap(),
            heisenberg(&degenerate()).unwrap(),
            abelian_with_differential(),
        ];
        for g in &modules {
            let cmp = compare_env_ce(g, 4).unwrap();
            assert!(cmp.basis_len > 0);
            assert!(cmp.exact(), "mismatch: {:?}", cmp.mismatch);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn random_heisenberg_envelopes_pass_the_audit(
            coeffs in proptest::collection::vec(-3i64..=3, 4),
            profile in 0usize..3,
        ) {
            let space = match profile {
                0 => GradedSpace::new([("p", 0), ("q", -1)]).unwrap(),
                1 => GradedSpace::new([("p", 0), ("q", -1), ("r", 1), ("s", -2)]).unwrap(),
                _ => GradedSpace::new([("p", -1), ("q", 0), ("r", 2), ("s", -3)]).unwrap(),
            };
            let pairs: Vec<(String, String)> = {
                let mut out = Vec::new();
                for i in space.ids() {
                    for j in space.ids() {
                        if i <= j && space.degree(i) + space.degree(j) == -1 {
                            out.push((space.name(i).to_string(), space.name(j).to_string()));
                        }
                    }
                }
                out
            };
            let entries: Vec<(&str, &str, Scalar)> = pairs
                .iter()
                .zip(coeffs.iter().cycle())
                .map(|((a, b), c)| (a.as_str(), b.as_str(), Scalar::from_int(*c)))
                .collect();
            let q = QuadraticModule::from_entries(
                GradedComplex::zero_differential(space),
                entries,
            ).unwrap();
            let g = heisenberg(&q).unwrap();
            for env in [u_p0(&g, 3).unwrap(), u_bd(&g, 3).unwrap(), u_e0t(&g, 3).unwrap()] {
                prop_assert!(check_axioms(&env).is_valid());
            }
            let cmp = compare_env_ce(&g, 3).unwrap();
            prop_assert!(cmp.exact());
        }
    }
}
