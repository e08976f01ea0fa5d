//! Bar and cobar constructions over the symmetric coalgebra.
//!
//! The bar side of a shifted Lie algebra is its Chevalley-Eilenberg chain
//! coalgebra.  The cobar side is a free shifted Lie algebra on the reduced
//! bar monomials, graded by total letter weight so that every cutoff is a
//! subcomplex.  Structure laws are certified at construction.

use std::collections::BTreeMap;

use crate::cohomology::{cohomology, CohomologyReport};
use crate::envelope::{ce_chains, EnvelopedAlgebra};
use crate::error::{Error, Result, ValidationReport};
use crate::graded::{
    check_chain_map, lincomb_add, sign_pow, GenId, GradedComplex, GradedMap, GradedSpace, LinComb,
};
use crate::lie1::{
    add_scaled, compose_morphisms, free_lie1_weighted, heisenberg, singleton, validate_morphism,
    QuadraticMorphism, ShiftedLieAlgebra,
};
use crate::scalar::Scalar;
use crate::symalg::{
    exp_weight_lowering, extend_operator, is_coderivation, AlgebraMap, Element, Monomial,
    Operator, TensorElement, TruncatedSymAlgebra,
};

/// Chevalley-Eilenberg chains of a shifted Lie algebra viewed as a
/// conilpotent coalgebra, with counit and coaugmentation.
#[derive(Clone)]
pub struct BarCoalgebra {
    pub env: EnvelopedAlgebra,
}

impl BarCoalgebra {
    pub fn algebra(&self) -> &TruncatedSymAlgebra {
        &self.env.algebra
    }

    pub fn differential(&self) -> &Operator {
        &self.env.differential
    }

    pub fn cutoff(&self) -> u32 {
        self.env.cutoff()
    }

    /// Image of 1 under the coaugmentation.
    pub fn coaugmentation(&self) -> Element {
        Element::one()
    }

    /// The coefficient of the unit monomial.
    pub fn counit(&self, e: &Element) -> Scalar {
        e.terms.get(&Monomial::one()).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn coproduct(&self, e: &Element) -> TensorElement {
        self.env.algebra.coproduct(e)
    }

    /// Coproduct with the two unit tensor legs removed.
    pub fn reduced_coproduct_monomial(&self, m: &Monomial) -> TensorElement {
        let mut out = self.env.algebra.coproduct_monomial(m);
        out.terms.retain(|(l, r), _| !l.is_one() && !r.is_one());
        out
    }
}

/// Chain coalgebra of `g` truncated at the given weight.  The
/// coderivation law is checked on the whole basis here, so this is the
/// coalgebra-certified entry point.
pub fn bar(g: &ShiftedLieAlgebra, cutoff: u32) -> Result<BarCoalgebra> {
    let env = ce_chains(g, cutoff)?;
    let map = env.differential.to_algebra_map(&env.algebra);
    if !is_coderivation(&env.algebra, &map) {
        return Err(Error::ValidationError {
            context: "chain differential fails the coderivation law".into(),
        });
    }
    Ok(BarCoalgebra { env })
}

/// Free shifted Lie algebra on the reduced bar monomials.  The complex
/// carries the cobar differential on the bracket-word basis.
#[derive(Clone)]
pub struct CobarAlgebra {
    pub lie: ShiftedLieAlgebra,
    /// Total letter weight of each basis word.
    pub weights: Vec<u32>,
    /// `None` for letters, the bracketed pair of earlier word ids otherwise.
    pub built_from: Vec<Option<(GenId, GenId)>>,
    /// The bar monomial wrapped by each single-letter word.
    pub letters: BTreeMap<GenId, Monomial>,
    pub cutoff: u32,
}

impl CobarAlgebra {
    pub fn space(&self) -> &GradedSpace {
        self.lie.space()
    }

    pub fn differential(&self) -> &GradedMap {
        &self.lie.complex.differential
    }
}

/// Relative sign between the interior part and the coproduct part of the
/// cobar differential.  Both choices square to zero, since the letter
/// parity involution exchanges them.  This one is forced by the
/// evaluation onto the algebra being a chain map; the regression test
/// pins it down.
const COBAR_COPRODUCT_SIGN: i64 = -1;

pub fn cobar(c: &BarCoalgebra, cutoff: u32) -> Result<CobarAlgebra> {
    cobar_with_sign(c, cutoff, COBAR_COPRODUCT_SIGN)
}

fn cobar_with_sign(c: &BarCoalgebra, cutoff: u32, sign: i64) -> Result<CobarAlgebra> {
    if cutoff < 1 {
        return Err(Error::ValidationError {
            context: "the cobar construction needs a weight cutoff of at least 1".into(),
        });
    }
    let bar_alg = c.algebra();
    let bspace = bar_alg.space();
    let max_letter = cutoff.min(bar_alg.cutoff());

    let mut letter_defs: Vec<(String, i64, u32)> = Vec::new();
    let mut letter_monos: Vec<Monomial> = Vec::new();
    for m in bar_alg.basis() {
        let w = m.weight();
        if w == 0 || w > max_letter {
            continue;
        }
        letter_defs.push((format!("<{}>", m.name(bspace)), m.degree(bspace), w));
        letter_monos.push(m.clone());
    }
    let ft = free_lie1_weighted(&letter_defs, cutoff)?;
    let wspace = ft.algebra.space().clone();
    let n = ft.weights.len();
    let letter_id = |name: &str| wspace.id(name);

    // differential on letters: reread the bar differential letterwise,
    // then the bracketed reduced coproduct.  The half compensates for the
    // coproduct listing each unordered splitting twice.
    let mut images: Vec<LinComb> = vec![LinComb::new(); n];
    let half = Scalar::from_ratio(sign, 2);
    for (k, m) in letter_monos.iter().enumerate() {
        let wid = letter_id(&letter_defs[k].0)?;
        let mut img = LinComb::new();
        for (t, coeff) in &c.differential().apply_monomial(bar_alg, m).terms {
            let lid = letter_id(&format!("<{}>", t.name(bspace)))?;
            lincomb_add(&mut img, lid, coeff.clone());
        }
        for ((l, r), coeff) in &c.reduced_coproduct_monomial(m).terms {
            let li = letter_id(&format!("<{}>", l.name(bspace)))?;
            let ri = letter_id(&format!("<{}>", r.name(bspace)))?;
            add_scaled(&mut img, &ft.algebra.bracket(li, ri), &(&half * coeff));
        }
        images[wid] = img;
    }

    // extend over bracket words by d[u,v] = -[du,v] - (-1)^{|u|}[u,dv];
    // built_from always points at earlier, lower weight ids
    for idx in 0..n {
        let Some((i, j)) = ft.built_from[idx] else { continue };
        let du = images[i].clone();
        let dv = images[j].clone();
        let mut img = LinComb::new();
        add_scaled(
            &mut img,
            &ft.algebra.bracket_lin(&du, &singleton(j)),
            &Scalar::from_int(-1),
        );
        add_scaled(
            &mut img,
            &ft.algebra.bracket_lin(&singleton(i), &dv),
            &sign_pow(wspace.degree(i) + 1),
        );
        images[idx] = img;
    }

    let mut d = GradedMap::zero(wspace.clone(), wspace.clone(), 1);
    for (idx, img) in images.iter().enumerate() {
        for (t, coeff) in img {
            d.add_to(idx, *t, coeff.clone())?;
            if ft.weights[*t] > ft.weights[idx] {
                return Err(Error::NotWeightLowering {
                    witness: wspace.name(*t).to_string(),
                });
            }
        }
    }
    let complex = GradedComplex::new(wspace.clone(), d)?;
    complex.verify_d_squared()?;

    let mut letters = BTreeMap::new();
    for (k, m) in letter_monos.iter().enumerate() {
        letters.insert(letter_id(&letter_defs[k].0)?, m.clone());
    }
    Ok(CobarAlgebra {
        lie: ShiftedLieAlgebra { complex, table: ft.algebra.table, central: None },
        weights: ft.weights,
        built_from: ft.built_from,
        letters,
        cutoff,
    })
}

/// Cohomology of the weight `w` piece.  Requires the differential to be
/// weight homogeneous on the whole truncation, which holds exactly when
/// the interior part vanishes.
pub fn weight_cohomology(omega: &CobarAlgebra, w: u32) -> Result<CohomologyReport> {
    if w > omega.cutoff {
        return Err(Error::CutoffExceeded { weight: w as usize, cutoff: omega.cutoff as usize });
    }
    let space = omega.space();
    let d = omega.differential();
    for idx in 0..omega.weights.len() {
        for (t, _) in d.image_of(idx) {
            if omega.weights[t] != omega.weights[idx] {
                return Err(Error::WeightNotGraded { witness: space.name(idx).to_string() });
            }
        }
    }
    let ids: Vec<GenId> = (0..omega.weights.len()).filter(|&i| omega.weights[i] == w).collect();
    let names: Vec<(String, i64)> =
        ids.iter().map(|&i| (space.name(i).to_string(), space.degree(i))).collect();
    let sub = GradedSpace::new(names)?;
    let index_of: BTreeMap<GenId, usize> =
        ids.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let mut dw = GradedMap::zero(sub.clone(), sub.clone(), 1);
    for &i in &ids {
        for (t, c) in d.image_of(i) {
            dw.add_to(index_of[&i], index_of[&t], c)?;
        }
    }
    let piece = GradedComplex::new(sub, dw)?;
    cohomology(&piece, None)
}

/// Evaluation of the cobar resolution back onto the algebra: letters
/// project to their weight one part and bracket words follow the bracket.
/// Certified as a chain map and a shifted Lie morphism on the truncation.
pub struct CounitMap {
    pub bar: BarCoalgebra,
    pub cobar: CobarAlgebra,
    /// Word space to the algebra's space, degree 0.
    pub map: GradedMap,
}

pub fn counit_map(g: &ShiftedLieAlgebra, cutoff: u32) -> Result<CounitMap> {
    let b = bar(g, cutoff)?;
    let omega = cobar(&b, cutoff)?;
    let map = evaluation_of(g, &omega)?;
    Ok(CounitMap { bar: b, cobar: omega, map })
}

fn evaluation_of(g: &ShiftedLieAlgebra, omega: &CobarAlgebra) -> Result<GradedMap> {
    let n = omega.weights.len();
    let wspace = omega.space();

    let mut images: Vec<LinComb> = vec![LinComb::new(); n];
    for idx in 0..n {
        match omega.built_from[idx] {
            None => {
                let m = &omega.letters[&idx];
                if m.weight() == 1 {
                    images[idx] = singleton(m.factors()[0].0);
                }
            }
            Some((i, j)) => {
                images[idx] = g.bracket_lin(&images[i].clone(), &images[j].clone());
            }
        }
    }
    let mut map = GradedMap::zero(wspace.clone(), g.space().clone(), 0);
    for (idx, img) in images.iter().enumerate() {
        for (t, c) in img {
            map.add_to(idx, *t, c.clone())?;
        }
    }

    if !check_chain_map(&map, &omega.lie.complex, &g.complex) {
        return Err(Error::ValidationError {
            context: "cobar evaluation is not a chain map".into(),
        });
    }
    for u in 0..n {
        for v in 0..n {
            if omega.weights[u] + omega.weights[v] > omega.cutoff {
                continue;
            }
            let mut lhs = LinComb::new();
            for (wrd, c) in &omega.lie.bracket(u, v) {
                add_scaled(&mut lhs, &images[*wrd], c);
            }
            let rhs = g.bracket_lin(&images[u], &images[v]);
            add_scaled(&mut lhs, &rhs, &Scalar::from_int(-1));
            if !lhs.is_empty() {
                return Err(Error::ValidationError {
                    context: format!(
                        "cobar evaluation fails the bracket on ({}, {})",
                        wspace.name(u),
                        wspace.name(v)
                    ),
                });
            }
        }
    }
    Ok(map)
}

/// A map of bar coalgebras stored on the monomial basis.
pub struct CoalgebraMorphism {
    pub source: BarCoalgebra,
    pub target: BarCoalgebra,
    pub map: AlgebraMap,
}

impl CoalgebraMorphism {
    /// Counit, chain and coproduct compatibility, checked exactly on the
    /// whole truncated basis.
    pub fn verify(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let salg = self.source.algebra();
        let talg = self.target.algebra();
        let sspace = salg.space();
        if self.map.degree != 0 {
            report.push("map degree", "-", format!("degree {} map, expected 0", self.map.degree));
        }
        for (k, m) in salg.basis().iter().enumerate() {
            let img = self.map.image_of_index(k);
            let want = if m.is_one() { Scalar::one() } else { Scalar::zero() };
            if self.target.counit(img) != want {
                report.push("counit", m.name(sspace), "the weight zero coefficient moved");
            }

            let lhs = self.target.differential().apply(talg, img);
            let rhs = self.map.apply(&self.source.differential().apply_monomial(salg, m));
            if lhs != rhs {
                report.push("chain map", m.name(sspace), format!(
                    "d of the image is {} but the image of d is {}",
                    lhs.format(talg.space()),
                    rhs.format(talg.space())
                ));
            }

            let lhs = talg.coproduct(img);
            let mut rhs = TensorElement::zero();
            for ((l, r), c) in &salg.coproduct_monomial(m).terms {
                let il = self.map.apply(&Element::from_monomial(l.clone(), Scalar::one()));
                let ir = self.map.apply(&Element::from_monomial(r.clone(), Scalar::one()));
                for (ml, cl) in &il.terms {
                    for (mr, cr) in &ir.terms {
                        rhs.add_term(ml.clone(), mr.clone(), c * &(cl * cr));
                    }
                }
            }
            if lhs != rhs {
                report.push("coproduct", m.name(sspace), "the coalgebra square does not commute");
            }
        }
        report
    }
}

fn commutator(alg: &TruncatedSymAlgebra, a: &Operator, b: &Operator, m: &Monomial) -> Element {
    let ab = a.apply(alg, &b.apply_monomial(alg, m));
    let ba = b.apply(alg, &a.apply_monomial(alg, m));
    ab.minus(&ba.scale(&sign_pow(a.degree() * b.degree())))
}

fn split_by_key_weight(space: &GradedSpace, op: &Operator) -> Result<(Operator, Operator)> {
    let mut lin: Vec<(Monomial, Element)> = Vec::new();
    let mut quad: Vec<(Monomial, Element)> = Vec::new();
    for (k, v) in op.corestrictions() {
        if k.weight() <= 1 {
            lin.push((k.clone(), v.clone()));
        } else {
            quad.push((k.clone(), v.clone()));
        }
    }
    Ok((extend_operator(space, op.degree(), lin)?, extend_operator(space, op.degree(), quad)?))
}

/// Map induced on bar coalgebras of Heisenberg algebras by a quadratic
/// morphism: the exponentiated homotopy contraction followed by the
/// multiplicative extension of the linear part.
///
/// The contraction `D` pairs two module letters into the central
/// generator through the homotopy.  Before exponentiating, three
/// identities are checked on the whole basis: `[d, D]` equals the defect
/// between the pulled back pairing part and the source pairing part, and
/// `D` commutes with both pairing parts.  They bound the conjugation
/// series and force the exponential to intertwine the differentials.
pub fn heis_on_morphism(f: &QuadraticMorphism, cutoff: u32) -> Result<CoalgebraMorphism> {
    let report = validate_morphism(f);
    if !report.is_valid() {
        return Err(Error::InvalidMorphism { report });
    }
    let gs = heisenberg(&f.source)?;
    let gt = heisenberg(&f.target)?;
    let cs = gs.central.expect("a Heisenberg algebra carries a center");
    let ct = gt.central.expect("a Heisenberg algebra carries a center");
    let bs = bar(&gs, cutoff)?;
    let bt = bar(&gt, cutoff)?;
    let salg = bs.algebra();
    let sspace = salg.space();

    let mut entries: Vec<(Monomial, Element)> = Vec::new();
    for ((x, y), v) in &f.eta {
        if x > y || v.is_zero() {
            continue;
        }
        let Some(key) = Monomial::from_multiset(sspace, &[(*x, 1), (*y, 1)]) else {
            let mut report = ValidationReport::new();
            report.push("homotopy support", sspace.name(*x), "nonzero entry on an odd square");
            return Err(Error::InvalidMorphism { report });
        };
        entries.push((key, Element::from_monomial(Monomial::generator(cs), v.clone())));
    }
    let d_eta = extend_operator(sspace, 0, entries)?;

    let mids: Vec<GenId> = f.source.space().ids().collect();
    let mut entries: Vec<(Monomial, Element)> = Vec::new();
    for (i, &x) in mids.iter().enumerate() {
        for &y in &mids[i..] {
            let s = f.target.pair_lin(&f.f.image_of(x), &f.f.image_of(y));
            if s.is_zero() {
                continue;
            }
            let key = Monomial::from_multiset(sspace, &[(x, 1), (y, 1)])
                .expect("a degree -1 pairing cannot sit on an odd square");
            entries.push((key, Element::from_monomial(Monomial::generator(cs), s)));
        }
    }
    let delta_pulled = extend_operator(sspace, 1, entries)?;
    let (d_module, delta_source) = split_by_key_weight(sspace, bs.differential())?;

    let mut report = ValidationReport::new();
    for m in salg.basis() {
        let lhs = commutator(salg, &d_module, &d_eta, m);
        let rhs = delta_pulled.apply_monomial(salg, m).minus(&delta_source.apply_monomial(salg, m));
        if lhs != rhs {
            report.push(
                "conjugation hypothesis",
                m.name(sspace),
                "[d, D] must equal the pairing defect",
            );
            break;
        }
    }
    for m in salg.basis() {
        if !commutator(salg, &d_eta, &delta_source, m).is_zero() {
            report.push("contraction commutes with the source pairing", m.name(sspace), "-");
            break;
        }
        if !commutator(salg, &d_eta, &delta_pulled, m).is_zero() {
            report.push("contraction commutes with the pulled back pairing", m.name(sspace), "-");
            break;
        }
    }
    if !report.is_valid() {
        return Err(Error::InvalidMorphism { report });
    }

    let twist = exp_weight_lowering(salg, &d_eta.scale(&Scalar::from_int(-1)))?;
    let mut lift = GradedMap::zero(sspace.clone(), gt.space().clone(), 0);
    for x in f.source.space().ids() {
        for (t, c) in f.f.image_of(x) {
            lift.add_to(x, t, c)?;
        }
    }
    lift.add_to(cs, ct, Scalar::one())?;
    let symf = AlgebraMap::sym_of_linear(salg, bt.algebra(), &lift);

    let cm = CoalgebraMorphism { source: bs, target: bt, map: twist.then(&symf) };
    let rep = cm.verify();
    if !rep.is_valid() {
        return Err(Error::ValidationError {
            context: format!("induced bar map fails verification: {}", rep),
        });
    }
    Ok(cm)
}

/// True when the bar map of the composite equals the composite of the
/// bar maps, as exact matrices on the truncation.
pub fn check_composition(
    first: &QuadraticMorphism,
    second: &QuadraticMorphism,
    cutoff: u32,
) -> Result<bool> {
    let composite = compose_morphisms(first, second)?;
    let pf = heis_on_morphism(first, cutoff)?;
    let ps = heis_on_morphism(second, cutoff)?;
    let pc = heis_on_morphism(&composite, cutoff)?;
    Ok(pf.map.then(&ps.map).equal(&pc.map))
}
