//! Seeded example generators: random nondegenerate quadratic modules,
//! composable morphism pairs, and positive-definite actions.  Every output
//! is a deterministic function of the seed, so a failing case replays
//! exactly from its seed and label.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::divergence::{quadratic_action, QuadraticAction};
use crate::graded::{GenId, GradedComplex, GradedMap, GradedSpace};
use crate::lie1::{is_nondegenerate, QuadraticModule, QuadraticMorphism};
use crate::scalar::{rational_int, Scalar};

pub fn corpus_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A zero-differential quadratic module with an exactly invertible pairing:
/// `max_pairs` hyperbolic pairs in degrees `(d, -1-d)` with `d` in `[-3, 2]`,
/// filled with random integer entries on every degree-compatible slot and
/// rejected until nondegenerate.
pub fn random_nondegenerate_module(
    rng: &mut ChaCha8Rng,
    label: &str,
    max_pairs: usize,
) -> QuadraticModule {
    loop {
        let pairs = rng.gen_range(1..=max_pairs);
        let mut gens = Vec::new();
        for k in 0..pairs {
            let d: i64 = rng.gen_range(-3..=2);
            gens.push((format!("{label}a{k}"), d));
            gens.push((format!("{label}b{k}"), -1 - d));
        }
        let space = GradedSpace::new(gens).expect("labelled names are distinct");
        let complex = GradedComplex::zero_differential(space);
        let ids: Vec<GenId> = complex.space.ids().collect();
        let mut entries: Vec<(String, String, Scalar)> = Vec::new();
        for (p, &x) in ids.iter().enumerate() {
            for &y in &ids[p + 1..] {
                if complex.space.degree(x) + complex.space.degree(y) != -1 {
                    continue;
                }
                let c: i64 = rng.gen_range(-2..=2);
                if c != 0 {
                    entries.push((
                        complex.space.name(x).to_string(),
                        complex.space.name(y).to_string(),
                        Scalar::from_int(c),
                    ));
                }
            }
        }
        let module = QuadraticModule::from_entries(
            complex,
            entries.iter().map(|(x, y, c)| (x.as_str(), y.as_str(), c.clone())),
        )
        .expect("each unordered pair appears once");
        if is_nondegenerate(&module).expect("no parameters") {
            return module;
        }
    }
}

/// A random degree-0 map between zero-differential modules, with entries
/// in `[-2, 2]` on every degree-compatible slot.
fn random_map(rng: &mut ChaCha8Rng, source: &GradedSpace, target: &GradedSpace) -> GradedMap {
    let mut f = GradedMap::zero(source.clone(), target.clone(), 0);
    for s in source.ids() {
        for t in target.ids() {
            if target.degree(t) != source.degree(s) {
                continue;
            }
            let c: i64 = rng.gen_range(-2..=2);
            if c != 0 {
                f.set(s, t, Scalar::from_int(c)).expect("degrees match");
            }
        }
    }
    f
}

/// A zero-differential module mapping into `target` by a random degree-0
/// map, carrying the exact pulled-back pairing, so the map is a strict
/// isometry.  Generator degrees are sampled from the degrees present in
/// the target.
fn random_module_over(
    rng: &mut ChaCha8Rng,
    label: &str,
    target: &QuadraticModule,
    max_gens: usize,
) -> (QuadraticModule, GradedMap) {
    let pool: Vec<i64> = target.space().ids().map(|id| target.space().degree(id)).collect();
    let count = rng.gen_range(1..=max_gens);
    let gens: Vec<(String, i64)> =
        (0..count).map(|k| (format!("{label}{k}"), pool[rng.gen_range(0..pool.len())])).collect();
    let space = GradedSpace::new(gens).expect("labelled names are distinct");
    let complex = GradedComplex::zero_differential(space);
    let f = random_map(rng, &complex.space, target.space());
    let ids: Vec<GenId> = complex.space.ids().collect();
    let mut entries: Vec<(String, String, Scalar)> = Vec::new();
    for (p, &x) in ids.iter().enumerate() {
        for &y in ids[p..].iter() {
            let w = target.pair_lin(&f.image_of(x), &f.image_of(y));
            if !w.is_zero() {
                entries.push((
                    complex.space.name(x).to_string(),
                    complex.space.name(y).to_string(),
                    w,
                ));
            }
        }
    }
    let module = QuadraticModule::from_entries(
        complex,
        entries.iter().map(|(x, y, c)| (x.as_str(), y.as_str(), c.clone())),
    )
    .expect("pullback of a symmetric pairing is symmetric");
    (module, f)
}

/// A random symmetric degree-0 homotopy table on the degree-compatible
/// generator pairs of `source`, as named entries.
fn random_eta(rng: &mut ChaCha8Rng, source: &GradedSpace) -> Vec<(String, String, Scalar)> {
    let ids: Vec<GenId> = source.ids().collect();
    let mut entries = Vec::new();
    for (p, &x) in ids.iter().enumerate() {
        for &y in ids[p..].iter() {
            if source.degree(x) + source.degree(y) != 0 {
                continue;
            }
            if x == y && source.degree(x).rem_euclid(2) == 1 {
                continue;
            }
            let c: i64 = rng.gen_range(-1..=1);
            if c != 0 {
                entries.push((
                    source.name(x).to_string(),
                    source.name(y).to_string(),
                    Scalar::from_int(c),
                ));
            }
        }
    }
    entries
}

/// A composable pair of valid quadratic morphisms `A -> B -> C` on
/// zero-differential modules of at most `max_gens` generators each: `C` is
/// nondegenerate, the pairings of `B` and `A` are exact pullbacks, and
/// both maps carry random symmetric homotopies.
pub fn random_morphism_pair(
    rng: &mut ChaCha8Rng,
    label: &str,
    max_gens: usize,
) -> (QuadraticMorphism, QuadraticMorphism) {
    let c = random_nondegenerate_module(rng, &format!("{label}c"), max_gens / 2);
    let (b, g) = random_module_over(rng, &format!("{label}b"), &c, max_gens);
    let (a, f) = random_module_over(rng, &format!("{label}a"), &b, max_gens);
    let eta_f = random_eta(rng, a.space());
    let eta_g = random_eta(rng, b.space());
    let first = QuadraticMorphism::new(
        a,
        b.clone(),
        f,
        eta_f.iter().map(|(x, y, c)| (x.as_str(), y.as_str(), c.clone())),
    )
    .expect("mirrored entries are consistent");
    let second = QuadraticMorphism::new(
        b,
        c,
        g,
        eta_g.iter().map(|(x, y, c)| (x.as_str(), y.as_str(), c.clone())),
    )
    .expect("mirrored entries are consistent");
    (first, second)
}

/// A random positive-definite action: `B^T B + I` for an integer matrix
/// `B` with entries in `[-2, 2]`.
pub fn random_positive_definite_action(rng: &mut ChaCha8Rng, n: usize) -> QuadraticAction {
    let b: Vec<Vec<i64>> =
        (0..n).map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect()).collect();
    let matrix = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dot: i64 = (0..n).map(|k| b[k][i] * b[k][j]).sum();
                    rational_int(dot + i64::from(i == j))
                })
                .collect()
        })
        .collect();
    quadratic_action(matrix).expect("B^T B + I is symmetric positive definite")
}
