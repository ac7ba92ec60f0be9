//! Seeded random instances for the verification suites.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characters::Mobius;
use crate::correspondence::{cq, Cq};
use crate::fock::{FockSpace, FourierElement};
use crate::rational::{ratio, Rational};
use crate::spaces::{ClopenSubset, Interval, PlFunc};
use crate::wps::{FiniteBranch, FiniteSystem, IntervalBranch, IntervalSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational in `[1/4, 4]` with small numerator and denominator.
pub fn positive_rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(1..=8), rng.gen_range(1..=4)).min(ratio(4, 1)).max(ratio(1, 4))
}

/// A rational in `[-2, 2]` with denominator at most 4.
pub fn signed_rational(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(-8..=8), rng.gen_range(1..=4))
}

pub fn complex_rational(rng: &mut impl Rng) -> Cq {
    cq(signed_rational(rng), signed_rational(rng))
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// An `n × n` non-negative matrix whose entries are zero with probability
/// `1 − density`.
pub fn matrix(rng: &mut impl Rng, n: usize, density: f64) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(density) { positive_rational(rng) } else { ratio(0, 1) })
                .collect()
        })
        .collect()
}

pub fn matrix_system(rng: &mut impl Rng, n: usize, density: f64) -> FiniteSystem {
    FiniteSystem::from_matrix(labels(n), &matrix(rng, n, density)).expect("random matrix is valid")
}

/// A finite system with `1..=max_points` points and `1..=max_d` branches,
/// each on a random non-empty domain with a random map and positive weights.
pub fn finite_system(rng: &mut impl Rng, max_points: usize, max_d: usize) -> FiniteSystem {
    let n = rng.gen_range(1..=max_points);
    let d = rng.gen_range(1..=max_d);
    let branches = (0..d)
        .map(|_| {
            let mut entries = BTreeMap::new();
            for x in 0..n {
                if rng.gen_bool(0.7) {
                    entries.insert(x, (rng.gen_range(0..n), positive_rational(rng)));
                }
            }
            if entries.is_empty() {
                entries.insert(rng.gen_range(0..n), (rng.gen_range(0..n), positive_rational(rng)));
            }
            FiniteBranch { entries }
        })
        .collect();
    FiniteSystem::new(labels(n), branches).expect("random system is valid")
}

pub fn permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// The system transported along `perm` (point `x` becomes `perm[x]`), with
/// every weight replaced by a fresh random one.
pub fn relabel_reweight(rng: &mut impl Rng, sys: &FiniteSystem, perm: &[usize]) -> FiniteSystem {
    let branches = sys
        .branches
        .iter()
        .map(|b| FiniteBranch {
            entries: b.entries.iter().map(|(&x, (r, _))| (perm[x], (perm[*r], positive_rational(rng)))).collect(),
        })
        .collect();
    FiniteSystem::new(sys.labels.clone(), branches).expect("relabeling keeps validity")
}

/// A Fourier element with random exact coefficients in up to three degrees.
pub fn element(rng: &mut impl Rng, space: &FockSpace) -> FourierElement {
    let mut t = FourierElement::zero(space.level);
    for n in 0..=space.level {
        if space.spaces[n].paths.is_empty() || (n > 0 && !rng.gen_bool(0.5)) {
            continue;
        }
        t.coeffs.insert(n, (0..space.spaces[n].paths.len()).map(|_| complex_rational(rng)).collect());
    }
    t
}

/// A disc automorphism with center of modulus at most `max_w`.
pub fn mobius(rng: &mut impl Rng, max_w: f64) -> Mobius {
    let w = Complex64::from_polar(rng.gen_range(0.0..=max_w), rng.gen_range(0.0..std::f64::consts::TAU));
    Mobius::new(rng.gen_range(0.0..std::f64::consts::TAU), w).expect("center inside the disc")
}

fn unit() -> Vec<Interval> {
    vec![Interval { lo: ratio(0, 1), hi: ratio(1, 1) }]
}

fn quarter(rng: &mut impl Rng) -> Rational {
    ratio(rng.gen_range(0..=4), 4)
}

/// A system on `[0, 1]` with one or two branches: affine maps or maps
/// with a knot at 1/2, values on the quarter grid, constant weights.
pub fn interval_system(rng: &mut impl Rng) -> IntervalSystem {
    let comps = unit();
    let d = rng.gen_range(1..=2);
    let branches = (0..d)
        .map(|_| {
            let mut knots = vec![(ratio(0, 1), quarter(rng))];
            if rng.gen_bool(0.4) {
                knots.push((ratio(1, 2), quarter(rng)));
            }
            knots.push((ratio(1, 1), quarter(rng)));
            IntervalBranch {
                map: PlFunc::new(&comps, BTreeMap::from([(0, knots)])).expect("valid knots"),
                weight: PlFunc::constant(&comps, &ClopenSubset([0].into()), positive_rational(rng)),
            }
        })
        .collect();
    IntervalSystem::new(comps, branches).expect("maps stay in [0, 1]")
}

/// `x ↦ 1 − y∘(1 − x)` applied to every branch map, with fresh weights:
/// a system graph conjugate to the input through `x ↦ 1 − x`.
pub fn reflect_reweight(rng: &mut impl Rng, sys: &IntervalSystem) -> IntervalSystem {
    let comps = unit();
    let one = ratio(1, 1);
    let branches = sys
        .branches
        .iter()
        .map(|b| {
            let mut knots: Vec<(Rational, Rational)> =
                b.map.knots(0).iter().map(|(x, y)| (&one - x, &one - y)).collect();
            knots.reverse();
            IntervalBranch {
                map: PlFunc::new(&comps, BTreeMap::from([(0, knots)])).expect("reflected knots"),
                weight: PlFunc::constant(&comps, &ClopenSubset([0].into()), positive_rational(rng)),
            }
        })
        .collect();
    IntervalSystem::new(comps, branches).expect("reflection stays in [0, 1]")
}
