//! Heuristic candidate homeomorphisms between interval spaces.

use std::collections::BTreeMap;

use super::Gamma;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::spaces::{Interval, PlFunc};
use crate::wps::{IntervalSystem, Wps};

const MAX_CANDIDATES: usize = 64;

/// Special points of a component: endpoints, branching points and
/// fixed-point endpoints.
fn special_points(sys: &IntervalSystem, comp: usize) -> Vec<Rational> {
    let iv = &sys.components[comp];
    let mut xs = vec![iv.lo.clone(), iv.hi.clone()];
    xs.extend(sys.branching_points().endpoints());
    xs.extend(sys.fixed_points().endpoints());
    xs.retain(|x| iv.contains(x));
    xs.sort();
    xs.dedup();
    xs
}

/// Per-component PL maps `from → to`, increasing or decreasing, that send
/// the listed points onto each other in order.
fn matchings(from: &Interval, to: &Interval, sf: &[Rational], st: &[Rational]) -> Vec<Vec<(Rational, Rational)>> {
    if from.is_degenerate() || to.is_degenerate() {
        return if from.is_degenerate() && to.is_degenerate() {
            vec![vec![(from.lo.clone(), to.lo.clone())]]
        } else {
            Vec::new()
        };
    }
    let linear_up = vec![(from.lo.clone(), to.lo.clone()), (from.hi.clone(), to.hi.clone())];
    let linear_down = vec![(from.lo.clone(), to.hi.clone()), (from.hi.clone(), to.lo.clone())];
    let mut out = vec![linear_up, linear_down];
    if sf.len() == st.len() && sf.len() > 2 {
        out.push(sf.iter().cloned().zip(st.iter().cloned()).collect());
        out.push(sf.iter().cloned().zip(st.iter().rev().cloned()).collect());
    }
    let mut seen = Vec::new();
    out.retain(|k| {
        let f = simplify(k);
        if seen.contains(&f) {
            false
        } else {
            seen.push(f);
            true
        }
    });
    out
}

fn simplify(k: &[(Rational, Rational)]) -> Vec<(Rational, Rational)> {
    let comps = vec![Interval { lo: k[0].0.clone(), hi: k[k.len() - 1].0.clone() }];
    PlFunc::new(&comps, BTreeMap::from([(0, k.to_vec())])).map(|f| f.knots(0).to_vec()).unwrap_or_default()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Candidate homeomorphisms `X → Y`: every bijection of components, and on
/// each component the increasing and decreasing affine maps plus the PL
/// maps matching sorted special points (endpoints, branching points,
/// fixed-point endpoints) when their counts agree. The identity pairing comes
/// first; at most 64 candidates are returned.
pub fn candidate_homeomorphisms(a: &Wps, b: &Wps) -> Result<Vec<Gamma>> {
    let (Wps::Interval(x), Wps::Interval(y)) = (a, b) else {
        return Err(Error::Precondition("candidate homeomorphisms are for interval spaces".into()));
    };
    let n = x.components.len();
    if n != y.components.len() || n > 6 {
        return Ok(Vec::new());
    }
    let sx: Vec<Vec<Rational>> = (0..n).map(|c| special_points(x, c)).collect();
    let sy: Vec<Vec<Rational>> = (0..n).map(|c| special_points(y, c)).collect();
    let mut out = Vec::new();
    for perm in permutations(n) {
        let options: Vec<Vec<Vec<(Rational, Rational)>>> = (0..n)
            .map(|c| matchings(&x.components[c], &y.components[perm[c]], &sx[c], &sy[perm[c]]))
            .collect();
        if options.iter().any(Vec::is_empty) {
            continue;
        }
        let mut choice = vec![0usize; n];
        loop {
            let pieces = (0..n).map(|c| (c, options[c][choice[c]].clone())).collect();
            if let Ok(g) = PlFunc::new(&x.components, pieces) {
                out.push(Gamma::Pl(g));
                if out.len() >= MAX_CANDIDATES {
                    return Ok(out);
                }
            }
            let mut k = 0;
            while k < n {
                choice[k] += 1;
                if choice[k] < options[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
    Ok(out)
}
