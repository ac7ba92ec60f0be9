//! Finite spaces: digraph isomorphism search and exact cycle analysis of
//! path products.

use std::collections::BTreeSet;

use num_traits::One;

use super::{Certificate, Gamma, Gap, PathWitness, Pt, Side, Verdict, Witness};
use crate::cycles::{max_product, pump_exponent, Arc, ProductBound};
use crate::error::{Error, Result};
use crate::rational::{Rational, Show};
use crate::wps::FiniteSystem;

type Edges = BTreeSet<(usize, usize)>;

fn edges(sys: &FiniteSystem) -> Edges {
    sys.graph().into_keys().collect()
}

fn degrees(n: usize, e: &Edges) -> Vec<(usize, usize)> {
    let mut d = vec![(0, 0); n];
    for &(r, s) in e {
        d[s].0 += 1;
        d[r].1 += 1;
    }
    d
}

/// A bijection `γ` with `(r, s) ∈ Gr(a) ⟺ (γ(r), γ(s)) ∈ Gr(b)`, found by
/// backtracking over vertices ordered by (out-degree, in-degree, label).
pub fn find_graph_conjugacy_finite(a: &FiniteSystem, b: &FiniteSystem) -> Result<Option<Vec<usize>>> {
    let n = a.len();
    if b.len() != n {
        return Ok(None);
    }
    let (ea, eb) = (edges(a), edges(b));
    if ea.len() != eb.len() {
        return Ok(None);
    }
    let (da, db) = (degrees(n, &ea), degrees(n, &eb));
    let mut sa = da.clone();
    let mut sb = db.clone();
    sa.sort();
    sb.sort();
    if sa != sb {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| (da[x], &a.labels[x]).cmp(&(da[y], &a.labels[y])));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if assign(0, &order, &ea, &eb, &da, &db, &mut map, &mut used) {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

#[allow(clippy::too_many_arguments)]
fn assign(
    k: usize,
    order: &[usize],
    ea: &Edges,
    eb: &Edges,
    da: &[(usize, usize)],
    db: &[(usize, usize)],
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if k == order.len() {
        return true;
    }
    let v = order[k];
    for cand in 0..map.len() {
        if used[cand] || db[cand] != da[v] {
            continue;
        }
        map[v] = cand;
        let consistent = order[..=k].iter().all(|&u| {
            let (mu, mv) = (map[u], cand);
            ea.contains(&(u, v)) == eb.contains(&(mu, mv)) && ea.contains(&(v, u)) == eb.contains(&(mv, mu))
        });
        if consistent {
            used[cand] = true;
            if assign(k + 1, order, ea, eb, da, db, map, used) {
                return true;
            }
            used[cand] = false;
        }
        map[v] = usize::MAX;
    }
    false
}

/// Exhaustive search over all `n!` bijections; the reference oracle for
/// [`find_graph_conjugacy_finite`].
pub fn exhaustive_isomorphism(a: &FiniteSystem, b: &FiniteSystem) -> Option<Vec<usize>> {
    let n = a.len();
    if b.len() != n {
        return None;
    }
    let (ea, eb) = (edges(a), edges(b));
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let image: Edges = ea.iter().map(|&(r, s)| (perm[r], perm[s])).collect();
        if image == eb {
            return Some(perm);
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

pub(super) fn non_isomorphism_reason(a: &FiniteSystem, b: &FiniteSystem) -> String {
    if a.len() != b.len() {
        return format!("{} points vs {} points", a.len(), b.len());
    }
    let (ea, eb) = (edges(a), edges(b));
    if ea.len() != eb.len() {
        return format!("{} edges vs {} edges", ea.len(), eb.len());
    }
    let mut da = degrees(a.len(), &ea);
    let mut db = degrees(b.len(), &eb);
    da.sort();
    db.sort();
    if da != db {
        return "(out, in)-degree sequences differ".into();
    }
    "no bijection preserves the edges (exhaustive backtracking)".into()
}

/// Weighted-orbit conjugacy on finite spaces: holds with `C = 1` and
/// `H = w/u^γ` exactly when the graphs are isomorphic.
pub fn decide_weighted_orbit_finite(a: &FiniteSystem, b: &FiniteSystem) -> Result<Verdict> {
    let Some(t) = find_graph_conjugacy_finite(a, b)? else {
        return Ok(Verdict::Fails {
            detail: "the graphs are not isomorphic".into(),
            witness: Witness::NoIsomorphism { reason: non_isomorphism_reason(a, b) },
        });
    };
    let gamma = Gamma::Bijection(t);
    let bg = match super::conjugate_system(
        &crate::wps::Wps::Finite(b.clone()),
        &gamma,
        &crate::spaces::Space::Finite { points: a.labels.clone() },
    )? {
        crate::wps::Wps::Finite(s) => s,
        _ => unreachable!(),
    };
    let gb = bg.graph();
    let h = a.graph().into_iter().map(|(e, info)| (e, info.weight / &gb[&e].weight)).collect();
    let cert = Certificate { gamma, h: Gap::Edges(h), c: Rational::one() };
    verify_finite(a, &bg, &cert)
}

/// Exact all-lengths verification via cycle analysis on the graph with
/// labels `g = (u^γ/w)·H`.
pub(super) fn verify_finite(a: &FiniteSystem, bg: &FiniteSystem, cert: &Certificate) -> Result<Verdict> {
    let Gap::Edges(h) = &cert.h else {
        return Err(Error::Certificate("finite spaces need an edge-table H".into()));
    };
    let ga = a.graph();
    let gb = bg.graph();
    for (e, v) in h {
        if !ga.contains_key(e) {
            return Err(Error::Certificate(format!("H is given on ({}, {}), which is not an edge", a.label(e.0), a.label(e.1))));
        }
        if *v <= Rational::from_integer(0.into()) {
            return Err(Error::Certificate("H must be strictly positive".into()));
        }
    }
    let mut arcs = Vec::with_capacity(ga.len());
    let mut branch_of = Vec::with_capacity(ga.len());
    for (e, info) in &ga {
        let hv = h.get(e).ok_or_else(|| {
            Error::Certificate(format!("H is missing on the edge ({}, {})", a.label(e.0), a.label(e.1)))
        })?;
        let g = &gb[e].weight / &info.weight * hv;
        arcs.push(Arc { from: e.1, to: e.0, label: g });
        branch_of.push(*info.indices.iter().next().unwrap());
    }
    let inv: Vec<Arc> =
        arcs.iter().map(|x| Arc { from: x.from, to: x.to, label: x.label.recip() }).collect();
    let n = a.len();
    let upper = max_product(n, &arcs);
    let lower = max_product(n, &inv);
    for (side, bound) in [(Side::Upper, &upper), (Side::Lower, &lower)] {
        let witness = match bound {
            ProductBound::Pumping { cycle, product } => {
                let k = pump_exponent(product, &cert.c);
                let steps: Vec<usize> = cycle.iter().cycle().take(cycle.len() * k).copied().collect();
                Some((steps, "a cycle pumps the product"))
            }
            ProductBound::Bounded { sup, path } if *sup > cert.c => Some((path.clone(), "a path exceeds the bound")),
            _ => None,
        };
        if let Some((arc_path, why)) = witness {
            let source = Pt::Atom(arcs[arc_path[0]].from);
            let product: Rational = arc_path.iter().map(|&k| arcs[k].label.clone()).product();
            let steps = arc_path.iter().map(|&k| branch_of[k]).collect::<Vec<_>>();
            let verts: Vec<String> = std::iter::once(arcs[arc_path[0]].from)
                .chain(arc_path.iter().map(|&k| arcs[k].to))
                .map(|v| a.label(v).to_string())
                .collect();
            return Ok(Verdict::Fails {
                detail: format!(
                    "{why}: product {} along {} is outside [1/{c}, {c}]",
                    Show(&product),
                    verts.join(" → "),
                    c = Show(&cert.c)
                ),
                witness: Witness::Path(PathWitness { source, steps, product, bound: cert.c.clone(), side }),
            });
        }
    }
    let (ProductBound::Bounded { sup, .. }, ProductBound::Bounded { sup: inv_sup, .. }) = (upper, lower) else {
        unreachable!()
    };
    Ok(Verdict::Holds {
        detail: format!(
            "all path products lie in [{}, {}] ⊆ [1/{c}, {c}] (exact cycle analysis)",
            Show(&inv_sup.recip()),
            Show(&sup),
            c = Show(&cert.c)
        ),
        certificate: Some(cert.clone()),
    })
}
