//! Exact max-product path analysis on digraphs with positive rational arc
//! labels: Bellman–Ford in multiplicative form, with cycle extraction when
//! some cycle has product greater than one.

use num_traits::{One, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub label: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProductBound {
    /// Every cycle has product at most one; `sup` is the largest product of
    /// any path (the empty path counts, so `sup >= 1`), realized by `path`.
    Bounded { sup: Rational, path: Vec<usize> },
    /// A cycle (arc indices, in traversal order) with product `> 1`.
    Pumping { cycle: Vec<usize>, product: Rational },
}

/// Supremum over all finite paths of the product of arc labels.
pub fn max_product(n: usize, arcs: &[Arc]) -> ProductBound {
    let mut best = vec![Rational::one(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut round = 0usize;
    loop {
        let mut changed = false;
        for (k, a) in arcs.iter().enumerate() {
            let cand = &best[a.from] * &a.label;
            if cand > best[a.to] {
                best[a.to] = cand;
                pred[a.to] = Some(k);
                changed = true;
            }
        }
        round += 1;
        if !changed {
            break;
        }
        if round >= n {
            if let Some(cycle) = pred_cycle(n, arcs, &pred) {
                let product = cycle.iter().map(|&k| arcs[k].label.clone()).product();
                return ProductBound::Pumping { cycle, product };
            }
        }
    }
    let (argmax, sup) = best
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.cmp(y.1))
        .map(|(v, s)| (v, s.clone()))
        .unwrap_or((0, Rational::one()));
    let mut path = Vec::new();
    let mut v = argmax;
    while let Some(k) = pred.get(v).copied().flatten() {
        path.push(k);
        v = arcs[k].from;
        if path.len() > n {
            break;
        }
    }
    path.reverse();
    ProductBound::Bounded { sup, path }
}

/// A cycle in the predecessor graph, if any, as arc indices in order.
fn pred_cycle(n: usize, arcs: &[Arc], pred: &[Option<usize>]) -> Option<Vec<usize>> {
    // 0 = unvisited, 1 = on current walk, 2 = done
    let mut state = vec![0u8; n];
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut walk: Vec<usize> = Vec::new();
        let mut v = start;
        loop {
            if state[v] == 1 {
                let pos = walk.iter().position(|&w| w == v).unwrap();
                let mut cycle: Vec<usize> = walk[pos..].iter().map(|&w| pred[w].unwrap()).collect();
                cycle.reverse();
                return Some(cycle);
            }
            if state[v] == 2 {
                break;
            }
            state[v] = 1;
            walk.push(v);
            match pred[v] {
                Some(k) => v = arcs[k].from,
                None => break,
            }
        }
        for w in walk {
            state[w] = 2;
        }
    }
    None
}

/// `max` over paths with exactly `len` arcs of the label product, per end
/// vertex; zero where no such path ends.
pub fn max_product_exact_length(n: usize, arcs: &[Arc], len: usize) -> Vec<Rational> {
    let mut cur = vec![Rational::one(); n];
    for _ in 0..len {
        let mut next = vec![Rational::zero(); n];
        for a in arcs {
            let cand = &cur[a.from] * &a.label;
            if cand > next[a.to] {
                next[a.to] = cand;
            }
        }
        cur = next;
    }
    cur
}

/// Smallest `k >= 1` with `p^k > bound`, for `p > 1`.
pub fn pump_exponent(p: &Rational, bound: &Rational) -> usize {
    assert!(*p > Rational::one());
    let mut acc = p.clone();
    let mut k = 1;
    while acc <= *bound {
        acc *= p;
        k += 1;
    }
    k
}
