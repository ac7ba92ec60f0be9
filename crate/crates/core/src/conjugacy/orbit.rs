//! Exact verification of weighted-orbit certificates on interval spaces.
//!
//! The graph is cut into cells (breakpoints and the open gaps between
//! them). Each cell becomes a node of a finite abstract graph; an arc joins
//! a cell to every cell met by the image of one of its graph pieces and
//! carries the exact range `[lo, hi]` of the factor `g = (u^γ/w)·H` over
//! the closed cell. Every concrete path follows an abstract path whose
//! label products bound its own from both sides, so a bounded abstraction
//! proves the certificate. Abstract cycles that pump are replayed on
//! concrete periodic orbits; when no concrete orbit exists the cells
//! involved are split and the analysis repeats.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{validate_branch_gap, Certificate, Gap, PathWitness, Pt, Side, Verdict, Witness};
use crate::cycles::{max_product, pump_exponent, Arc, ProductBound};
use crate::error::{Error, Result};
use crate::rational::{int, max_q, min_q, ratio, RatFn, Rational, Show};
use crate::spaces::{component_of, Affine, PlFunc};
use crate::wps::{Cell, CellKind, IntervalSystem};

/// Upper bound on cells before refinement gives up.
const MAX_CELLS: usize = 20_000;

struct AbsEdge {
    cell: usize,
    map: Affine,
    branch: usize,
    lo: Rational,
    hi: Rational,
    targets: Vec<usize>,
}

struct Abstraction {
    breaks: Vec<Vec<Rational>>,
    base: Vec<usize>,
    cells: Vec<Cell>,
    edges: Vec<AbsEdge>,
}

impl Abstraction {
    fn build(a: &IntervalSystem, bg: &IntervalSystem, hs: &[PlFunc], breaks: Vec<Vec<Rational>>) -> Self {
        let mut base = Vec::with_capacity(breaks.len());
        let mut cells = Vec::new();
        for (c, b) in breaks.iter().enumerate() {
            base.push(cells.len());
            cells.extend(IntervalSystem::cells_of(c, b));
        }
        let mut abs = Abstraction { breaks, base, cells, edges: Vec::new() };
        for id in 0..abs.cells.len() {
            let cell = abs.cells[id].clone();
            let c = cell.comp;
            match &cell.kind {
                CellKind::Point(p) => {
                    let ue = bg.edges_from(p).expect("point of the space");
                    for e in a.edges_from(p).expect("point of the space") {
                        let u = &ue.iter().find(|f| f.range == e.range).expect("equal graphs").weight;
                        let i = *e.indices.iter().next().unwrap();
                        let g = u / &e.weight * hs[i].eval_in(c, p);
                        let targets = vec![abs.cell_at(&e.range)];
                        abs.edges.push(AbsEdge {
                            cell: id,
                            map: Affine::constant(e.range),
                            branch: i,
                            lo: g.clone(),
                            hi: g,
                            targets,
                        });
                    }
                }
                CellKind::Open(p, q) => {
                    let ul = bg.lines_on(c, p, q);
                    for l in a.lines_on(c, p, q) {
                        let u = &ul.iter().find(|m| m.map == l.map).expect("equal graphs").weight;
                        let i = *l.indices.iter().next().unwrap();
                        let h = hs[i].line_on(c, p, q);
                        let g = RatFn { num: u.poly().mul(&h.poly()), den: l.weight.poly() };
                        let range = g.range_on(p, q);
                        let targets = abs.image_cells(&l.map, p, q);
                        abs.edges.push(AbsEdge { cell: id, map: l.map, branch: i, lo: range.lo, hi: range.hi, targets });
                    }
                }
            }
        }
        abs
    }

    fn cell_at(&self, x: &Rational) -> usize {
        let c = self
            .breaks
            .iter()
            .position(|b| b.first().is_some_and(|f| f <= x) && b.last().is_some_and(|l| x <= l))
            .expect("point of the space");
        let b = &self.breaks[c];
        match b.binary_search(x) {
            Ok(k) => self.base[c] + 2 * k,
            Err(k) => self.base[c] + 2 * (k - 1) + 1,
        }
    }

    /// Cells met by the image of the open cell `(p, q)` under `map`.
    fn image_cells(&self, map: &Affine, p: &Rational, q: &Rational) -> Vec<usize> {
        let (y0, y1) = (map.eval(p), map.eval(q));
        if y0 == y1 {
            return vec![self.cell_at(&y0)];
        }
        let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
        let mut start = self.cell_at(&lo);
        let mut end = self.cell_at(&hi);
        if self.cells[start].is_point() {
            start += 1;
        }
        if self.cells[end].is_point() {
            end -= 1;
        }
        (start..=end).collect()
    }

    fn arcs(&self, side: Side, points_only: bool) -> (Vec<Arc>, Vec<usize>) {
        let mut arcs = Vec::new();
        let mut owner = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if points_only && !self.cells[e.cell].is_point() {
                continue;
            }
            let label = match side {
                Side::Upper => e.hi.clone(),
                Side::Lower => e.lo.recip(),
            };
            for &t in &e.targets {
                if points_only && !self.cells[t].is_point() {
                    continue;
                }
                arcs.push(Arc { from: e.cell, to: t, label: label.clone() });
                owner.push(k);
            }
        }
        (arcs, owner)
    }
}

/// Closed/open interval used for the feasible starting points of a path.
#[derive(Debug, Clone)]
struct Span {
    lo: Rational,
    hi: Rational,
    lo_open: bool,
    hi_open: bool,
}

impl Span {
    fn of(cell: &Cell) -> Span {
        match &cell.kind {
            CellKind::Point(p) => Span { lo: p.clone(), hi: p.clone(), lo_open: false, hi_open: false },
            CellKind::Open(a, b) => Span { lo: a.clone(), hi: b.clone(), lo_open: true, hi_open: true },
        }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_open { x > &self.lo } else { x >= &self.lo };
        let below = if self.hi_open { x < &self.hi } else { x <= &self.hi };
        above && below
    }

    fn intersect(&self, o: &Span) -> Span {
        let (lo, lo_open) = match self.lo.cmp(&o.lo) {
            std::cmp::Ordering::Less => (o.lo.clone(), o.lo_open),
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_open),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_open || o.lo_open),
        };
        let (hi, hi_open) = match self.hi.cmp(&o.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_open),
            std::cmp::Ordering::Greater => (o.hi.clone(), o.hi_open),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_open || o.hi_open),
        };
        Span { lo, hi, lo_open, hi_open }
    }

    /// Preimage under a non-constant line.
    fn preimage(&self, f: &Affine) -> Span {
        let a = f.solve(&self.lo).unwrap();
        let b = f.solve(&self.hi).unwrap();
        if f.slope > Rational::zero() {
            Span { lo: a, hi: b, lo_open: self.lo_open, hi_open: self.hi_open }
        } else {
            Span { lo: b, hi: a, lo_open: self.hi_open, hi_open: self.lo_open }
        }
    }

    fn samples(&self) -> Vec<Rational> {
        if self.lo == self.hi {
            return vec![self.lo.clone()];
        }
        let w = &self.hi - &self.lo;
        [ratio(1, 2), ratio(1, 4), ratio(3, 4), ratio(1, 16), ratio(15, 16), ratio(1, 256), ratio(255, 256)]
            .into_iter()
            .map(|t| &self.lo + &w * t)
            .collect()
    }
}

/// Exact factor of the edge reached from `x` by branch `i`.
fn concrete_factor(
    a: &IntervalSystem,
    bg: &IntervalSystem,
    hs: &[PlFunc],
    x: &Rational,
    i: usize,
) -> Result<(Rational, Rational)> {
    let r = a.branches[i].map.evaluate(x)?;
    let g = bg.edge_weight(&r, x)? / a.edge_weight(&r, x)? * hs[i].evaluate(x)?;
    Ok((r, g))
}

enum Probe {
    Witness(Box<PathWitness>, String),
    Spurious(BTreeSet<usize>),
}

struct Verifier<'a> {
    a: &'a IntervalSystem,
    bg: &'a IntervalSystem,
    hs: &'a [PlFunc],
    c: &'a Rational,
}

impl Verifier<'_> {
    fn bad(&self, side: Side, product: &Rational) -> bool {
        match side {
            Side::Upper => product > &Rational::one(),
            Side::Lower => product < &Rational::one(),
        }
    }

    fn outside(&self, side: Side, product: &Rational) -> bool {
        match side {
            Side::Upper => product > self.c,
            Side::Lower => product * self.c < Rational::one(),
        }
    }

    /// Starting points whose orbit follows the abstract edge sequence.
    fn feasible(&self, abs: &Abstraction, seq: &[(usize, usize)]) -> Span {
        let last = seq.last().map(|&(_, t)| t).unwrap();
        let mut span = Span::of(&abs.cells[last]);
        for &(e, _) in seq.iter().rev() {
            let edge = &abs.edges[e];
            let cell = Span::of(&abs.cells[edge.cell]);
            span = if edge.map.slope.is_zero() {
                if span.contains(&edge.map.intercept) {
                    cell
                } else {
                    return Span { lo: int(1), hi: int(0), lo_open: false, hi_open: false };
                }
            } else {
                span.preimage(&edge.map).intersect(&cell)
            };
            if span.is_empty() {
                return span;
            }
        }
        span
    }

    /// Orbit of `x0` along the branches, with each factor.
    fn run(&self, x0: &Rational, branches: &[usize]) -> Result<(Vec<Rational>, Rational)> {
        let mut xs = vec![x0.clone()];
        let mut product = Rational::one();
        for &i in branches {
            let (r, g) = concrete_factor(self.a, self.bg, self.hs, xs.last().unwrap(), i)?;
            product *= g;
            xs.push(r);
        }
        Ok((xs, product))
    }

    fn probe_cycle(&self, abs: &Abstraction, seq: &[(usize, usize)], side: Side) -> Result<Probe> {
        let cells: BTreeSet<usize> = seq.iter().map(|&(e, _)| abs.edges[e].cell).collect();
        let span = self.feasible(abs, seq);
        if span.is_empty() {
            return Ok(Probe::Spurious(cells));
        }
        let f = seq.iter().fold(Affine::identity(), |acc, &(e, _)| abs.edges[e].map.compose(&acc));
        let starts: Vec<Rational> = if f == Affine::identity() {
            span.samples()
        } else {
            f.fixed_point().filter(|x| span.contains(x)).into_iter().collect()
        };
        let branches: Vec<usize> = seq.iter().map(|&(e, _)| abs.edges[e].branch).collect();
        for x0 in starts {
            let (xs, product) = self.run(&x0, &branches)?;
            if xs.last() != Some(&x0) || !self.bad(side, &product) {
                continue;
            }
            let m = branches.len();
            let d = (1..=m).find(|d| m.is_multiple_of(*d) && (0..m).all(|k| xs[k] == xs[(k + d) % m])).unwrap();
            let (_, p) = self.run(&x0, &branches[..d])?;
            let base = match side {
                Side::Upper => p.clone(),
                Side::Lower => p.recip(),
            };
            let k = pump_exponent(&base, self.c);
            let steps: Vec<usize> = branches[..d].iter().cycle().take(d * k).copied().collect();
            let (_, product) = self.run(&x0, &steps)?;
            let orbit: Vec<String> = xs[..=d].iter().map(|x| Show(x).to_string()).collect();
            let detail = format!(
                "periodic orbit {} has factor product {} per period; {k} repetitions give {}, outside [1/{c}, {c}]",
                orbit.join(" → "),
                Show(&p),
                Show(&product),
                c = Show(self.c)
            );
            return Ok(Probe::Witness(
                Box::new(PathWitness { source: Pt::Real(x0), steps, product, bound: self.c.clone(), side }),
                detail,
            ));
        }
        Ok(Probe::Spurious(cells))
    }

    fn probe_path(&self, abs: &Abstraction, seq: &[(usize, usize)], side: Side) -> Result<Probe> {
        let cells: BTreeSet<usize> = seq.iter().map(|&(e, _)| abs.edges[e].cell).collect();
        let span = self.feasible(abs, seq);
        if span.is_empty() {
            return Ok(Probe::Spurious(cells));
        }
        let branches: Vec<usize> = seq.iter().map(|&(e, _)| abs.edges[e].branch).collect();
        for x0 in span.samples() {
            let (_, product) = self.run(&x0, &branches)?;
            if self.outside(side, &product) {
                let detail = format!(
                    "a path of length {} from {} has factor product {}, outside [1/{c}, {c}]",
                    branches.len(),
                    Show(&x0),
                    Show(&product),
                    c = Show(self.c)
                );
                return Ok(Probe::Witness(
                    Box::new(PathWitness { source: Pt::Real(x0), steps: branches, product, bound: self.c.clone(), side }),
                    detail,
                ));
            }
        }
        Ok(Probe::Spurious(cells))
    }
}

enum Round {
    Holds { lo: Rational, hi: Rational },
    Fails(Box<PathWitness>, String),
    Refine(BTreeSet<usize>),
}

fn analyse(v: &Verifier<'_>, abs: &Abstraction) -> Result<Round> {
    let n = abs.cells.len();
    // cycles through breakpoints only are concrete; look there first
    for side in [Side::Upper, Side::Lower] {
        let (arcs, owner) = abs.arcs(side, true);
        if let ProductBound::Pumping { cycle, .. } = max_product(n, &arcs) {
            let seq: Vec<(usize, usize)> = cycle.iter().map(|&k| (owner[k], arcs[k].to)).collect();
            if let Probe::Witness(w, d) = v.probe_cycle(abs, &seq, side)? {
                return Ok(Round::Fails(w, d));
            }
        }
    }
    let mut refine = BTreeSet::new();
    let mut bounds = Vec::new();
    for side in [Side::Upper, Side::Lower] {
        let (arcs, owner) = abs.arcs(side, false);
        match max_product(n, &arcs) {
            ProductBound::Pumping { cycle, .. } => {
                let seq: Vec<(usize, usize)> = cycle.iter().map(|&k| (owner[k], arcs[k].to)).collect();
                match v.probe_cycle(abs, &seq, side)? {
                    Probe::Witness(w, d) => return Ok(Round::Fails(w, d)),
                    Probe::Spurious(cells) => refine.extend(cells),
                }
            }
            ProductBound::Bounded { sup, path } => {
                if v.outside(side, &abs_product(side, &sup)) {
                    let seq: Vec<(usize, usize)> = path.iter().map(|&k| (owner[k], arcs[k].to)).collect();
                    match v.probe_path(abs, &seq, side)? {
                        Probe::Witness(w, d) => return Ok(Round::Fails(w, d)),
                        Probe::Spurious(cells) => refine.extend(cells),
                    }
                }
                bounds.push(abs_product(side, &sup));
            }
        }
    }
    if refine.is_empty() {
        Ok(Round::Holds { hi: bounds[0].clone(), lo: bounds[1].clone() })
    } else {
        Ok(Round::Refine(refine))
    }
}

/// The product a search sup stands for on each side.
fn abs_product(side: Side, sup: &Rational) -> Rational {
    match side {
        Side::Upper => sup.clone(),
        Side::Lower => sup.recip(),
    }
}

pub(super) fn verify_interval(
    a: &IntervalSystem,
    bg: &IntervalSystem,
    cert: &Certificate,
    depth: usize,
) -> Result<Verdict> {
    let Gap::Branches(hs) = &cert.h else {
        return Err(Error::Certificate("interval spaces need per-branch H functions".into()));
    };
    validate_branch_gap(a, hs)?;
    let mut breaks: Vec<Vec<Rational>> = (0..a.components.len())
        .map(|c| {
            let extra: Vec<Rational> = hs.iter().flat_map(|h| h.knots(c).iter().map(|k| k.0.clone())).collect();
            super::joint_breaks(a, bg, c, &extra)
        })
        .collect();
    let v = Verifier { a, bg, hs, c: &cert.c };
    for round in 0..=depth {
        let abs = Abstraction::build(a, bg, hs, breaks);
        match analyse(&v, &abs)? {
            Round::Holds { lo, hi } => {
                return Ok(Verdict::Holds {
                    detail: format!(
                        "all path products lie in [{}, {}] ⊆ [1/{c}, {c}] ({} cells, {round} refinement round(s))",
                        Show(&lo),
                        Show(&hi),
                        abs.cells.len(),
                        c = Show(&cert.c)
                    ),
                    certificate: Some(cert.clone()),
                })
            }
            Round::Fails(w, detail) => return Ok(Verdict::Fails { detail, witness: Witness::Path(*w) }),
            Round::Refine(cells) => {
                breaks = refine(&abs, &cells);
                if breaks.iter().map(|b| 2 * b.len()).sum::<usize>() > MAX_CELLS {
                    return Ok(Verdict::Inconclusive {
                        reason: format!("cell budget of {MAX_CELLS} exhausted before the abstraction converged"),
                        depth: round,
                    });
                }
            }
        }
    }
    Ok(Verdict::Inconclusive {
        reason: "no violation found, but the abstraction did not converge within the refinement depth".into(),
        depth,
    })
}

/// Splits the given open cells at their midpoints and at every preimage of
/// a breakpoint under one of their graph pieces.
fn refine(abs: &Abstraction, cells: &BTreeSet<usize>) -> Vec<Vec<Rational>> {
    let mut extra: BTreeMap<usize, Vec<Rational>> = BTreeMap::new();
    for &id in cells {
        let cell = &abs.cells[id];
        let CellKind::Open(p, q) = &cell.kind else { continue };
        let add = extra.entry(cell.comp).or_default();
        add.push((p + q) / int(2));
        for e in abs.edges.iter().filter(|e| e.cell == id && !e.map.slope.is_zero()) {
            let (y0, y1) = (e.map.eval(p), e.map.eval(q));
            let (lo, hi) = (min_q(&y0, &y1), max_q(&y0, &y1));
            let Some(tc) = component_of(&comp_hulls(abs), &lo) else { continue };
            for b in abs.breaks[tc].iter().filter(|b| **b > lo && **b < hi) {
                add.push(e.map.solve(b).unwrap());
            }
        }
    }
    abs.breaks
        .iter()
        .enumerate()
        .map(|(c, b)| {
            let mut v = b.clone();
            v.extend(extra.remove(&c).unwrap_or_default());
            v.sort();
            v.dedup();
            v
        })
        .collect()
}

fn comp_hulls(abs: &Abstraction) -> Vec<crate::spaces::Interval> {
    abs.breaks
        .iter()
        .map(|b| crate::spaces::Interval { lo: b[0].clone(), hi: b[b.len() - 1].clone() })
        .collect()
}
