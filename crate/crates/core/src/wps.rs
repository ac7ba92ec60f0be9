//! Weighted partial systems: a tuple of continuous maps `σ_i : X_i → X` on
//! clopen domains, each with a strictly positive weight `w_i`.
//!
//! Everything derived from a system (its multiplicity-free graph, edge
//! weights, coinciding sets, branching structure, fixed points) is computed
//! on demand from the branch data. Multiplicity is never stored on an edge;
//! it is recovered through [`FiniteSystem::index_set`] /
//! [`IntervalSystem::index_set`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, max_q, min_q, Rational, Show};
use crate::spaces::{
    component_of, solve_equal, Affine, ClopenSubset, Interval, PlFunc, PointSet, Space, Subset,
};

/// One branch over a finite space: `source -> (image, weight)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiniteBranch {
    pub entries: BTreeMap<usize, (usize, Rational)>,
}

impl FiniteBranch {
    pub fn domain(&self) -> BTreeSet<usize> {
        self.entries.keys().copied().collect()
    }
}

/// Per-edge data recomputed from the branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeInfo {
    pub weight: Rational,
    pub indices: BTreeSet<usize>,
}

/// Multiplicity-free graph of a finite system, keyed by `(range, source)`.
pub type FiniteEdgeSet = BTreeMap<(usize, usize), EdgeInfo>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSystem {
    pub labels: Vec<String>,
    pub branches: Vec<FiniteBranch>,
}

impl FiniteSystem {
    pub fn new(labels: Vec<String>, branches: Vec<FiniteBranch>) -> Result<Self> {
        Space::finite(labels.clone())?;
        let n = labels.len();
        for (i, b) in branches.iter().enumerate() {
            for (&s, (r, w)) in &b.entries {
                if s >= n || *r >= n {
                    return Err(Error::invalid(format!("branch {i}: point index out of range")));
                }
                if !w.is_positive() {
                    return Err(Error::invalid(format!(
                        "branch {i}: weight at {} must be positive, got {}",
                        labels[s],
                        Show(w)
                    )));
                }
            }
        }
        Ok(FiniteSystem { labels, branches })
    }

    /// Non-negative matrix encoding: branch `i` sends every `j` with
    /// `A[i][j] > 0` to `i`, with weight `A[i][j]`.
    pub fn from_matrix(labels: Vec<String>, matrix: &[Vec<Rational>]) -> Result<Self> {
        let n = labels.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::invalid("matrix must be square and match the labels"));
        }
        let mut branches = Vec::with_capacity(n);
        for (i, row) in matrix.iter().enumerate() {
            let mut b = FiniteBranch::default();
            for (j, a) in row.iter().enumerate() {
                if a.is_negative() {
                    return Err(Error::invalid(format!("matrix entry ({i},{j}) is negative")));
                }
                if a.is_positive() {
                    b.entries.insert(j, (i, a.clone()));
                }
            }
            branches.push(b);
        }
        FiniteSystem::new(labels, branches)
    }

    /// Directed graph encoding: one weight-1 branch per edge `source -> range`.
    pub fn from_digraph(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let branches = edges
            .iter()
            .map(|&(s, r)| FiniteBranch { entries: BTreeMap::from([(s, (r, int(1)))]) })
            .collect();
        FiniteSystem::new(labels, branches)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn graph(&self) -> FiniteEdgeSet {
        let mut g: FiniteEdgeSet = BTreeMap::new();
        for (i, b) in self.branches.iter().enumerate() {
            for (&s, (r, w)) in &b.entries {
                let e = g.entry((*r, s)).or_insert_with(|| EdgeInfo {
                    weight: Rational::zero(),
                    indices: BTreeSet::new(),
                });
                e.weight += w;
                e.indices.insert(i);
            }
        }
        g
    }

    pub fn index_set(&self, edge: (usize, usize)) -> Result<BTreeSet<usize>> {
        let (r, s) = edge;
        let idx: BTreeSet<usize> = self
            .branches
            .iter()
            .enumerate()
            .filter(|(_, b)| b.entries.get(&s).is_some_and(|(img, _)| *img == r))
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            return Err(Error::Domain(format!(
                "({}, {}) is not an edge",
                self.label(r),
                self.label(s)
            )));
        }
        Ok(idx)
    }

    pub fn edge_weight(&self, edge: (usize, usize)) -> Result<Rational> {
        let idx = self.index_set(edge)?;
        Ok(idx.iter().map(|&i| self.branches[i].entries[&edge.1].1.clone()).sum())
    }

    pub fn label(&self, i: usize) -> &str {
        self.labels.get(i).map(String::as_str).unwrap_or("?")
    }

    pub fn coinciding_set(&self, indices: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
        check_index_set(indices, self.branches.len())?;
        let mut it = indices.iter();
        let first = &self.branches[*it.next().unwrap()];
        let mut out: BTreeSet<usize> = first.domain();
        for &j in it {
            let b = &self.branches[j];
            out.retain(|x| b.entries.get(x).is_some_and(|(r, _)| *r == first.entries[x].0));
        }
        Ok(out)
    }

    pub fn fixed_points(&self) -> BTreeSet<usize> {
        self.branches
            .iter()
            .flat_map(|b| b.entries.iter().filter(|(s, (r, _))| *s == r).map(|(s, _)| *s))
            .collect()
    }

    pub fn is_well_supported(&self) -> bool {
        let covered: BTreeSet<usize> = self.branches.iter().flat_map(|b| b.entries.keys().copied()).collect();
        covered.len() == self.len()
    }

    /// `w_σ(x) = Σ_{i : x ∈ X_i} w_i(x)`.
    pub fn total_weight(&self) -> Vec<Rational> {
        let mut t = vec![Rational::zero(); self.len()];
        for b in &self.branches {
            for (&s, (_, w)) in &b.entries {
                t[s] += w;
            }
        }
        t
    }

    pub fn normalize(&self) -> Result<FiniteSystem> {
        if !self.is_well_supported() {
            return Err(Error::Precondition("system is not well-supported".into()));
        }
        let t = self.total_weight();
        let branches = self
            .branches
            .iter()
            .map(|b| FiniteBranch {
                entries: b.entries.iter().map(|(&s, (r, w))| (s, (*r, w / &t[s]))).collect(),
            })
            .collect();
        Ok(FiniteSystem { labels: self.labels.clone(), branches })
    }

    /// `P(σ,w)(f)(x) = Σ_{i : x ∈ X_i} w_i(x) f(σ_i(x))`.
    pub fn positive_operator(&self, f: &[Rational]) -> Result<Vec<Rational>> {
        if f.len() != self.len() {
            return Err(Error::Domain("function must be defined on every point".into()));
        }
        let mut out = vec![Rational::zero(); self.len()];
        for b in &self.branches {
            for (&s, (r, w)) in &b.entries {
                out[s] += w * &f[*r];
            }
        }
        Ok(out)
    }

    /// Outgoing edges `(range, weight)` of each point, in range order.
    pub fn out_edges(&self) -> Vec<Vec<(usize, Rational)>> {
        let mut out = vec![Vec::new(); self.len()];
        for ((r, s), info) in self.graph() {
            out[s].push((r, info.weight));
        }
        out
    }
}

fn check_index_set(indices: &BTreeSet<usize>, d: usize) -> Result<()> {
    if indices.len() < 2 {
        return Err(Error::Argument("coinciding sets need at least two indices".into()));
    }
    if indices.iter().any(|&i| i >= d) {
        return Err(Error::Argument("branch index out of range".into()));
    }
    Ok(())
}

/// One branch over an interval space. The domain is `map.domain()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalBranch {
    pub map: PlFunc,
    pub weight: PlFunc,
}

/// A cell of a decomposition: a breakpoint or the open gap between two
/// consecutive breakpoints of one component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CellKind {
    Point(Rational),
    Open(Rational, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    pub comp: usize,
    pub kind: CellKind,
}

impl Cell {
    pub fn closure(&self) -> (Rational, Rational) {
        match &self.kind {
            CellKind::Point(p) => (p.clone(), p.clone()),
            CellKind::Open(a, b) => (a.clone(), b.clone()),
        }
    }

    pub fn sample(&self) -> Rational {
        let (a, b) = self.closure();
        (a + b) / int(2)
    }

    pub fn is_point(&self) -> bool {
        matches!(self.kind, CellKind::Point(_))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CellKind::Point(p) => write!(f, "{{{}}}", Show(p)),
            CellKind::Open(a, b) => write!(f, "({}, {})", Show(a), Show(b)),
        }
    }
}

/// A graph piece over an open cell: the curve `r = map(s)` with the summed
/// weight of every branch tracing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineEdge {
    pub map: Affine,
    pub weight: Affine,
    pub indices: BTreeSet<usize>,
}

/// An edge over a single source point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointEdge {
    pub range: Rational,
    pub weight: Rational,
    pub indices: BTreeSet<usize>,
}

/// Location of a weight discontinuity: the edge, its weight, and the
/// one-sided limits along every approaching graph piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discontinuity {
    pub range: Rational,
    pub source: Rational,
    pub value: Rational,
    pub limits: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSystem {
    pub components: Vec<Interval>,
    pub branches: Vec<IntervalBranch>,
}

impl IntervalSystem {
    pub fn new(components: Vec<Interval>, branches: Vec<IntervalBranch>) -> Result<Self> {
        let components = match Space::intervals(components)? {
            Space::Intervals { components } => components,
            Space::Finite { .. } => unreachable!(),
        };
        for (i, b) in branches.iter().enumerate() {
            if b.map.domain() != b.weight.domain() {
                return Err(Error::invalid(format!("branch {i}: map and weight domains differ")));
            }
            for (&c, knots) in b.map.pieces() {
                if c >= components.len() {
                    return Err(Error::invalid(format!("branch {i}: component {c} out of range")));
                }
                let (lo, hi) = b.map.range(c);
                let target = component_of(&components, &lo);
                if target.is_none() || target != component_of(&components, &hi) {
                    return Err(Error::invalid(format!(
                        "branch {i}: image of component {} is not inside one component of the space",
                        components[c]
                    )));
                }
                debug_assert!(!knots.is_empty());
            }
            for (&c, knots) in b.weight.pieces() {
                if let Some((x, w)) = knots.iter().find(|(_, w)| !w.is_positive()) {
                    return Err(Error::invalid(format!(
                        "branch {i}: weight must be positive, got {} at {} (component {})",
                        Show(w),
                        Show(x),
                        components[c]
                    )));
                }
            }
        }
        Ok(IntervalSystem { components, branches })
    }

    pub fn whole(&self) -> ClopenSubset {
        ClopenSubset((0..self.components.len()).collect())
    }

    pub fn identity(&self) -> PlFunc {
        PlFunc::identity(&self.components, &self.whole())
    }

    fn comp_of(&self, x: &Rational) -> Result<usize> {
        component_of(&self.components, x)
            .ok_or_else(|| Error::Domain(format!("{} is not a point of the space", Show(x))))
    }

    /// All edges with source `x`, merged by range.
    pub fn edges_from(&self, x: &Rational) -> Result<Vec<PointEdge>> {
        let c = self.comp_of(x)?;
        let mut by_range: BTreeMap<Rational, PointEdge> = BTreeMap::new();
        for (i, b) in self.branches.iter().enumerate() {
            if !b.map.domain().contains(c) {
                continue;
            }
            let r = b.map.eval_in(c, x);
            let w = b.weight.eval_in(c, x);
            let e = by_range.entry(r.clone()).or_insert_with(|| PointEdge {
                range: r,
                weight: Rational::zero(),
                indices: BTreeSet::new(),
            });
            e.weight += w;
            e.indices.insert(i);
        }
        Ok(by_range.into_values().collect())
    }

    pub fn index_set(&self, range: &Rational, source: &Rational) -> Result<BTreeSet<usize>> {
        self.edges_from(source)?
            .into_iter()
            .find(|e| &e.range == range)
            .map(|e| e.indices)
            .ok_or_else(|| Error::Domain(format!("({}, {}) is not an edge", Show(range), Show(source))))
    }

    pub fn edge_weight(&self, range: &Rational, source: &Rational) -> Result<Rational> {
        self.edges_from(source)?
            .into_iter()
            .find(|e| &e.range == range)
            .map(|e| e.weight)
            .ok_or_else(|| Error::Domain(format!("({}, {}) is not an edge", Show(range), Show(source))))
    }

    pub fn coinciding_set(&self, indices: &BTreeSet<usize>) -> Result<PointSet> {
        check_index_set(indices, self.branches.len())?;
        let mut it = indices.iter();
        let first = &self.branches[*it.next().unwrap()].map;
        let mut acc: Option<PointSet> = None;
        for &j in it {
            let eq = solve_equal(first, &self.branches[j].map);
            acc = Some(match acc {
                None => eq,
                Some(a) => a.intersection(&eq),
            });
        }
        Ok(acc.unwrap_or_default())
    }

    /// Topological boundary, within the space, of a closed subset.
    pub fn boundary(&self, set: &PointSet) -> PointSet {
        let mut pts = Vec::new();
        for p in set.parts() {
            let c = match component_of(&self.components, &p.lo) {
                Some(c) => c,
                None => continue,
            };
            let comp = &self.components[c];
            if comp.is_degenerate() {
                continue;
            }
            if p.lo > comp.lo || p.is_degenerate() {
                pts.push(Interval { lo: p.lo.clone(), hi: p.lo.clone() });
            }
            if p.hi < comp.hi {
                pts.push(Interval { lo: p.hi.clone(), hi: p.hi.clone() });
            }
        }
        PointSet::from_parts(pts)
    }

    /// `B(I)` for every index set with `|I| >= 2` whose coinciding set is
    /// non-empty.
    pub fn coinciding_structure(&self) -> Vec<(BTreeSet<usize>, PointSet, PointSet)> {
        let d = self.branches.len();
        let mut out = Vec::new();
        if d < 2 {
            return out;
        }
        let subsets: Vec<BTreeSet<usize>> = if d <= 12 {
            (0u32..(1 << d))
                .filter(|m| m.count_ones() >= 2)
                .map(|m| (0..d).filter(|i| m & (1 << i) != 0).collect())
                .collect()
        } else {
            // B(I) ⊆ ∪ B(pair) for every larger I, so pairs cover the union
            (0..d).flat_map(|i| (i + 1..d).map(move |j| BTreeSet::from([i, j]))).collect()
        };
        for idx in subsets {
            let c = self.coinciding_set(&idx).expect("valid index set");
            if !c.is_empty() {
                let b = self.boundary(&c);
                out.push((idx, c, b));
            }
        }
        out
    }

    pub fn branching_points(&self) -> PointSet {
        self.coinciding_structure()
            .into_iter()
            .fold(PointSet::empty(), |acc, (_, _, b)| acc.union(&b))
    }

    /// Branching edges `(σ_i(p), p)` for `p ∈ B(I)`, `i ∈ I`.
    pub fn branching_edges(&self) -> BTreeSet<(Rational, Rational)> {
        let mut out = BTreeSet::new();
        for (idx, _, b) in self.coinciding_structure() {
            for p in b.endpoints() {
                let c = self.comp_of(&p).expect("boundary point in space");
                for &i in &idx {
                    out.insert((self.branches[i].map.eval_in(c, &p), p.clone()));
                }
            }
        }
        out
    }

    pub fn fixed_points(&self) -> PointSet {
        self.branches.iter().fold(PointSet::empty(), |acc, b| {
            let id = PlFunc::identity(&self.components, &b.map.domain());
            acc.union(&solve_equal(&b.map, &id))
        })
    }

    /// Breakpoints of a component: its endpoints, every knot of the branch
    /// data, coinciding-set endpoints, fixed-point endpoints, and `extra`.
    pub fn breakpoints(&self, comp: usize, extra: &[Rational]) -> Vec<Rational> {
        let interval = &self.components[comp];
        let mut xs = vec![interval.lo.clone(), interval.hi.clone()];
        let live: Vec<&IntervalBranch> =
            self.branches.iter().filter(|b| b.map.domain().contains(comp)).collect();
        for b in &live {
            xs.extend(b.map.knots(comp).iter().map(|k| k.0.clone()));
            xs.extend(b.weight.knots(comp).iter().map(|k| k.0.clone()));
            let id = PlFunc::identity(&self.components, &ClopenSubset(BTreeSet::from([comp])));
            xs.extend(solve_equal(&b.map.restrict(&id.domain()), &id).endpoints());
        }
        for (i, a) in live.iter().enumerate() {
            for b in &live[i + 1..] {
                xs.extend(solve_equal(&a.map, &b.map).endpoints().into_iter().filter(|x| interval.contains(x)));
            }
        }
        xs.extend(extra.iter().filter(|x| interval.contains(x)).cloned());
        xs.sort();
        xs.dedup();
        xs
    }

    /// Cells of a component given its sorted breakpoints.
    pub fn cells_of(comp: usize, breaks: &[Rational]) -> Vec<Cell> {
        let mut cells = Vec::with_capacity(2 * breaks.len());
        for (k, b) in breaks.iter().enumerate() {
            if k > 0 {
                cells.push(Cell { comp, kind: CellKind::Open(breaks[k - 1].clone(), b.clone()) });
            }
            cells.push(Cell { comp, kind: CellKind::Point(b.clone()) });
        }
        cells
    }

    /// Graph pieces over an open cell that contains no breakpoint of the
    /// system; lines are merged where branches agree on the whole cell.
    pub fn lines_on(&self, comp: usize, a: &Rational, b: &Rational) -> Vec<LineEdge> {
        let mut by_line: BTreeMap<Affine, LineEdge> = BTreeMap::new();
        for (i, br) in self.branches.iter().enumerate() {
            if !br.map.domain().contains(comp) {
                continue;
            }
            let line = br.map.line_on(comp, a, b);
            let w = br.weight.line_on(comp, a, b);
            let e = by_line.entry(line.clone()).or_insert_with(|| LineEdge {
                map: line,
                weight: Affine::constant(Rational::zero()),
                indices: BTreeSet::new(),
            });
            e.weight = Affine::new(&e.weight.slope + &w.slope, &e.weight.intercept + &w.intercept);
            e.indices.insert(i);
        }
        by_line.into_values().collect()
    }

    /// Canonical multiplicity-free graph.
    pub fn graph(&self) -> IntervalEdgeSet {
        let mut comps = BTreeMap::new();
        for c in 0..self.components.len() {
            let breaks = self.breakpoints(c, &[]);
            let mut points = Vec::with_capacity(breaks.len());
            let mut opens = Vec::with_capacity(breaks.len());
            for (k, x) in breaks.iter().enumerate() {
                points.push(self.edges_from(x).unwrap().into_iter().map(|e| e.range).collect());
                if k + 1 < breaks.len() {
                    opens.push(self.lines_on(c, x, &breaks[k + 1]).into_iter().map(|e| e.map).collect());
                }
            }
            comps.insert(c, CompGraph { breaks, points, opens }.canonical());
        }
        IntervalEdgeSet { components: self.components.clone(), comps }
    }

    /// Edge-weight discontinuities, found from the one-sided limits of the
    /// piece weights at every breakpoint.
    pub fn weight_discontinuities(&self) -> Vec<Discontinuity> {
        let mut out = Vec::new();
        for c in 0..self.components.len() {
            let breaks = self.breakpoints(c, &[]);
            for (k, p) in breaks.iter().enumerate() {
                let mut neighbours = Vec::new();
                if k > 0 {
                    neighbours.extend(self.lines_on(c, &breaks[k - 1], p));
                }
                if k + 1 < breaks.len() {
                    neighbours.extend(self.lines_on(c, p, &breaks[k + 1]));
                }
                for e in self.edges_from(p).unwrap() {
                    let limits: Vec<Rational> = neighbours
                        .iter()
                        .filter(|l| l.map.eval(p) == e.range)
                        .map(|l| l.weight.eval(p))
                        .collect();
                    if limits.iter().any(|l| *l != e.weight) {
                        out.push(Discontinuity {
                            range: e.range.clone(),
                            source: p.clone(),
                            value: e.weight.clone(),
                            limits,
                        });
                    }
                }
            }
        }
        out
    }

    /// Infimum and supremum of the edge weight over the graph (limits
    /// included), each exact.
    pub fn edge_weight_range(&self) -> Option<(Rational, Rational)> {
        let mut acc: Option<(Rational, Rational)> = None;
        let mut push = |v: Rational| {
            acc = Some(match acc.take() {
                None => (v.clone(), v),
                Some((lo, hi)) => (min_q(&lo, &v), max_q(&hi, &v)),
            });
        };
        for c in 0..self.components.len() {
            let breaks = self.breakpoints(c, &[]);
            for (k, p) in breaks.iter().enumerate() {
                for e in self.edges_from(p).unwrap() {
                    push(e.weight);
                }
                if k + 1 < breaks.len() {
                    for l in self.lines_on(c, p, &breaks[k + 1]) {
                        push(l.weight.eval(p));
                        push(l.weight.eval(&breaks[k + 1]));
                    }
                }
            }
        }
        acc
    }

    /// Global bounds `(min_i min w_i, d · max_i max w_i)`.
    pub fn weight_bounds(&self) -> Option<(Rational, Rational)> {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for b in &self.branches {
            for c in b.weight.domain().iter() {
                let (mn, mx) = b.weight.range(c);
                lo = Some(lo.map_or(mn.clone(), |l| min_q(&l, &mn)));
                hi = Some(hi.map_or(mx.clone(), |h| max_q(&h, &mx)));
            }
        }
        Some((lo?, hi? * int(self.branches.len() as i64)))
    }

    pub fn is_well_supported(&self) -> bool {
        let covered: BTreeSet<usize> = self.branches.iter().flat_map(|b| b.map.domain().0).collect();
        covered.len() == self.components.len()
    }

    /// `w_σ` on component `c`, or `None` when no branch is defined there.
    fn total_weight_on(&self, c: usize) -> Option<PlFunc> {
        let dom = ClopenSubset(BTreeSet::from([c]));
        self.branches
            .iter()
            .filter(|b| b.weight.domain().contains(c))
            .map(|b| b.weight.restrict(&dom))
            .reduce(|a, b| a.add(&b).expect("same domain"))
    }

    /// Divides every weight by `w_σ`. The quotient of two PL functions is PL
    /// only when, on each affine piece, `w_σ` is constant or proportional to
    /// the branch weight; other inputs are rejected.
    pub fn normalize(&self) -> Result<IntervalSystem> {
        if !self.is_well_supported() {
            return Err(Error::Precondition("system is not well-supported".into()));
        }
        let totals: BTreeMap<usize, PlFunc> = (0..self.components.len())
            .map(|c| (c, self.total_weight_on(c).expect("well-supported")))
            .collect();
        let mut branches = Vec::with_capacity(self.branches.len());
        for (i, b) in self.branches.iter().enumerate() {
            let mut pieces = BTreeMap::new();
            for (&c, knots) in b.weight.pieces() {
                let total = &totals[&c];
                let mut xs: Vec<Rational> =
                    knots.iter().chain(total.knots(c)).map(|k| k.0.clone()).collect();
                xs.sort();
                xs.dedup();
                for w in xs.windows(2) {
                    let wl = b.weight.line_on(c, &w[0], &w[1]);
                    let tl = total.line_on(c, &w[0], &w[1]);
                    let proportional = &wl.slope * &tl.intercept == &wl.intercept * &tl.slope;
                    if !tl.slope.is_zero() && !proportional {
                        return Err(Error::Unsupported(format!(
                            "normalized weight of branch {i} is not piecewise linear on ({}, {})",
                            Show(&w[0]),
                            Show(&w[1])
                        )));
                    }
                }
                let new_knots = xs
                    .into_iter()
                    .map(|x| {
                        let v = b.weight.eval_in(c, &x) / total.eval_in(c, &x);
                        (x, v)
                    })
                    .collect();
                pieces.insert(c, new_knots);
            }
            branches.push(IntervalBranch {
                map: b.map.clone(),
                weight: PlFunc::new(&self.components, pieces)?,
            });
        }
        IntervalSystem::new(self.components.clone(), branches)
    }

    /// `P(σ,w)(f)` as an evaluable function; `f` must be defined on all of X.
    pub fn positive_operator<'a>(&'a self, f: &'a PlFunc) -> Result<PositiveImage<'a>> {
        if f.domain() != self.whole() {
            return Err(Error::Domain("function must be defined on the whole space".into()));
        }
        Ok(PositiveImage { sys: self, f })
    }
}

/// Result of applying the positive operator to a PL function.
pub struct PositiveImage<'a> {
    sys: &'a IntervalSystem,
    f: &'a PlFunc,
}

impl PositiveImage<'_> {
    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        let c = self.sys.comp_of(x)?;
        let mut acc = Rational::zero();
        for b in &self.sys.branches {
            if b.map.domain().contains(c) {
                acc += b.weight.eval_in(c, x) * self.f.evaluate(&b.map.eval_in(c, x))?;
            }
        }
        Ok(acc)
    }
}

/// Graph data of one component over a breakpoint list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompGraph {
    pub breaks: Vec<Rational>,
    /// Sorted ranges over each breakpoint.
    pub points: Vec<Vec<Rational>>,
    /// Sorted lines over each open gap.
    pub opens: Vec<Vec<Affine>>,
}

impl CompGraph {
    fn canonical(mut self) -> Self {
        let mut k = 1;
        while k + 1 < self.breaks.len() {
            let p = &self.breaks[k];
            let same_lines = self.opens[k - 1] == self.opens[k];
            let mut vals: Vec<Rational> = self.opens[k].iter().map(|l| l.eval(p)).collect();
            vals.sort();
            vals.dedup();
            if same_lines && vals == self.points[k] {
                self.breaks.remove(k);
                self.points.remove(k);
                self.opens.remove(k);
            } else {
                k += 1;
            }
        }
        self
    }

    fn values_at(&self, x: &Rational) -> Vec<Rational> {
        if let Ok(k) = self.breaks.binary_search(x) {
            return self.points[k].clone();
        }
        let k = self.breaks.iter().position(|b| b > x).expect("inside component") - 1;
        let mut v: Vec<Rational> = self.opens[k].iter().map(|l| l.eval(x)).collect();
        v.sort();
        v.dedup();
        v
    }

    fn lines_at(&self, x: &Rational) -> &[Affine] {
        let k = self.breaks.iter().position(|b| b > x).expect("inside component") - 1;
        &self.opens[k]
    }
}

/// Canonical multiplicity-free graph of an interval system: per component,
/// the minimal breakpoint list with the ranges over each breakpoint and the
/// affine curves over each gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalEdgeSet {
    pub components: Vec<Interval>,
    pub comps: BTreeMap<usize, CompGraph>,
}

impl IntervalEdgeSet {
    pub fn contains(&self, range: &Rational, source: &Rational) -> bool {
        component_of(&self.components, source)
            .is_some_and(|c| self.comps[&c].values_at(source).contains(range))
    }

    /// Number of curve pieces (open gaps × lines) plus isolated edges.
    pub fn piece_count(&self) -> usize {
        self.comps.values().map(|g| g.opens.iter().map(Vec::len).sum::<usize>()).sum()
    }

    /// A point `(range, source)` in exactly one of the two graphs, or `None`
    /// when they are equal.
    pub fn difference_witness(&self, other: &IntervalEdgeSet) -> Option<(Rational, Rational)> {
        if self == other {
            return None;
        }
        for (c, g) in &self.comps {
            let h = other.comps.get(c)?;
            let mut xs: Vec<Rational> = g.breaks.iter().chain(h.breaks.iter()).cloned().collect();
            xs.sort();
            xs.dedup();
            for w in xs.windows(2) {
                let (a, b) = (&w[0], &w[1]);
                let mid = (a + b) / int(2);
                let lg = g.lines_at(&mid);
                let lh = h.lines_at(&mid);
                if lg == lh {
                    continue;
                }
                // the midpoint first, then further samples until one
                // separates the two line sets
                let n = lg.len() + lh.len() + 3;
                let samples = std::iter::once(mid.clone())
                    .chain((1..n).map(|k| a + (b - a) * Rational::new(k.into(), n.into())));
                for s in samples {
                    let vg: Vec<Rational> = lg.iter().map(|l| l.eval(&s)).collect();
                    let vh: Vec<Rational> = lh.iter().map(|l| l.eval(&s)).collect();
                    if let Some(r) = sym_diff(&vg, &vh) {
                        return Some((r, s));
                    }
                }
            }
            for x in &xs {
                if let Some(w) = sym_diff(&g.values_at(x), &h.values_at(x)) {
                    return Some((w, x.clone()));
                }
            }
        }
        None
    }
}

fn sym_diff(a: &[Rational], b: &[Rational]) -> Option<Rational> {
    a.iter().find(|x| !b.contains(x)).or_else(|| b.iter().find(|x| !a.contains(x))).cloned()
}

impl fmt::Display for IntervalEdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, g) in &self.comps {
            writeln!(f, "component {}:", self.components[*c])?;
            for (k, x) in g.breaks.iter().enumerate() {
                let vals: Vec<String> = g.points[k].iter().map(|v| Show(v).to_string()).collect();
                writeln!(f, "  s = {}: r ∈ {{{}}}", Show(x), vals.join(", "))?;
                if let Some(lines) = g.opens.get(k) {
                    let ls: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
                    writeln!(f, "  s ∈ ({}, {}): r = {}", Show(x), Show(&g.breaks[k + 1]), ls.join(" | "))?;
                }
            }
        }
        Ok(())
    }
}

/// A weighted partial system over either kind of space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Wps {
    Finite(FiniteSystem),
    Interval(IntervalSystem),
}

impl Wps {
    pub fn space(&self) -> Space {
        match self {
            Wps::Finite(s) => Space::Finite { points: s.labels.clone() },
            Wps::Interval(s) => Space::Intervals { components: s.components.clone() },
        }
    }

    pub fn num_branches(&self) -> usize {
        match self {
            Wps::Finite(s) => s.branches.len(),
            Wps::Interval(s) => s.branches.len(),
        }
    }

    pub fn is_well_supported(&self) -> bool {
        match self {
            Wps::Finite(s) => s.is_well_supported(),
            Wps::Interval(s) => s.is_well_supported(),
        }
    }

    pub fn normalize(&self) -> Result<Wps> {
        Ok(match self {
            Wps::Finite(s) => Wps::Finite(s.normalize()?),
            Wps::Interval(s) => Wps::Interval(s.normalize()?),
        })
    }

    pub fn fixed_points(&self) -> Subset {
        match self {
            Wps::Finite(s) => Subset::Atoms(s.fixed_points()),
            Wps::Interval(s) => Subset::Reals(s.fixed_points()),
        }
    }

    /// Empty for finite spaces: discrete topology has no boundaries.
    pub fn branching_points(&self) -> Subset {
        match self {
            Wps::Finite(_) => Subset::Atoms(BTreeSet::new()),
            Wps::Interval(s) => Subset::Reals(s.branching_points()),
        }
    }

    pub fn as_finite(&self) -> Result<&FiniteSystem> {
        match self {
            Wps::Finite(s) => Ok(s),
            Wps::Interval(_) => Err(Error::Unsupported("operation requires a finite space".into())),
        }
    }

    pub fn as_interval(&self) -> Result<&IntervalSystem> {
        match self {
            Wps::Interval(s) => Ok(s),
            Wps::Finite(_) => Err(Error::Unsupported("operation requires an interval space".into())),
        }
    }
}
