//! The three conjugacy relations between weighted partial systems.
//!
//! Given `(σ, w)` over `X`, `(τ, u)` over `Y` and a homeomorphism
//! `γ : X → Y`, the conjugated system `τ^γ = γ⁻¹τγ` with weights `u^γ = u∘γ`
//! lives over `X`, and all three relations compare `(σ, w)` with it:
//!
//! * graph conjugacy: `Gr(σ) = Gr(τ^γ)`;
//! * branch-transition conjugacy: additionally `u^γ/w` is continuous at
//!   every branching edge;
//! * weighted-orbit conjugacy: additionally some continuous `H > 0` and
//!   `C >= 1` keep every path product `∏ (u^γ/w)·H` inside `[1/C, C]`.

mod candidates;
pub mod finite;
mod orbit;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::rational::{max_q, min_q, Rational, Show};
use crate::spaces::{component_of, is_homeomorphism, Affine, ClopenSubset, PlFunc, Space};
use crate::wps::{FiniteBranch, FiniteSystem, IntervalBranch, IntervalSystem, Wps};

pub use candidates::candidate_homeomorphisms;
pub use finite::{
    decide_weighted_orbit_finite, exhaustive_isomorphism, find_graph_conjugacy_finite,
};

/// A point of either kind of space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pt {
    Atom(usize),
    Real(Rational),
}

impl Pt {
    pub fn describe(&self, sys: &Wps) -> String {
        match (self, sys) {
            (Pt::Atom(i), Wps::Finite(s)) => s.label(*i).to_string(),
            (Pt::Atom(i), _) => format!("#{i}"),
            (Pt::Real(q), _) => Show(q).to_string(),
        }
    }
}

impl fmt::Display for Pt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pt::Atom(i) => write!(f, "#{i}"),
            Pt::Real(q) => write!(f, "{}", Show(q)),
        }
    }
}

/// Candidate homeomorphism `γ : X → Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gamma {
    /// `γ(x) = table[x]` between finite spaces.
    Bijection(Vec<usize>),
    Pl(PlFunc),
}

impl Gamma {
    pub fn identity(space: &Space) -> Gamma {
        match space {
            Space::Finite { points } => Gamma::Bijection((0..points.len()).collect()),
            Space::Intervals { components } => {
                Gamma::Pl(PlFunc::identity(components, &ClopenSubset((0..components.len()).collect())))
            }
        }
    }

    /// Errors unless `γ` is a homeomorphism `from → to`.
    pub fn check(&self, from: &Space, to: &Space) -> Result<()> {
        match (self, from, to) {
            (Gamma::Bijection(t), Space::Finite { points: p }, Space::Finite { points: q }) => {
                let image: BTreeSet<usize> = t.iter().copied().collect();
                if t.len() != p.len() || p.len() != q.len() || image.len() != t.len() || t.iter().any(|&y| y >= q.len())
                {
                    return Err(Error::Precondition("gamma is not a bijection between the spaces".into()));
                }
                Ok(())
            }
            (Gamma::Pl(g), Space::Intervals { components: c1 }, Space::Intervals { components: c2 }) => {
                if is_homeomorphism(g, c1, c2) {
                    Ok(())
                } else {
                    Err(Error::Precondition("gamma is not a homeomorphism between the spaces".into()))
                }
            }
            _ => Err(Error::Precondition("gamma does not match the kind of space".into())),
        }
    }

    pub fn inverse(&self, from: &Space, to: &Space) -> Result<Gamma> {
        self.check(from, to)?;
        Ok(match (self, to) {
            (Gamma::Bijection(t), _) => {
                let mut inv = vec![0; t.len()];
                for (x, &y) in t.iter().enumerate() {
                    inv[y] = x;
                }
                Gamma::Bijection(inv)
            }
            (Gamma::Pl(g), Space::Intervals { components }) => Gamma::Pl(g.invert(components)?),
            _ => unreachable!(),
        })
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Bijection(t) => {
                let s: Vec<String> = t.iter().enumerate().map(|(x, y)| format!("{x}→{y}")).collect();
                write!(f, "{}", s.join(", "))
            }
            Gamma::Pl(g) => write!(f, "{g}"),
        }
    }
}

/// The gap function `H` of a weighted-orbit certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gap {
    /// One value per edge `(range, source)` of a finite graph.
    Edges(BTreeMap<(usize, usize), Rational>),
    /// `H(σ_i(x), x) = H_i(x)`, one PL function per branch of the source
    /// system, each on that branch's domain.
    Branches(Vec<PlFunc>),
    /// `H = w / u^γ`, making every factor equal to one.
    WeightRatio,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub gamma: Gamma,
    pub h: Gap,
    pub c: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Product above `C`.
    Upper,
    /// Product below `1/C`.
    Lower,
}

/// A path `x_0 → x_1 → …` with `x_{k+1} = σ_{steps[k]}(x_k)` whose factor
/// product leaves `[1/C, C]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathWitness {
    pub source: Pt,
    pub steps: Vec<usize>,
    pub product: Rational,
    pub bound: Rational,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `(range, source)` lies in `Gr(σ)` but not in `Gr(τ^γ)` (or the reverse).
    GraphMismatch { range: Pt, source: Pt, in_first: bool },
    NoIsomorphism { reason: String },
    /// The transition ratio at a branching edge and its one-sided limits.
    LimitMismatch { range: Pt, source: Pt, value: Rational, limits: Vec<Rational> },
    /// A self-loop whose forced gap value disagrees with the limit of the
    /// forced values on nearby self-loops.
    ForcedDiscontinuity { point: Rational, forced: Rational, limit: Rational },
    Path(PathWitness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds { detail: String, certificate: Option<Certificate> },
    Fails { detail: String, witness: Witness },
    Inconclusive { reason: String, depth: usize },
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Holds { .. } => 0,
            Verdict::Fails { .. } => 1,
            Verdict::Inconclusive { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "holds",
            Verdict::Fails { .. } => "fails",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails { .. })
    }
}

/// `τ^γ = γ⁻¹τγ` with weights `u∘γ`, over the source space of `γ`.
pub fn conjugate_system(b: &Wps, gamma: &Gamma, source: &Space) -> Result<Wps> {
    gamma.check(source, &b.space())?;
    match (b, gamma, source) {
        (Wps::Finite(tb), Gamma::Bijection(t), Space::Finite { points }) => {
            let mut inv = vec![0; t.len()];
            for (x, &y) in t.iter().enumerate() {
                inv[y] = x;
            }
            let branches = tb
                .branches
                .iter()
                .map(|br| FiniteBranch {
                    entries: (0..t.len())
                        .filter_map(|x| br.entries.get(&t[x]).map(|(r, u)| (x, (inv[*r], u.clone()))))
                        .collect(),
                })
                .collect();
            Ok(Wps::Finite(FiniteSystem::new(points.clone(), branches)?))
        }
        (Wps::Interval(tb), Gamma::Pl(g), Space::Intervals { components }) => {
            let ginv = g.invert(&tb.components)?;
            let mut branches = Vec::with_capacity(tb.branches.len());
            for br in &tb.branches {
                let dom_y = br.map.domain();
                let dom_x = ClopenSubset(
                    (0..components.len())
                        .filter(|&c| {
                            let y = g.eval_in(c, &components[c].lo);
                            component_of(&tb.components, &y).is_some_and(|cy| dom_y.contains(cy))
                        })
                        .collect(),
                );
                let gr = g.restrict(&dom_x);
                branches.push(IntervalBranch {
                    map: ginv.compose(&br.map.compose(&gr)?)?,
                    weight: br.weight.compose(&gr)?,
                });
            }
            Ok(Wps::Interval(IntervalSystem::new(components.clone(), branches)?))
        }
        _ => Err(Error::Precondition("gamma does not match the kind of space".into())),
    }
}

/// Graph conjugacy under a fixed `γ`.
pub fn check_graph_conjugacy(a: &Wps, b: &Wps, gamma: &Gamma) -> Result<Verdict> {
    let bg = conjugate_system(b, gamma, &a.space())?;
    Ok(graph_verdict(a, &bg))
}

fn graph_verdict(a: &Wps, bg: &Wps) -> Verdict {
    match (a, bg) {
        (Wps::Finite(x), Wps::Finite(y)) => {
            let gx: BTreeSet<(usize, usize)> = x.graph().into_keys().collect();
            let gy: BTreeSet<(usize, usize)> = y.graph().into_keys().collect();
            match gx.symmetric_difference(&gy).next() {
                None => Verdict::Holds { detail: format!("{} edges agree", gx.len()), certificate: None },
                Some(&(r, s)) => Verdict::Fails {
                    detail: "edge sets differ".into(),
                    witness: Witness::GraphMismatch {
                        range: Pt::Atom(r),
                        source: Pt::Atom(s),
                        in_first: gx.contains(&(r, s)),
                    },
                },
            }
        }
        (Wps::Interval(x), Wps::Interval(y)) => {
            let (gx, gy) = (x.graph(), y.graph());
            match gx.difference_witness(&gy) {
                None => Verdict::Holds {
                    detail: format!("{} curve pieces agree", gx.piece_count()),
                    certificate: None,
                },
                Some((r, s)) => Verdict::Fails {
                    detail: "graphs differ".into(),
                    witness: Witness::GraphMismatch {
                        in_first: gx.contains(&r, &s),
                        range: Pt::Real(r),
                        source: Pt::Real(s),
                    },
                },
            }
        }
        _ => unreachable!("conjugation preserves the kind of space"),
    }
}

/// `u^γ/w` on one open graph piece.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioPiece {
    pub comp: usize,
    pub lo: Rational,
    pub hi: Rational,
    pub map: Affine,
    /// `u^γ` along the piece.
    pub num: Affine,
    /// `w` along the piece.
    pub den: Affine,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingLimits {
    pub range: Rational,
    pub source: Rational,
    pub value: Rational,
    pub limits: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionRatio {
    Finite(BTreeMap<(usize, usize), Rational>),
    Interval {
        pieces: Vec<RatioPiece>,
        /// Values at every edge over a breakpoint: `(range, source, ratio)`.
        points: Vec<(Rational, Rational, Rational)>,
        branching: Vec<BranchingLimits>,
    },
}

impl TransitionRatio {
    /// Infimum and supremum over the graph (piece limits included).
    pub fn bounds(&self) -> (Rational, Rational) {
        let vals: Vec<Rational> = match self {
            TransitionRatio::Finite(m) => m.values().cloned().collect(),
            TransitionRatio::Interval { pieces, points, .. } => pieces
                .iter()
                .flat_map(|p| [&p.lo, &p.hi].map(|x| p.num.eval(x) / p.den.eval(x)))
                .chain(points.iter().map(|p| p.2.clone()))
                .collect(),
        };
        let mut it = vals.into_iter();
        let first = it.next().unwrap_or_else(Rational::one);
        it.fold((first.clone(), first), |(lo, hi), v| (min_q(&lo, &v), max_q(&hi, &v)))
    }

    /// Ratio at a single edge.
    pub fn at(&self, range: &Pt, source: &Pt) -> Option<Rational> {
        match (self, range, source) {
            (TransitionRatio::Finite(m), Pt::Atom(r), Pt::Atom(s)) => m.get(&(*r, *s)).cloned(),
            (TransitionRatio::Interval { pieces, points, .. }, Pt::Real(r), Pt::Real(s)) => {
                if let Some(p) = points.iter().find(|p| &p.0 == r && &p.1 == s) {
                    return Some(p.2.clone());
                }
                pieces
                    .iter()
                    .find(|p| &p.lo < s && s < &p.hi && &p.map.eval(s) == r)
                    .map(|p| p.num.eval(s) / p.den.eval(s))
            }
            _ => None,
        }
    }
}

/// Sorted union of the breakpoints of two systems over the same space.
fn joint_breaks(a: &IntervalSystem, bg: &IntervalSystem, comp: usize, extra: &[Rational]) -> Vec<Rational> {
    let mut xs = a.breakpoints(comp, extra);
    xs.extend(bg.breakpoints(comp, &[]));
    xs.sort();
    xs.dedup();
    xs
}

/// `u^γ/w` with one-sided limit data at every branching edge; requires the
/// graphs to agree.
pub fn transition_ratio(a: &Wps, b: &Wps, gamma: &Gamma) -> Result<TransitionRatio> {
    let bg = conjugate_system(b, gamma, &a.space())?;
    if !graph_verdict(a, &bg).holds() {
        return Err(Error::Precondition("graphs are not conjugate under gamma".into()));
    }
    Ok(ratio_of(a, &bg))
}

fn ratio_of(a: &Wps, bg: &Wps) -> TransitionRatio {
    match (a, bg) {
        (Wps::Finite(x), Wps::Finite(y)) => {
            let gy = y.graph();
            TransitionRatio::Finite(
                x.graph().into_iter().map(|(e, info)| (e, &gy[&e].weight / info.weight)).collect(),
            )
        }
        (Wps::Interval(x), Wps::Interval(y)) => interval_ratio(x, y),
        _ => unreachable!(),
    }
}

fn interval_ratio(a: &IntervalSystem, bg: &IntervalSystem) -> TransitionRatio {
    let mut pieces = Vec::new();
    let mut points = Vec::new();
    for c in 0..a.components.len() {
        let breaks = joint_breaks(a, bg, c, &[]);
        for (k, p) in breaks.iter().enumerate() {
            let ue = bg.edges_from(p).expect("point of the space");
            for e in a.edges_from(p).expect("point of the space") {
                let u = ue.iter().find(|f| f.range == e.range).expect("equal graphs");
                points.push((e.range.clone(), p.clone(), &u.weight / &e.weight));
            }
            if let Some(q) = breaks.get(k + 1) {
                let ul = bg.lines_on(c, p, q);
                for l in a.lines_on(c, p, q) {
                    let u = ul.iter().find(|m| m.map == l.map).expect("equal graphs");
                    pieces.push(RatioPiece {
                        comp: c,
                        lo: p.clone(),
                        hi: q.clone(),
                        map: l.map,
                        num: u.weight.clone(),
                        den: l.weight,
                    });
                }
            }
        }
    }
    let mut branching = Vec::new();
    for (r, s) in a.branching_edges() {
        let value = points.iter().find(|p| p.0 == r && p.1 == s).expect("edge over a breakpoint").2.clone();
        let limits = pieces
            .iter()
            .filter(|p| (p.lo == s || p.hi == s) && p.map.eval(&s) == r)
            .map(|p| p.num.eval(&s) / p.den.eval(&s))
            .collect();
        branching.push(BranchingLimits { range: r, source: s, value, limits });
    }
    TransitionRatio::Interval { pieces, points, branching }
}

/// Branch-transition conjugacy under a fixed `γ`.
pub fn check_branch_transition(a: &Wps, b: &Wps, gamma: &Gamma) -> Result<Verdict> {
    let bg = conjugate_system(b, gamma, &a.space())?;
    let g = graph_verdict(a, &bg);
    if !g.holds() {
        return Ok(g);
    }
    Ok(btc_verdict(&ratio_of(a, &bg)))
}

fn btc_verdict(ratio: &TransitionRatio) -> Verdict {
    match ratio {
        TransitionRatio::Finite(m) => Verdict::Holds {
            detail: format!("discrete space: the ratio is continuous on all {} edges", m.len()),
            certificate: None,
        },
        TransitionRatio::Interval { branching, .. } => {
            for b in branching {
                if b.limits.iter().any(|l| *l != b.value) {
                    return Verdict::Fails {
                        detail: format!(
                            "u^γ/w is discontinuous at the branching edge ({}, {})",
                            Show(&b.range),
                            Show(&b.source)
                        ),
                        witness: Witness::LimitMismatch {
                            range: Pt::Real(b.range.clone()),
                            source: Pt::Real(b.source.clone()),
                            value: b.value.clone(),
                            limits: b.limits.clone(),
                        },
                    };
                }
            }
            Verdict::Holds {
                detail: format!("u^γ/w is continuous at all {} branching edges", branching.len()),
                certificate: None,
            }
        }
    }
}

/// Gap values forced by boundedness of path products on self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcedLoop {
    pub comp: usize,
    pub lo: Rational,
    pub hi: Rational,
    /// `H = w / u^γ` on the self-loops over the open interval.
    pub w: Affine,
    pub u: Affine,
}

/// `∏ H(e) = value` over a periodic cycle of edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleConstraint {
    /// Edges `(range, source)` in traversal order.
    pub edges: Vec<(Pt, Pt)>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcedH {
    pub loops: Vec<ForcedLoop>,
    /// `(fixed point, forced H)` at isolated self-loop edges over breakpoints.
    pub points: Vec<(Pt, Rational)>,
    pub cycles: Vec<CycleConstraint>,
    pub verdict: Verdict,
}

const MAX_FORCED_CYCLE: usize = 4;

/// Values of `H` forced by any weighted-orbit certificate, and the verdict
/// `Fails` when they cannot belong to a continuous function.
pub fn forced_h_values(a: &Wps, b: &Wps, gamma: &Gamma) -> Result<ForcedH> {
    let bg = conjugate_system(b, gamma, &a.space())?;
    let g = graph_verdict(a, &bg);
    if !g.holds() {
        return Err(Error::Precondition("graphs are not conjugate under gamma".into()));
    }
    Ok(match (a, &bg) {
        (Wps::Finite(x), Wps::Finite(y)) => forced_finite(x, y),
        (Wps::Interval(x), Wps::Interval(y)) => forced_interval(x, y),
        _ => unreachable!(),
    })
}

fn forced_finite(a: &FiniteSystem, bg: &FiniteSystem) -> ForcedH {
    let ga = a.graph();
    let gb = bg.graph();
    let forced = |e: &(usize, usize)| &ga[e].weight / &gb[e].weight;
    let points = ga.keys().filter(|(r, s)| r == s).map(|e| (Pt::Atom(e.0), forced(e))).collect();
    let adj: BTreeMap<usize, Vec<usize>> = ga.keys().fold(BTreeMap::new(), |mut m, (r, s)| {
        m.entry(*s).or_default().push(*r);
        m
    });
    let cycles = simple_cycles(&adj, MAX_FORCED_CYCLE)
        .into_iter()
        .map(|cyc| {
            let edges: Vec<(usize, usize)> =
                (0..cyc.len()).map(|k| (cyc[(k + 1) % cyc.len()], cyc[k])).collect();
            CycleConstraint {
                value: edges.iter().map(&forced).product(),
                edges: edges.into_iter().map(|(r, s)| (Pt::Atom(r), Pt::Atom(s))).collect(),
            }
        })
        .collect();
    ForcedH {
        loops: Vec::new(),
        points,
        cycles,
        verdict: Verdict::Inconclusive {
            reason: "on a discrete space forced values always extend continuously".into(),
            depth: 0,
        },
    }
}

fn forced_interval(a: &IntervalSystem, bg: &IntervalSystem) -> ForcedH {
    let mut loops = Vec::new();
    let mut points = Vec::new();
    let mut arcs: BTreeMap<Rational, Vec<Rational>> = BTreeMap::new();
    let mut forced_at: BTreeMap<(Rational, Rational), Rational> = BTreeMap::new();
    let mut failure = None;
    for c in 0..a.components.len() {
        let breaks = joint_breaks(a, bg, c, &[]);
        let mut cell_loops: Vec<Option<ForcedLoop>> = Vec::new();
        for (k, p) in breaks.iter().enumerate() {
            if let Some(q) = breaks.get(k + 1) {
                let ul = bg.lines_on(c, p, q);
                let found = a.lines_on(c, p, q).into_iter().find(|l| l.map == Affine::identity()).map(|l| {
                    let u = ul.iter().find(|m| m.map == l.map).expect("equal graphs");
                    ForcedLoop { comp: c, lo: p.clone(), hi: q.clone(), w: l.weight, u: u.weight.clone() }
                });
                cell_loops.push(found);
            }
        }
        for (k, p) in breaks.iter().enumerate() {
            let ue = bg.edges_from(p).expect("point");
            for e in a.edges_from(p).expect("point") {
                let u = &ue.iter().find(|f| f.range == e.range).expect("equal graphs").weight;
                let value = &e.weight / u;
                forced_at.insert((e.range.clone(), p.clone()), value.clone());
                if component_of(&a.components, &e.range) == Some(c) && breaks.contains(&e.range) {
                    arcs.entry(p.clone()).or_default().push(e.range.clone());
                }
                if e.range != *p {
                    continue;
                }
                points.push((Pt::Real(p.clone()), value.clone()));
                let neighbours = [k.checked_sub(1).and_then(|j| cell_loops[j].as_ref()), cell_loops.get(k).and_then(Option::as_ref)];
                for l in neighbours.into_iter().flatten() {
                    let limit = l.w.eval(p) / l.u.eval(p);
                    if limit != value && failure.is_none() {
                        failure = Some(Witness::ForcedDiscontinuity {
                            point: p.clone(),
                            forced: value.clone(),
                            limit,
                        });
                    }
                }
            }
        }
        loops.extend(cell_loops.into_iter().flatten());
    }
    // cycles through breakpoints that map onto breakpoints
    let mut index: BTreeMap<Rational, usize> = BTreeMap::new();
    for (s, rs) in &arcs {
        let n = index.len();
        index.entry(s.clone()).or_insert(n);
        for r in rs {
            let n = index.len();
            index.entry(r.clone()).or_insert(n);
        }
    }
    let names: Vec<Rational> = {
        let mut v = vec![Rational::one(); index.len()];
        for (q, &i) in &index {
            v[i] = q.clone();
        }
        v
    };
    let adj: BTreeMap<usize, Vec<usize>> =
        arcs.iter().map(|(s, rs)| (index[s], rs.iter().map(|r| index[r]).collect())).collect();
    let cycles = simple_cycles(&adj, MAX_FORCED_CYCLE)
        .into_iter()
        .map(|cyc| {
            let edges: Vec<(Rational, Rational)> = (0..cyc.len())
                .map(|k| (names[cyc[(k + 1) % cyc.len()]].clone(), names[cyc[k]].clone()))
                .collect();
            CycleConstraint {
                value: edges.iter().map(|e| forced_at[e].clone()).product(),
                edges: edges.into_iter().map(|(r, s)| (Pt::Real(r), Pt::Real(s))).collect(),
            }
        })
        .collect();
    let verdict = match failure {
        Some(w) => {
            let detail = match &w {
                Witness::ForcedDiscontinuity { point, forced, limit } => format!(
                    "boundedness forces H({p}, {p}) = {} but H → {} along nearby self-loops, so no continuous H exists",
                    Show(forced),
                    Show(limit),
                    p = Show(point)
                ),
                _ => unreachable!(),
            };
            Verdict::Fails { detail, witness: w }
        }
        None => Verdict::Inconclusive {
            reason: "forced values are consistent with a continuous H; a certificate is needed".into(),
            depth: 0,
        },
    };
    ForcedH { loops, points, cycles, verdict }
}

/// Simple cycles of length `<= max_len`, each listed once starting from its
/// smallest vertex.
fn simple_cycles(adj: &BTreeMap<usize, Vec<usize>>, max_len: usize) -> Vec<Vec<usize>> {
    fn walk(
        adj: &BTreeMap<usize, Vec<usize>>,
        start: usize,
        path: &mut Vec<usize>,
        max_len: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        let mut next: Vec<usize> = adj.get(&v).cloned().unwrap_or_default();
        next.sort();
        next.dedup();
        for w in next {
            if w == start {
                out.push(path.clone());
            } else if w > start && !path.contains(&w) && path.len() < max_len {
                path.push(w);
                walk(adj, start, path, max_len, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for &s in adj.keys() {
        walk(adj, s, &mut vec![s], max_len, &mut out);
    }
    out
}

/// Factor `(u^γ/w)(e)·H(e)` of the edge reached by branch `i` from `x`.
fn step_factor(a: &Wps, bg: &Wps, h: &Gap, x: &Pt, i: usize) -> Result<(Pt, Rational)> {
    match (a, bg, x) {
        (Wps::Finite(sa), Wps::Finite(sb), Pt::Atom(s)) => {
            let (r, _) = sa
                .branches
                .get(i)
                .and_then(|b| b.entries.get(s))
                .ok_or_else(|| Error::Domain(format!("branch {i} is not defined at {}", sa.label(*s))))?;
            let e = (*r, *s);
            let ratio = sb.edge_weight(e)? / sa.edge_weight(e)?;
            let hv = match h {
                Gap::Edges(m) => m.get(&e).cloned().ok_or_else(|| Error::Certificate("H misses an edge".into()))?,
                Gap::WeightRatio => ratio.recip(),
                Gap::Branches(_) => return Err(Error::Certificate("branch H on a finite space".into())),
            };
            Ok((Pt::Atom(*r), ratio * hv))
        }
        (Wps::Interval(sa), Wps::Interval(sb), Pt::Real(s)) => {
            let br = sa.branches.get(i).ok_or_else(|| Error::Domain(format!("no branch {i}")))?;
            let r = br.map.evaluate(s)?;
            let ratio = sb.edge_weight(&r, s)? / sa.edge_weight(&r, s)?;
            let hv = match h {
                Gap::Branches(hs) => hs[i].evaluate(s)?,
                Gap::WeightRatio => ratio.recip(),
                Gap::Edges(_) => return Err(Error::Certificate("edge-table H on an interval space".into())),
            };
            Ok((Pt::Real(r), ratio * hv))
        }
        _ => Err(Error::Precondition("witness point does not match the space".into())),
    }
}

/// Recomputes a path witness from the raw branch data, independently of
/// how it was found. Returns the product of the factors.
pub fn replay_path(a: &Wps, b: &Wps, cert: &Certificate, source: &Pt, steps: &[usize]) -> Result<Rational> {
    let bg = conjugate_system(b, &cert.gamma, &a.space())?;
    let mut x = source.clone();
    let mut product = Rational::one();
    for &i in steps {
        let (next, f) = step_factor(a, &bg, &cert.h, &x, i)?;
        product *= f;
        x = next;
    }
    Ok(product)
}

/// True when the witness re-verifies: for a path, its recomputed product
/// leaves `[1/C, C]` on the stated side; for limit data, the transition
/// ratio recomputes identically.
pub fn replay_witness(a: &Wps, b: &Wps, gamma: &Gamma, cert: Option<&Certificate>, w: &Witness) -> Result<bool> {
    match w {
        Witness::Path(p) => {
            let cert = cert.ok_or_else(|| Error::Argument("a path witness needs the certificate".into()))?;
            let product = replay_path(a, b, cert, &p.source, &p.steps)?;
            Ok(product == p.product
                && match p.side {
                    Side::Upper => product > cert.c,
                    Side::Lower => product * &cert.c < Rational::one(),
                })
        }
        Witness::LimitMismatch { range, source, value, limits } => {
            let ratio = transition_ratio(a, b, gamma)?;
            if let TransitionRatio::Interval { branching, .. } = ratio {
                Ok(branching.iter().any(|bl| {
                    Pt::Real(bl.range.clone()) == *range
                        && Pt::Real(bl.source.clone()) == *source
                        && bl.value == *value
                        && bl.limits == *limits
                        && limits.iter().any(|l| l != value)
                }))
            } else {
                Ok(false)
            }
        }
        Witness::ForcedDiscontinuity { point, forced, limit } => {
            let f = forced_h_values(a, b, gamma)?;
            let at_point = f.points.iter().any(|(p, v)| *p == Pt::Real(point.clone()) && v == forced);
            let along = f.loops.iter().any(|l| {
                (l.lo == *point || l.hi == *point) && &(l.w.eval(point) / l.u.eval(point)) == limit
            });
            Ok(at_point && along && forced != limit)
        }
        Witness::GraphMismatch { range, source, in_first } => {
            let bg = conjugate_system(b, gamma, &a.space())?;
            let member = |s: &Wps| match (s, range, source) {
                (Wps::Finite(f), Pt::Atom(r), Pt::Atom(x)) => f.graph().contains_key(&(*r, *x)),
                (Wps::Interval(f), Pt::Real(r), Pt::Real(x)) => f.edges_from(x).is_ok_and(|es| es.iter().any(|e| &e.range == r)),
                _ => false,
            };
            Ok(member(a) == *in_first && member(&bg) != *in_first)
        }
        Witness::NoIsomorphism { .. } => match (a, b) {
            (Wps::Finite(x), Wps::Finite(y)) => Ok(exhaustive_isomorphism(x, y).is_none()),
            _ => Ok(false),
        },
    }
}

/// Verifies a weighted-orbit certificate. `depth` bounds the number of
/// refinement rounds used on interval spaces.
pub fn verify_weighted_orbit_certificate(a: &Wps, b: &Wps, cert: &Certificate, depth: usize) -> Result<Verdict> {
    if cert.c < Rational::one() {
        return Err(Error::Certificate(format!("C must be at least 1, got {}", Show(&cert.c))));
    }
    let bg = conjugate_system(b, &cert.gamma, &a.space())?;
    let g = graph_verdict(a, &bg);
    if !g.holds() {
        return Ok(g);
    }
    if cert.h == Gap::WeightRatio {
        // every factor is 1; H is continuous exactly when the ratio is
        return Ok(match btc_verdict(&ratio_of(a, &bg)) {
            Verdict::Holds { .. } => Verdict::Holds {
                detail: "H = w/u^γ is continuous and every path product equals 1".into(),
                certificate: Some(cert.clone()),
            },
            Verdict::Fails { detail, .. } => {
                return Err(Error::Certificate(format!("H = w/u^γ is not continuous: {detail}")))
            }
            other => other,
        });
    }
    match (a, &bg) {
        (Wps::Finite(x), Wps::Finite(y)) => finite::verify_finite(x, y, cert),
        (Wps::Interval(x), Wps::Interval(y)) => orbit::verify_interval(x, y, cert, depth),
        _ => unreachable!(),
    }
}

/// Which relation to decide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Graph,
    BranchTransition,
    WeightedOrbit,
}

impl Relation {
    pub fn name(&self) -> &'static str {
        match self {
            Relation::Graph => "graph",
            Relation::BranchTransition => "btc",
            Relation::WeightedOrbit => "woc",
        }
    }
}

/// Outcome of [`decide`], with the homeomorphism it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub gamma: Option<Gamma>,
    /// Number of candidate homeomorphisms examined when none was supplied.
    pub candidates: usize,
    pub notes: Vec<String>,
}

/// Default refinement depth for interval certificates.
pub const DEFAULT_DEPTH: usize = 8;

/// Decides a relation. Without `gamma` or a certificate, finite spaces
/// search all bijections; interval spaces try the heuristic candidates of
/// [`candidate_homeomorphisms`], and a `Fails` then speaks for those
/// candidates only.
pub fn decide(
    a: &Wps,
    b: &Wps,
    relation: Relation,
    gamma: Option<&Gamma>,
    cert: Option<&Certificate>,
    depth: usize,
) -> Result<Decision> {
    if let (Some(cert), Relation::WeightedOrbit) = (cert, relation) {
        let verdict = verify_weighted_orbit_certificate(a, b, cert, depth)?;
        return Ok(Decision { verdict, gamma: Some(cert.gamma.clone()), candidates: 1, notes: Vec::new() });
    }
    let supplied = gamma.or(cert.map(|c| &c.gamma));
    if let (Wps::Finite(x), Wps::Finite(y), None) = (a, b, supplied) {
        return Ok(match relation {
            Relation::WeightedOrbit => {
                let verdict = decide_weighted_orbit_finite(x, y)?;
                let gamma = match &verdict {
                    Verdict::Holds { certificate: Some(c), .. } => Some(c.gamma.clone()),
                    _ => None,
                };
                Decision { verdict, gamma, candidates: 1, notes: Vec::new() }
            }
            _ => match find_graph_conjugacy_finite(x, y)? {
                Some(t) => {
                    let g = Gamma::Bijection(t);
                    let verdict = match relation {
                        Relation::Graph => check_graph_conjugacy(a, b, &g)?,
                        _ => check_branch_transition(a, b, &g)?,
                    };
                    Decision { verdict, gamma: Some(g), candidates: 1, notes: Vec::new() }
                }
                None => Decision {
                    verdict: Verdict::Fails {
                        detail: "the graphs are not isomorphic".into(),
                        witness: Witness::NoIsomorphism { reason: finite::non_isomorphism_reason(x, y) },
                    },
                    gamma: None,
                    candidates: 1,
                    notes: Vec::new(),
                },
            },
        });
    }
    let gammas: Vec<Gamma> = match supplied {
        Some(g) => vec![g.clone()],
        None => candidate_homeomorphisms(a, b)?,
    };
    let relative = supplied.is_none();
    let mut notes = Vec::new();
    if relative {
        notes.push(format!("no gamma supplied; tried {} candidate homeomorphism(s)", gammas.len()));
    }
    let mut first_fail: Option<(Verdict, Gamma)> = None;
    let mut inconclusive: Option<(Verdict, Gamma)> = None;
    let mut admissible = 0usize;
    for g in &gammas {
        let graph = check_graph_conjugacy(a, b, g)?;
        if !graph.holds() {
            if !relative {
                return Ok(Decision { verdict: graph, gamma: Some(g.clone()), candidates: 1, notes });
            }
            continue;
        }
        admissible += 1;
        let verdict = match relation {
            Relation::Graph => graph,
            Relation::BranchTransition => check_branch_transition(a, b, g)?,
            Relation::WeightedOrbit => match check_branch_transition(a, b, g)? {
                Verdict::Holds { .. } => verify_weighted_orbit_certificate(
                    a,
                    b,
                    &Certificate { gamma: g.clone(), h: Gap::WeightRatio, c: Rational::one() },
                    depth,
                )?,
                _ => match a {
                    Wps::Finite(_) => unreachable!("finite graph conjugacy implies branch-transition conjugacy"),
                    Wps::Interval(_) => forced_h_values(a, b, g)?.verdict,
                },
            },
        };
        match verdict {
            Verdict::Holds { .. } => {
                return Ok(Decision { verdict, gamma: Some(g.clone()), candidates: gammas.len(), notes })
            }
            Verdict::Fails { .. } => {
                first_fail.get_or_insert((verdict, g.clone()));
            }
            Verdict::Inconclusive { .. } => {
                inconclusive.get_or_insert((verdict, g.clone()));
            }
        }
    }
    if relative && admissible > 0 {
        notes.push(format!("{admissible} candidate(s) conjugate the graphs"));
    }
    let (verdict, gamma) = match (inconclusive, first_fail) {
        (Some((v, g)), _) => (v, Some(g)),
        (None, Some((v, g))) => (v, Some(g)),
        (None, None) => (
            Verdict::Inconclusive {
                reason: format!("none of the {} candidate homeomorphisms conjugates the graphs", gammas.len()),
                depth: 0,
            },
            None,
        ),
    };
    Ok(Decision { verdict, gamma, candidates: gammas.len(), notes })
}

/// Checks that `H` is a positive, continuous gap function for `a`.
pub(crate) fn validate_branch_gap(a: &IntervalSystem, hs: &[PlFunc]) -> Result<()> {
    if hs.len() != a.branches.len() {
        return Err(Error::Certificate(format!(
            "H has {} branch functions but the system has {} branches",
            hs.len(),
            a.branches.len()
        )));
    }
    for (i, (h, br)) in hs.iter().zip(&a.branches).enumerate() {
        if h.domain() != br.map.domain() {
            return Err(Error::Certificate(format!("H for branch {i} is not defined on the branch domain")));
        }
        for knots in h.pieces().values() {
            if knots.iter().any(|(_, v)| !v.is_positive()) {
                return Err(Error::Certificate(format!("H for branch {i} is not strictly positive")));
            }
        }
    }
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let common = crate::spaces::solve_equal(&a.branches[i].map, &a.branches[j].map);
            for part in common.parts() {
                let c = component_of(&a.components, &part.lo).expect("point of the space");
                let mut xs = vec![part.lo.clone(), part.hi.clone()];
                for (x, _) in hs[i].knots(c).iter().chain(hs[j].knots(c)) {
                    if x > &part.lo && x < &part.hi {
                        xs.push(x.clone());
                    }
                }
                if let Some(x) = xs.iter().find(|x| hs[i].eval_in(c, x) != hs[j].eval_in(c, x)) {
                    return Err(Error::Certificate(format!(
                        "H is not well defined: branches {i} and {j} share the edge over {} but give {} and {}",
                        Show(x),
                        Show(&hs[i].eval_in(c, x)),
                        Show(&hs[j].eval_in(c, x))
                    )));
                }
            }
        }
    }
    Ok(())
}
