//! Compact base spaces, their clopen subsets, and exact piecewise-linear
//! functions with rational breakpoints.
//!
//! Two kinds of space are supported: a finite discrete set of labelled atoms
//! and a finite disjoint union of closed rational intervals `[a, b]`
//! (degenerate `[a, a]` components model isolated points). The only clopen
//! subsets of an interval space are unions of whole components, so a
//! [`ClopenSubset`] is just a set of atom or component indices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, Rational, Show};

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid(format!(
                "interval [{}, {}] has lo > hi",
                Show(&lo),
                Show(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() {
            write!(f, "{{{}}}", Show(&self.lo))
        } else {
            write!(f, "[{}, {}]", Show(&self.lo), Show(&self.hi))
        }
    }
}

/// The compact base space of a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Space {
    Finite { points: Vec<String> },
    Intervals { components: Vec<Interval> },
}

impl Space {
    pub fn finite(points: Vec<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("a finite space needs at least one point"));
        }
        let distinct: BTreeSet<&String> = points.iter().collect();
        if distinct.len() != points.len() {
            return Err(Error::invalid("duplicate point labels in finite space"));
        }
        Ok(Space::Finite { points })
    }

    pub fn intervals(mut components: Vec<Interval>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("an interval space needs at least one component"));
        }
        components.sort();
        for w in components.windows(2) {
            if w[0].hi >= w[1].lo {
                return Err(Error::invalid(format!(
                    "components {} and {} are not disjoint",
                    w[0], w[1]
                )));
            }
        }
        Ok(Space::Intervals { components })
    }

    /// Number of atoms (finite) or connected components (intervals).
    pub fn len(&self) -> usize {
        match self {
            Space::Finite { points } => points.len(),
            Space::Intervals { components } => components.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn whole(&self) -> ClopenSubset {
        ClopenSubset((0..self.len()).collect())
    }
}

/// Component of `x` in an interval space, if any.
pub fn component_of(components: &[Interval], x: &Rational) -> Option<usize> {
    components.iter().position(|c| c.contains(x))
}

/// A clopen subset: atom indices (finite) or whole-component indices (intervals).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClopenSubset(pub BTreeSet<usize>);

impl ClopenSubset {
    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn intersection(&self, other: &ClopenSubset) -> ClopenSubset {
        ClopenSubset(self.0.intersection(&other.0).copied().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `x -> slope * x + intercept`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Affine {
    pub slope: Rational,
    pub intercept: Rational,
}

impl Affine {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        Affine { slope, intercept }
    }

    pub fn identity() -> Self {
        Affine::new(int(1), int(0))
    }

    pub fn constant(c: Rational) -> Self {
        Affine::new(int(0), c)
    }

    /// Line through `(x0, y0)` and `(x1, y1)`, `x0 != x1`.
    pub fn through(x0: &Rational, y0: &Rational, x1: &Rational, y1: &Rational) -> Self {
        let slope = (y1 - y0) / (x1 - x0);
        let intercept = y0 - &slope * x0;
        Affine { slope, intercept }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Affine) -> Affine {
        Affine {
            slope: &self.slope * &inner.slope,
            intercept: &self.slope * &inner.intercept + &self.intercept,
        }
    }

    /// Unique `x` with `self(x) = y`, when the slope is non-zero.
    pub fn solve(&self, y: &Rational) -> Option<Rational> {
        if self.slope.is_zero() {
            None
        } else {
            Some((y - &self.intercept) / &self.slope)
        }
    }

    /// Fixed point of a non-identity line.
    pub fn fixed_point(&self) -> Option<Rational> {
        let d = int(1) - &self.slope;
        if d.is_zero() {
            None
        } else {
            Some(&self.intercept / d)
        }
    }

    pub fn poly(&self) -> crate::rational::Poly {
        crate::rational::Poly::linear(self.slope.clone(), self.intercept.clone())
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.slope.is_zero(), self.intercept.is_zero()) {
            (true, _) => write!(f, "{}", Show(&self.intercept)),
            (false, true) => write!(f, "{}·x", Show(&self.slope)),
            (false, false) => write!(f, "{}·x + {}", Show(&self.slope), Show(&self.intercept)),
        }
    }
}

/// Continuous piecewise-linear function on a union of components.
///
/// Each component carries knots `(x_k, y_k)` with strictly increasing `x_k`
/// running from the component's left to right endpoint; the function is the
/// affine interpolation between knots. Collinear interior knots are removed so
/// that structural equality is semantic equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlFunc {
    pieces: BTreeMap<usize, Vec<(Rational, Rational)>>,
}

impl PlFunc {
    /// Builds a function from per-component knots, validating them against
    /// the component geometry.
    pub fn new(
        components: &[Interval],
        pieces: BTreeMap<usize, Vec<(Rational, Rational)>>,
    ) -> Result<Self> {
        for (&c, knots) in &pieces {
            let comp = components
                .get(c)
                .ok_or_else(|| Error::invalid(format!("component index {c} out of range")))?;
            let (first, last) = match (knots.first(), knots.last()) {
                (Some(f), Some(l)) => (f, l),
                _ => return Err(Error::invalid(format!("component {c}: no knots"))),
            };
            if first.0 != comp.lo || last.0 != comp.hi {
                return Err(Error::invalid(format!(
                    "component {c}: knots must span {comp}, got [{}, {}]",
                    Show(&first.0),
                    Show(&last.0)
                )));
            }
            if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::invalid(format!(
                    "component {c}: breakpoints must be strictly increasing"
                )));
            }
        }
        Ok(PlFunc::from_raw(pieces))
    }

    fn from_raw(pieces: BTreeMap<usize, Vec<(Rational, Rational)>>) -> Self {
        let pieces = pieces
            .into_iter()
            .map(|(c, knots)| (c, simplify_knots(knots)))
            .collect();
        PlFunc { pieces }
    }

    pub fn constant(components: &[Interval], domain: &ClopenSubset, c: Rational) -> Self {
        Self::affine(components, domain, &Affine::constant(c))
    }

    pub fn identity(components: &[Interval], domain: &ClopenSubset) -> Self {
        Self::affine(components, domain, &Affine::identity())
    }

    pub fn affine(components: &[Interval], domain: &ClopenSubset, line: &Affine) -> Self {
        let pieces = domain
            .iter()
            .map(|c| {
                let comp = &components[c];
                let mut knots = vec![(comp.lo.clone(), line.eval(&comp.lo))];
                if !comp.is_degenerate() {
                    knots.push((comp.hi.clone(), line.eval(&comp.hi)));
                }
                (c, knots)
            })
            .collect();
        PlFunc::from_raw(pieces)
    }

    pub fn domain(&self) -> ClopenSubset {
        ClopenSubset(self.pieces.keys().copied().collect())
    }

    pub fn knots(&self, comp: usize) -> &[(Rational, Rational)] {
        self.pieces.get(&comp).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pieces(&self) -> &BTreeMap<usize, Vec<(Rational, Rational)>> {
        &self.pieces
    }

    fn locate(&self, x: &Rational) -> Option<usize> {
        self.pieces.iter().find_map(|(&c, k)| {
            (k.first().is_some_and(|f| &f.0 <= x) && k.last().is_some_and(|l| x <= &l.0))
                .then_some(c)
        })
    }

    /// Exact value at `x`.
    pub fn evaluate(&self, x: &Rational) -> Result<Rational> {
        let c = self.locate(x).ok_or_else(|| Error::Domain(format!("{} is outside the domain", Show(x))))?;
        Ok(eval_knots(&self.pieces[&c], x))
    }

    /// Value at a point of a known component.
    pub fn eval_in(&self, comp: usize, x: &Rational) -> Rational {
        eval_knots(&self.pieces[&comp], x)
    }

    /// Affine piece valid on the knot interval containing the open cell
    /// `(a, b)` (or the constant value on a degenerate component).
    pub fn line_on(&self, comp: usize, a: &Rational, b: &Rational) -> Affine {
        let knots = &self.pieces[&comp];
        if knots.len() == 1 {
            return Affine::constant(knots[0].1.clone());
        }
        let mid = (a + b) / int(2);
        let k = knots
            .windows(2)
            .position(|w| w[0].0 <= mid && mid <= w[1].0)
            .expect("cell inside component");
        let (p, q) = (&knots[k], &knots[k + 1]);
        Affine::through(&p.0, &p.1, &q.0, &q.1)
    }

    /// Minimum and maximum over each component of the domain.
    pub fn range(&self, comp: usize) -> (Rational, Rational) {
        let ys = self.pieces[&comp].iter().map(|k| &k.1);
        let mn = ys.clone().min().unwrap().clone();
        let mx = ys.max().unwrap().clone();
        (mn, mx)
    }

    pub fn restrict(&self, domain: &ClopenSubset) -> PlFunc {
        PlFunc {
            pieces: self
                .pieces
                .iter()
                .filter(|(c, _)| domain.contains(**c))
                .map(|(c, k)| (*c, k.clone()))
                .collect(),
        }
    }

    /// Pointwise map of the knot values (only meaningful for maps that
    /// commute with interpolation, e.g. scaling by a constant).
    pub fn map_values(&self, f: impl Fn(&Rational) -> Rational) -> PlFunc {
        PlFunc::from_raw(
            self.pieces
                .iter()
                .map(|(c, k)| (*c, k.iter().map(|(x, y)| (x.clone(), f(y))).collect()))
                .collect(),
        )
    }

    /// Pointwise sum over a common domain.
    pub fn add(&self, other: &PlFunc) -> Result<PlFunc> {
        self.combine(other, |a, b| a + b)
    }

    fn combine(&self, other: &PlFunc, op: impl Fn(&Rational, &Rational) -> Rational) -> Result<PlFunc> {
        if self.domain() != other.domain() {
            return Err(Error::Domain("functions have different domains".into()));
        }
        let mut pieces = BTreeMap::new();
        for (&c, k) in &self.pieces {
            let xs = merged_breaks(k, &other.pieces[&c]);
            let knots = xs
                .into_iter()
                .map(|x| {
                    let y = op(&eval_knots(k, &x), &eval_knots(&other.pieces[&c], &x));
                    (x, y)
                })
                .collect();
            pieces.insert(c, knots);
        }
        Ok(PlFunc::from_raw(pieces))
    }

    /// Exact composite `self ∘ inner`. `inner` maps its domain (in a space
    /// with components `inner_space`) into this function's domain.
    pub fn compose(&self, inner: &PlFunc) -> Result<PlFunc> {
        let mut pieces = BTreeMap::new();
        for (&c, knots) in &inner.pieces {
            let mut xs: Vec<Rational> = Vec::new();
            let mut outer_comp: Option<usize> = None;
            for (i, (x, y)) in knots.iter().enumerate() {
                let oc = self.locate(y).ok_or_else(|| {
                    Error::Domain(format!(
                        "composition: inner value {} at {} escapes the outer domain",
                        Show(y),
                        Show(x)
                    ))
                })?;
                match outer_comp {
                    None => outer_comp = Some(oc),
                    Some(prev) if prev != oc => {
                        return Err(Error::Domain(
                            "composition: inner image of a component spans two outer components".into(),
                        ))
                    }
                    _ => {}
                }
                xs.push(x.clone());
                if let Some((x1, y1)) = knots.get(i + 1) {
                    if y1 != y {
                        let line = Affine::through(x, y, x1, y1);
                        let (ylo, yhi) = if y < y1 { (y, y1) } else { (y1, y) };
                        for (t, _) in self.knots(oc) {
                            if t > ylo && t < yhi {
                                xs.push(line.solve(t).expect("non-constant segment"));
                            }
                        }
                    }
                }
            }
            xs.sort();
            xs.dedup();
            let oc = outer_comp.expect("component has knots");
            let out = xs
                .into_iter()
                .map(|x| {
                    let y = eval_knots(knots, &x);
                    let z = eval_knots(&self.pieces[&oc], &y);
                    (x, z)
                })
                .collect();
            pieces.insert(c, out);
        }
        Ok(PlFunc::from_raw(pieces))
    }

    /// Inverse of a per-component strictly monotone function whose component
    /// images are whole components of `target`. Fails when `self` is not
    /// such a map; use [`is_homeomorphism`] to test first.
    pub fn invert(&self, target: &[Interval]) -> Result<PlFunc> {
        let mut pieces = BTreeMap::new();
        for (&c, knots) in &self.pieces {
            if !strictly_monotone(knots) {
                return Err(Error::Precondition(format!("component {c}: map is not injective")));
            }
            let (lo, hi) = self.range(c);
            let t = target
                .iter()
                .position(|comp| comp.lo == lo && comp.hi == hi)
                .ok_or_else(|| Error::Precondition(format!("component {c}: image is not a whole component")))?;
            let mut inv: Vec<(Rational, Rational)> =
                knots.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
            inv.sort();
            if pieces.insert(t, inv).is_some() {
                return Err(Error::Precondition("two components map onto the same component".into()));
            }
        }
        Ok(PlFunc::from_raw(pieces))
    }
}

impl fmt::Display for PlFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for knots in self.pieces.values() {
            if !first {
                write!(f, "; ")?;
            }
            first = false;
            let parts: Vec<String> = knots
                .iter()
                .map(|(x, y)| format!("{}↦{}", Show(x), Show(y)))
                .collect();
            write!(f, "{}", parts.join(", "))?;
        }
        Ok(())
    }
}

fn eval_knots(knots: &[(Rational, Rational)], x: &Rational) -> Rational {
    if knots.len() == 1 {
        return knots[0].1.clone();
    }
    let k = knots
        .windows(2)
        .position(|w| &w[0].0 <= x && x <= &w[1].0)
        .expect("point inside component");
    let (p, q) = (&knots[k], &knots[k + 1]);
    if x == &p.0 {
        return p.1.clone();
    }
    Affine::through(&p.0, &p.1, &q.0, &q.1).eval(x)
}

fn simplify_knots(knots: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    if knots.len() <= 2 {
        return knots;
    }
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(knots.len());
    for k in knots {
        while out.len() >= 2 {
            let a = &out[out.len() - 2];
            let b = &out[out.len() - 1];
            let s1 = (&b.1 - &a.1) / (&b.0 - &a.0);
            let s2 = (&k.1 - &b.1) / (&k.0 - &b.0);
            if s1 == s2 {
                out.pop();
            } else {
                break;
            }
        }
        out.push(k);
    }
    out
}

fn merged_breaks(a: &[(Rational, Rational)], b: &[(Rational, Rational)]) -> Vec<Rational> {
    let mut xs: Vec<Rational> = a.iter().chain(b.iter()).map(|k| k.0.clone()).collect();
    xs.sort();
    xs.dedup();
    xs
}

fn strictly_monotone(knots: &[(Rational, Rational)]) -> bool {
    if knots.len() == 1 {
        return true;
    }
    let inc = knots.windows(2).all(|w| w[0].1 < w[1].1);
    let dec = knots.windows(2).all(|w| w[0].1 > w[1].1);
    inc || dec
}

/// True iff `gamma` is a homeomorphism between the two interval spaces:
/// defined on every source component, strictly monotone on each, and mapping
/// components bijectively onto components (endpoints to endpoints).
pub fn is_homeomorphism(gamma: &PlFunc, from: &[Interval], to: &[Interval]) -> bool {
    if from.len() != to.len() || gamma.domain() != ClopenSubset((0..from.len()).collect()) {
        return false;
    }
    gamma.invert(to).is_ok()
}

/// Finite union of closed rational intervals (points are degenerate intervals),
/// kept sorted and merged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointSet {
    parts: Vec<Interval>,
}

impl PointSet {
    pub fn empty() -> Self {
        PointSet::default()
    }

    pub fn from_parts(mut parts: Vec<Interval>) -> Self {
        parts.sort();
        let mut out: Vec<Interval> = Vec::new();
        for p in parts {
            if let Some(last) = out.last_mut() {
                if p.lo <= last.hi {
                    if p.hi > last.hi {
                        last.hi = p.hi;
                    }
                    continue;
                }
            }
            out.push(p);
        }
        PointSet { parts: out }
    }

    pub fn point(x: Rational) -> Self {
        PointSet { parts: vec![Interval { lo: x.clone(), hi: x }] }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        PointSet::from_parts(self.parts.iter().chain(other.parts.iter()).cloned().collect())
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut out = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                let lo = if a.lo > b.lo { &a.lo } else { &b.lo };
                let hi = if a.hi < b.hi { &a.hi } else { &b.hi };
                if lo <= hi {
                    out.push(Interval { lo: lo.clone(), hi: hi.clone() });
                }
            }
        }
        PointSet::from_parts(out)
    }

    /// Image under a homeomorphism given as a PL function.
    pub fn image(&self, f: &PlFunc) -> Result<PointSet> {
        let mut out = Vec::new();
        for p in &self.parts {
            let a = f.evaluate(&p.lo)?;
            let b = f.evaluate(&p.hi)?;
            out.push(if a <= b { Interval { lo: a, hi: b } } else { Interval { lo: b, hi: a } });
        }
        Ok(PointSet::from_parts(out))
    }

    /// Isolated points and interval endpoints, in order.
    pub fn endpoints(&self) -> Vec<Rational> {
        let mut v = Vec::new();
        for p in &self.parts {
            v.push(p.lo.clone());
            if !p.is_degenerate() {
                v.push(p.hi.clone());
            }
        }
        v
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join(" ∪ "))
    }
}

/// A subset of either kind of space, as produced by the structural queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Subset {
    Atoms(BTreeSet<usize>),
    Reals(PointSet),
}

impl Subset {
    pub fn is_empty(&self) -> bool {
        match self {
            Subset::Atoms(a) => a.is_empty(),
            Subset::Reals(p) => p.is_empty(),
        }
    }
}

/// `{x : f(x) = g(x)}` over the common domain, exactly.
pub fn solve_equal(f: &PlFunc, g: &PlFunc) -> PointSet {
    let common = f.domain().intersection(&g.domain());
    let mut parts = Vec::new();
    for c in common.iter() {
        let kf = f.knots(c);
        let kg = g.knots(c);
        if kf.len() == 1 {
            if kf[0].1 == kg[0].1 {
                parts.push(Interval { lo: kf[0].0.clone(), hi: kf[0].0.clone() });
            }
            continue;
        }
        let xs = merged_breaks(kf, kg);
        let diff: Vec<Rational> = xs.iter().map(|x| eval_knots(kf, x) - eval_knots(kg, x)).collect();
        for i in 0..xs.len() - 1 {
            let (d0, d1) = (&diff[i], &diff[i + 1]);
            let (x0, x1) = (&xs[i], &xs[i + 1]);
            if d0.is_zero() && d1.is_zero() {
                parts.push(Interval { lo: x0.clone(), hi: x1.clone() });
            } else if d0.is_zero() {
                parts.push(Interval { lo: x0.clone(), hi: x0.clone() });
            } else if d1.is_zero() {
                parts.push(Interval { lo: x1.clone(), hi: x1.clone() });
            } else if d0.is_positive() != d1.is_positive() {
                let r = x0 + d0 * (x1 - x0) / (d0 - d1);
                parts.push(Interval { lo: r.clone(), hi: r });
            }
        }
    }
    PointSet::from_parts(parts)
}
