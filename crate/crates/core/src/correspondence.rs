//! The quiver correspondence of a finite system: functions on `Gr(σ)` with
//! the fiberwise inner product `⟨ξ,η⟩(x) = Σ_{s(e)=x} ξ̄(e) w(e) η(e)`,
//! path spaces `Gr(σⁿ)`, and multipliers `V(ξ)(e) = ζ(e)ξ(e)`.
//!
//! Scalars are complex numbers with exact rational parts.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::conjugacy::{conjugate_system, Certificate, Gap};
use crate::cycles::{max_product, max_product_exact_length, Arc, ProductBound};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::wps::{FiniteSystem, Wps};

/// Exact complex scalar.
pub type Cq = Complex<Rational>;

pub fn cq(re: Rational, im: Rational) -> Cq {
    Complex::new(re, im)
}

pub fn real(x: Rational) -> Cq {
    Complex::new(x, Rational::zero())
}

/// `|z|²`.
pub fn abs_sq(z: &Cq) -> Rational {
    &z.re * &z.re + &z.im * &z.im
}

/// The graph of a finite system with its edge weights, edges in a fixed
/// order (sorted by `(range, source)`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    pub points: usize,
    pub edges: Vec<(usize, usize)>,
    pub weights: Vec<Rational>,
    /// Largest number of branches at any point.
    pub d: usize,
}

impl Quiver {
    pub fn new(sys: &FiniteSystem) -> Quiver {
        let (edges, weights) = sys.graph().into_iter().map(|(e, info)| (e, info.weight)).unzip();
        let d = (0..sys.len())
            .map(|x| sys.branches.iter().filter(|b| b.entries.contains_key(&x)).count())
            .max()
            .unwrap_or(0);
        Quiver { points: sys.len(), edges, weights, d }
    }

    pub fn edge_index(&self, range: usize, source: usize) -> Option<usize> {
        self.edges.binary_search(&(range, source)).ok()
    }

    /// Edges leaving each point, as edge indices.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.points];
        for (k, &(_, s)) in self.edges.iter().enumerate() {
            out[s].push(k);
        }
        out
    }
}

/// An element of the correspondence: one value per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrElement {
    pub values: Vec<Cq>,
}

impl CorrElement {
    pub fn constant(q: &Quiver, c: Cq) -> CorrElement {
        CorrElement { values: vec![c; q.edges.len()] }
    }

    /// `f⊙g : e ↦ f(r(e)) g(s(e))`.
    pub fn simple(q: &Quiver, f: &[Cq], g: &[Cq]) -> CorrElement {
        CorrElement { values: q.edges.iter().map(|&(r, s)| &f[r] * &g[s]).collect() }
    }

    fn check(&self, q: &Quiver) -> Result<()> {
        if self.values.len() == q.edges.len() {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "element has {} values but the graph has {} edges",
                self.values.len(),
                q.edges.len()
            )))
        }
    }
}

/// `⟨ξ,η⟩` as a function on the points.
pub fn inner_product(q: &Quiver, xi: &CorrElement, eta: &CorrElement) -> Result<Vec<Cq>> {
    xi.check(q)?;
    eta.check(q)?;
    let mut out = vec![real(Rational::zero()); q.points];
    for (k, &(_, s)) in q.edges.iter().enumerate() {
        out[s] += xi.values[k].conj() * real(q.weights[k].clone()) * &eta.values[k];
    }
    Ok(out)
}

/// `‖ξ‖² = sup_x ⟨ξ,ξ⟩(x)`.
pub fn norm_sq(q: &Quiver, xi: &CorrElement) -> Result<Rational> {
    Ok(inner_product(q, xi, xi)?.into_iter().map(|z| z.re).max().unwrap_or_else(Rational::zero))
}

/// `‖ξ‖∞² = max_e |ξ(e)|²`.
pub fn sup_norm_sq(xi: &CorrElement) -> Rational {
    xi.values.iter().map(abs_sq).max().unwrap_or_else(Rational::zero)
}

/// `(f·ξ·g)(e) = f(r(e)) ξ(e) g(s(e))`.
pub fn module_action(q: &Quiver, f: &[Cq], xi: &CorrElement, g: &[Cq]) -> Result<CorrElement> {
    xi.check(q)?;
    Ok(CorrElement {
        values: q.edges.iter().zip(&xi.values).map(|(&(r, s), v)| &f[r] * v * &g[s]).collect(),
    })
}

/// All paths of a fixed length, each a list of edge indices `μ_1, …, μ_n`
/// starting at the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSpace {
    pub n: usize,
    pub paths: Vec<Vec<usize>>,
}

impl PathSpace {
    pub fn source(&self, q: &Quiver, k: usize) -> usize {
        match self.paths[k].first() {
            Some(&e) => q.edges[e].1,
            None => k,
        }
    }

    /// Vertex sequence `s(μ_1), r(μ_1), …, r(μ_n)`.
    pub fn vertices(&self, q: &Quiver, k: usize) -> Vec<usize> {
        let mut v = vec![self.source(q, k)];
        v.extend(self.paths[k].iter().map(|&e| q.edges[e].0));
        v
    }

    pub fn position(&self, path: &[usize]) -> Option<usize> {
        self.paths.binary_search_by(|p| p.as_slice().cmp(path)).ok()
    }
}

/// Number of paths enumerated before [`paths`] gives up.
pub const PATH_CAP: usize = 1_000_000;

/// `Gr(σⁿ)`; for `n = 0` one empty path per point.
pub fn paths(q: &Quiver, n: usize) -> Result<PathSpace> {
    let out_edges = q.out_edges();
    if n == 0 {
        return Ok(PathSpace { n, paths: vec![Vec::new(); q.points] });
    }
    let mut cur: Vec<Vec<usize>> = (0..q.edges.len()).map(|e| vec![e]).collect();
    for _ in 1..n {
        let mut next = Vec::new();
        for p in &cur {
            let end = q.edges[*p.last().unwrap()].0;
            for &e in &out_edges[end] {
                if next.len() >= PATH_CAP {
                    return Err(Error::Resource { cap: PATH_CAP, partial: next.len() });
                }
                let mut np = p.clone();
                np.push(e);
                next.push(np);
            }
        }
        cur = next;
    }
    cur.sort();
    Ok(PathSpace { n, paths: cur })
}

/// `w(μ) = ∏ w(μ_k)`.
pub fn path_weight(q: &Quiver, path: &[usize]) -> Rational {
    path.iter().map(|&e| q.weights[e].clone()).product()
}

/// A function on `Gr(σⁿ)`, aligned with a [`PathSpace`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathFunction {
    pub values: Vec<Cq>,
}

/// `μ ↦ ξ_n(μ_n)⋯ξ_1(μ_1)`, with `factors[k]` applied to `μ_{k+1}` (listed
/// from the source end).
pub fn tensor(q: &Quiver, space: &PathSpace, factors: &[&CorrElement]) -> Result<PathFunction> {
    if factors.len() != space.n {
        return Err(Error::Argument(format!("{} factors for paths of length {}", factors.len(), space.n)));
    }
    for f in factors {
        f.check(q)?;
    }
    Ok(PathFunction {
        values: space
            .paths
            .iter()
            .map(|p| p.iter().zip(factors).fold(real(Rational::one()), |acc, (&e, f)| acc * &f.values[e]))
            .collect(),
    })
}

/// `⟨Ξ,Η⟩(x) = Σ_{s(μ)=x} Ξ̄(μ) w(μ) Η(μ)`.
pub fn path_inner_product(q: &Quiver, space: &PathSpace, a: &PathFunction, b: &PathFunction) -> Vec<Cq> {
    let mut out = vec![real(Rational::zero()); q.points];
    for (k, p) in space.paths.iter().enumerate() {
        out[space.source(q, k)] += a.values[k].conj() * real(path_weight(q, p)) * &b.values[k];
    }
    out
}

pub fn path_norm_sq(q: &Quiver, space: &PathSpace, a: &PathFunction) -> Rational {
    path_inner_product(q, space, a, a).into_iter().map(|z| z.re).max().unwrap_or_else(Rational::zero)
}

/// A multiplier `V(ξ)(e) = ζ(e)ξ(e)` from the correspondence of `a` to that
/// of `b^γ`, stored through `H = |ζ|²` per edge of the common graph.
/// `factor[e] = H(e)·u^γ(e)/w(e)` is what every norm depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplier {
    pub quiver: Quiver,
    pub h: Vec<Rational>,
    pub target_weights: Vec<Rational>,
    pub factor: Vec<Rational>,
}

impl Multiplier {
    pub fn new(quiver: Quiver, target_weights: Vec<Rational>, h: Vec<Rational>) -> Result<Multiplier> {
        if h.len() != quiver.edges.len() || target_weights.len() != quiver.edges.len() {
            return Err(Error::Argument("multiplier data must have one value per edge".into()));
        }
        if h.iter().chain(&target_weights).any(|v| *v <= Rational::zero()) {
            return Err(Error::Argument("multiplier data must be strictly positive".into()));
        }
        let factor = h.iter().zip(&target_weights).zip(&quiver.weights).map(|((h, u), w)| h * u / w).collect();
        Ok(Multiplier { quiver, h, target_weights, factor })
    }

    /// `V⁻¹`, from `b^γ` back to `a`.
    pub fn inverse(&self) -> Multiplier {
        let q = Quiver { weights: self.target_weights.clone(), ..self.quiver.clone() };
        Multiplier::new(q, self.quiver.weights.clone(), self.h.iter().map(Rational::recip).collect())
            .expect("inverse of a valid multiplier")
    }

    /// `‖Vξ‖²` measured with the target weights.
    pub fn image_norm_sq(&self, xi: &CorrElement) -> Result<Rational> {
        xi.check(&self.quiver)?;
        let target = Quiver { weights: self.target_weights.clone(), ..self.quiver.clone() };
        let scaled = CorrElement {
            values: xi.values.iter().zip(&self.h).map(|(v, h)| v * real(h.clone())).collect(),
        };
        let sq = inner_product(&target, xi, &scaled)?;
        Ok(sq.into_iter().map(|z| z.re).max().unwrap_or_else(Rational::zero))
    }

    fn arcs(&self) -> Vec<Arc> {
        self.quiver
            .edges
            .iter()
            .zip(&self.factor)
            .map(|(&(r, s), g)| Arc { from: s, to: r, label: g.clone() })
            .collect()
    }
}

/// The multiplier `V(ξ) = √H·ξ` of a finite weighted-orbit certificate.
pub fn multiplier_from_certificate(a: &Wps, b: &Wps, cert: &Certificate) -> Result<Multiplier> {
    let Wps::Finite(sa) = a else {
        return Err(Error::Unsupported("multipliers are computed on finite spaces".into()));
    };
    let bg = conjugate_system(b, &cert.gamma, &a.space())?;
    let sb = bg.as_finite()?;
    let qa = Quiver::new(sa);
    let qb = Quiver::new(sb);
    if qa.edges != qb.edges {
        return Err(Error::Argument("the certificate's gamma does not conjugate the graphs".into()));
    }
    let h = match &cert.h {
        Gap::WeightRatio => qa.weights.iter().zip(&qb.weights).map(|(w, u)| w / u).collect(),
        Gap::Edges(m) => qa
            .edges
            .iter()
            .map(|e| m.get(e).cloned().ok_or_else(|| Error::Certificate("H is missing on an edge".into())))
            .collect::<Result<_>>()?,
        Gap::Branches(_) => return Err(Error::Certificate("finite spaces need an edge-table H".into())),
    };
    Multiplier::new(qa, qb.weights, h)
}

/// `‖V^{⊗n}‖² = max` over paths of length `n` of `∏ H·u^γ/w`; zero when
/// there are no such paths.
pub fn tensor_power_norm_sq(v: &Multiplier, n: usize) -> Rational {
    max_product_exact_length(v.quiver.points, &v.arcs(), n).into_iter().max().unwrap_or_else(Rational::zero)
}

/// Outcome of [`is_tensor_power_bounded`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PowerBound {
    /// `sup_n ‖V^{⊗n}‖² = sup` (counting `n = 0`, so `sup ≥ 1`).
    Bounded { sup: Rational },
    /// A cycle of edge indices whose factor product exceeds one.
    Unbounded { cycle: Vec<usize>, product: Rational },
}

pub fn is_tensor_power_bounded(v: &Multiplier) -> PowerBound {
    match max_product(v.quiver.points, &v.arcs()) {
        ProductBound::Bounded { sup, .. } => PowerBound::Bounded { sup },
        ProductBound::Pumping { cycle, product } => PowerBound::Unbounded { cycle, product },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn quiver(m: &[&[i64]]) -> Quiver {
        let rows: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        Quiver::new(&FiniteSystem::from_matrix(labels, &rows).unwrap())
    }

    #[test]
    fn single_edge_norm() {
        let q = quiver(&[&[4]]);
        let one = CorrElement::constant(&q, real(int(1)));
        assert_eq!(norm_sq(&q, &one).unwrap(), int(4));
    }

    #[test]
    fn two_cycle_paths_alternate() {
        let q = quiver(&[&[0, 1], &[1, 0]]);
        let p = paths(&q, 3).unwrap();
        assert_eq!(p.paths.len(), 2);
        for k in 0..2 {
            let v = p.vertices(&q, k);
            assert!(v.windows(2).all(|w| w[0] != w[1]));
        }
    }

    #[test]
    fn two_cycle_multiplier_prefix_effect() {
        let q = quiver(&[&[0, 1], &[1, 0]]);
        let e01 = q.edge_index(0, 1).unwrap();
        let mut h = vec![int(1); 2];
        h[e01] = int(2);
        h[1 - e01] = ratio(1, 2);
        let v = Multiplier::new(q.clone(), q.weights.clone(), h).unwrap();
        for n in 1..=12 {
            let expect = if n % 2 == 1 { int(2) } else { int(1) };
            assert_eq!(tensor_power_norm_sq(&v, n), expect);
        }
        assert_eq!(is_tensor_power_bounded(&v), PowerBound::Bounded { sup: int(2) });
    }

    #[test]
    fn self_loop_unbounded() {
        let q = quiver(&[&[1]]);
        let v = Multiplier::new(q.clone(), q.weights.clone(), vec![ratio(4, 3)]).unwrap();
        assert_eq!(tensor_power_norm_sq(&v, 3), ratio(64, 27));
        assert!(matches!(is_tensor_power_bounded(&v), PowerBound::Unbounded { .. }));
    }
}
