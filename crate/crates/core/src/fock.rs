//! Truncated Fock representation of a finite system.
//!
//! The fiber over `x` is `⊕_{n≤N} ℓ²(paths of length n from x)` with the
//! path weights `w(μ)` as inner-product weights. An element
//! `T = Σ_n S^{(n)}_{ξ_n}` acts by concatenation, `(S_ξ η)(νμ) = ξ(μ)η(ν)`,
//! where `ν` is the part of the path nearest the source.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::correspondence::{paths, real, Cq, Multiplier, PathSpace, Quiver};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};

/// Scalars a [`FourierElement`] can carry.
pub trait Scalar:
    Clone + PartialEq + std::fmt::Debug + Zero + One + std::ops::Add<Output = Self> + std::ops::Mul<Output = Self> + 'static
{
    fn from_rational(q: &Rational) -> Self;
    fn to_c64(&self) -> Complex64;
}

impl Scalar for Cq {
    fn from_rational(q: &Rational) -> Self {
        real(q.clone())
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

impl Scalar for Complex64 {
    fn from_rational(q: &Rational) -> Self {
        Complex64::new(to_f64(q), 0.0)
    }

    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Largest total basis size (over all fibers) a [`FockSpace`] will build.
pub const BASIS_CAP: usize = 200_000;

/// Path bases of all fibers up to level `N`.
#[derive(Debug, Clone)]
pub struct FockSpace {
    pub quiver: Quiver,
    pub level: usize,
    /// `spaces[n]` is `Gr(σⁿ)`.
    pub spaces: Vec<PathSpace>,
    /// Basis of each fiber: paths (edge lists from the source), shortest first.
    pub bases: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl FockSpace {
    pub fn new(quiver: &Quiver, level: usize) -> Result<FockSpace> {
        let mut spaces = Vec::with_capacity(level + 1);
        let mut total = 0;
        for n in 0..=level {
            let s = paths(quiver, n)?;
            total += s.paths.len();
            if total > BASIS_CAP {
                return Err(Error::Resource { cap: BASIS_CAP, partial: total });
            }
            spaces.push(s);
        }
        let mut bases = vec![Vec::new(); quiver.points];
        for s in &spaces {
            for k in 0..s.paths.len() {
                bases[s.source(quiver, k)].push(s.paths[k].clone());
            }
        }
        let index = bases.iter().map(|b| b.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect()).collect();
        Ok(FockSpace { quiver: quiver.clone(), level, spaces, bases, index })
    }

    pub fn dim(&self, x: usize) -> usize {
        self.bases[x].len()
    }

    fn end(&self, x: usize, path: &[usize]) -> usize {
        path.last().map_or(x, |&e| self.quiver.edges[e].0)
    }

    /// Value of a degree-`n` coefficient on a path; the empty path at `x`
    /// reads the degree-0 coefficient at `x`.
    fn coeff_at<S: Scalar>(&self, n: usize, c: &[S], x: usize, path: &[usize]) -> S {
        if n == 0 {
            return c[x].clone();
        }
        c[self.spaces[n].position(path).expect("path of the right length")].clone()
    }
}

/// A finite Fourier series `T = Σ_{n≤N} S^{(n)}_{ξ_n}`; `coeffs[n]` is
/// aligned with `Gr(σⁿ)` (with the points for `n = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierElement<S: Scalar = Cq> {
    pub level: usize,
    pub coeffs: BTreeMap<usize, Vec<S>>,
}

pub type FloatElement = FourierElement<Complex64>;

impl<S: Scalar> FourierElement<S> {
    pub fn zero(level: usize) -> Self {
        FourierElement { level, coeffs: BTreeMap::new() }
    }

    /// A single band `S^{(n)}_ξ`.
    pub fn band(level: usize, n: usize, xi: Vec<S>) -> Self {
        FourierElement { level, coeffs: BTreeMap::from([(n, xi)]) }
    }

    /// The shift `W` by the constant function on edges.
    pub fn shift_one(space: &FockSpace) -> Self {
        Self::band(space.level, 1, vec![S::one(); space.spaces[1].paths.len()])
    }

    pub fn identity(space: &FockSpace) -> Self {
        Self::band(space.level, 0, vec![S::one(); space.quiver.points])
    }

    pub fn check(&self, space: &FockSpace) -> Result<()> {
        for (&n, c) in &self.coeffs {
            if n > space.level || n > self.level {
                return Err(Error::Argument(format!("degree {n} exceeds the truncation level")));
            }
            if c.len() != space.spaces[n].paths.len() {
                return Err(Error::Argument(format!(
                    "degree {n} needs {} values, got {}",
                    space.spaces[n].paths.len(),
                    c.len()
                )));
            }
        }
        Ok(())
    }

    fn is_zero_coeff(c: &[S]) -> bool {
        c.iter().all(Zero::is_zero)
    }

    /// `Φ_n(T)`.
    pub fn fourier(&self, n: usize) -> Self {
        match self.coeffs.get(&n) {
            Some(c) => Self::band(self.level, n, c.clone()),
            None => Self::zero(self.level),
        }
    }

    pub fn to_float(&self) -> FloatElement {
        FourierElement {
            level: self.level,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, c.iter().map(Scalar::to_c64).collect())).collect(),
        }
    }

    /// Removes zero coefficients.
    pub fn trimmed(mut self) -> Self {
        self.coeffs.retain(|_, c| !Self::is_zero_coeff(c));
        self
    }
}

impl FloatElement {
    /// `α_λ(T) = Σ λⁿ S_{ξ_n}`.
    pub fn gauge(&self, lambda: Complex64) -> FloatElement {
        FourierElement {
            level: self.level,
            coeffs: self.coeffs.iter().map(|(&n, c)| (n, c.iter().map(|v| v * lambda.powu(n as u32)).collect())).collect(),
        }
    }
}

/// Smallest `n` with `Φ_n(T) ≠ 0`.
pub fn min_degree<S: Scalar>(t: &FourierElement<S>) -> Result<usize> {
    t.coeffs
        .iter()
        .find(|(_, c)| !FourierElement::<S>::is_zero_coeff(c))
        .map(|(&n, _)| n)
        .ok_or_else(|| Error::Argument("the minimal degree of 0 is undefined".into()))
}

/// Coefficients of `TT′`: `ζ_n = Σ_k ξ_k ⊗ η_{n−k}`, truncated at the level.
pub fn series_product<S: Scalar>(space: &FockSpace, t: &FourierElement<S>, u: &FourierElement<S>) -> Result<FourierElement<S>> {
    t.check(space)?;
    u.check(space)?;
    let level = space.level.min(t.level).min(u.level);
    let mut out = BTreeMap::new();
    for (&k, xi) in &t.coeffs {
        for (&m, eta) in &u.coeffs {
            let n = k + m;
            if n > level {
                continue;
            }
            let target = out.entry(n).or_insert_with(|| vec![S::zero(); space.spaces[n].paths.len()]);
            if n == 0 {
                for x in 0..space.quiver.points {
                    target[x] = target[x].clone() + xi[x].clone() * eta[x].clone();
                }
                continue;
            }
            for (pos, p) in space.spaces[n].paths.iter().enumerate() {
                let x = space.spaces[n].source(&space.quiver, pos);
                let (nu, mu) = p.split_at(m);
                let mid = space.end(x, nu);
                let v = space.coeff_at(k, xi, mid, mu) * space.coeff_at(m, eta, x, nu);
                target[pos] = target[pos].clone() + v;
            }
        }
    }
    Ok(FourierElement { level, coeffs: out })
}

/// Cesàro mean `σ_K(T) = Σ (1 − n/(K+1)) S_{ξ_n}`, dropping degrees above `K`.
pub fn cesaro<S: Scalar>(t: &FourierElement<S>, k: usize) -> FourierElement<S> {
    FourierElement {
        level: t.level,
        coeffs: t
            .coeffs
            .iter()
            .filter(|(&n, _)| n <= k)
            .map(|(&n, c)| {
                let f = S::from_rational(&(Rational::one() - Rational::new(n.into(), (k + 1).into())));
                (n, c.iter().map(|v| v.clone() * f.clone()).collect())
            })
            .collect(),
    }
}

/// Fejér kernel `k_n(λ) = Σ_{|j|≤n} (1 − |j|/(n+1)) λ^j`.
pub fn fejer_kernel(n: usize, lambda: Complex64) -> Complex64 {
    (-(n as i64)..=n as i64)
        .map(|j| lambda.powi(j as i32) * (1.0 - j.unsigned_abs() as f64 / (n as f64 + 1.0)))
        .sum()
}

/// Per-fiber matrices in the path basis (not normalized by the weights).
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix<S: Scalar> {
    pub fibers: Vec<DMatrix<S>>,
}

/// The matrix of `T` on every fiber.
pub fn matrix<S: Scalar>(space: &FockSpace, t: &FourierElement<S>) -> Result<FockMatrix<S>> {
    t.check(space)?;
    let mut fibers = Vec::with_capacity(space.quiver.points);
    for x in 0..space.quiver.points {
        let dim = space.dim(x);
        let mut m = DMatrix::from_element(dim, dim, S::zero());
        for (col, nu) in space.bases[x].iter().enumerate() {
            let mid = space.end(x, nu);
            for (&n, c) in &t.coeffs {
                if nu.len() + n > space.level {
                    continue;
                }
                if n == 0 {
                    m[(col, col)] = m[(col, col)].clone() + c[mid].clone();
                    continue;
                }
                for (pos, mu) in space.spaces[n].paths.iter().enumerate() {
                    if space.quiver.edges[mu[0]].1 != mid {
                        continue;
                    }
                    let mut row_path = nu.clone();
                    row_path.extend_from_slice(mu);
                    let row = space.index[x][&row_path];
                    m[(row, col)] = m[(row, col)].clone() + c[pos].clone();
                }
            }
        }
        fibers.push(m);
    }
    Ok(FockMatrix { fibers })
}

impl<S: Scalar> FockMatrix<S> {
    pub fn mul(&self, other: &FockMatrix<S>) -> FockMatrix<S> {
        FockMatrix {
            fibers: self
                .fibers
                .iter()
                .zip(&other.fibers)
                .map(|(a, b)| {
                    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
                    DMatrix::from_fn(n, m, |i, j| {
                        (0..k).fold(S::zero(), |acc, l| acc + a[(i, l)].clone() * b[(l, j)].clone())
                    })
                })
                .collect(),
        }
    }

    pub fn to_float(&self) -> FockMatrix<Complex64> {
        FockMatrix { fibers: self.fibers.iter().map(|m| m.map(|v| v.to_c64())).collect() }
    }

    /// Reads the Fourier coefficients back from the columns of the empty
    /// paths: `ξ_n(μ)` is the entry at row `μ`, column `s(μ)`.
    pub fn coefficients(&self, space: &FockSpace) -> FourierElement<S> {
        let mut coeffs = BTreeMap::new();
        for n in 0..=space.level {
            let c: Vec<S> = if n == 0 {
                (0..space.quiver.points).map(|x| self.fibers[x][(0, 0)].clone()).collect()
            } else {
                space.spaces[n]
                    .paths
                    .iter()
                    .enumerate()
                    .map(|(pos, p)| {
                        let x = space.spaces[n].source(&space.quiver, pos);
                        self.fibers[x][(space.index[x][p], 0)].clone()
                    })
                    .collect()
            };
            if !c.iter().all(Zero::is_zero) {
                coeffs.insert(n, c);
            }
        }
        FourierElement { level: space.level, coeffs }
    }
}

impl FockMatrix<Complex64> {
    /// `α_λ`: the entry at (row, column) picks up `λ^{|row| − |column|}`.
    pub fn gauge(&self, space: &FockSpace, lambda: Complex64) -> FockMatrix<Complex64> {
        FockMatrix {
            fibers: self
                .fibers
                .iter()
                .enumerate()
                .map(|(x, m)| {
                    let len = |i: usize| space.bases[x][i].len() as i32;
                    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * lambda.powi(len(i) - len(j)))
                })
                .collect(),
        }
    }

    /// `Φ_n` as the discrete gauge average over the `2N+1`-th roots of
    /// unity, exact for matrices whose bands have degree at most `N`.
    pub fn fourier_by_gauge(&self, space: &FockSpace, n: i32) -> FockMatrix<Complex64> {
        let m = 2 * space.level + 1;
        let mut acc: Vec<DMatrix<Complex64>> = self.fibers.iter().map(|f| DMatrix::zeros(f.nrows(), f.ncols())).collect();
        for j in 0..m {
            let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
            let g = self.gauge(space, omega);
            let scale = omega.powi(-n) / m as f64;
            for (a, f) in acc.iter_mut().zip(&g.fibers) {
                *a += f * scale;
            }
        }
        FockMatrix { fibers: acc }
    }

    pub fn max_abs_diff(&self, other: &FockMatrix<Complex64>) -> f64 {
        self.fibers
            .iter()
            .zip(&other.fibers)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// Spectral norm of `T` on the Fock module of a graph with the given edge
/// weights: the largest singular value of `D·M·D⁻¹` over all fibers, with
/// `D = diag(√w(μ))`.
pub fn op_norm_weighted<S: Scalar>(space: &FockSpace, weights: &[Rational], t: &FourierElement<S>) -> Result<f64> {
    let m = matrix(space, t)?.to_float();
    let w: Vec<f64> = weights.iter().map(to_f64).collect();
    let mut best: f64 = 0.0;
    for (x, f) in m.fibers.iter().enumerate() {
        let d: Vec<f64> = space.bases[x].iter().map(|p| p.iter().map(|&e| w[e]).product::<f64>().sqrt()).collect();
        let scaled = DMatrix::from_fn(f.nrows(), f.ncols(), |i, j| f[(i, j)] * (d[i] / d[j]));
        let s = scaled.singular_values();
        best = best.max(s.iter().copied().fold(0.0, f64::max));
    }
    Ok(best)
}

/// `‖T‖` on the Fock module of the space's own system.
pub fn op_norm<S: Scalar>(space: &FockSpace, t: &FourierElement<S>) -> Result<f64> {
    op_norm_weighted(space, &space.quiver.weights, t)
}

/// `Ad_V(T)`: `ξ_n ↦ V^{⊗n}ξ_n`, i.e. `ξ_n(μ)·∏ √H(μ_k)`. The result lives
/// on the target system; measure it with [`op_norm_weighted`] and the
/// multiplier's target weights.
pub fn ad_v<S: Scalar>(space: &FockSpace, t: &FourierElement<S>, v: &Multiplier) -> Result<FloatElement> {
    t.check(space)?;
    if v.quiver.edges != space.quiver.edges {
        return Err(Error::Argument("the multiplier lives on a different graph".into()));
    }
    let zeta: Vec<f64> = v.h.iter().map(|h| to_f64(h).sqrt()).collect();
    Ok(FourierElement {
        level: t.level,
        coeffs: t
            .coeffs
            .iter()
            .map(|(&n, c)| {
                let vals = c
                    .iter()
                    .enumerate()
                    .map(|(pos, val)| {
                        let scale: f64 = if n == 0 { 1.0 } else { space.spaces[n].paths[pos].iter().map(|&e| zeta[e]).product() };
                        val.to_c64() * scale
                    })
                    .collect();
                (n, vals)
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::wps::FiniteSystem;

    fn quiver(m: &[&[i64]]) -> Quiver {
        let rows: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        Quiver::new(&FiniteSystem::from_matrix(labels, &rows).unwrap())
    }

    #[test]
    fn self_loop_shift_is_a_truncated_isometry() {
        let q = quiver(&[&[1]]);
        let space = FockSpace::new(&q, 3).unwrap();
        let w: FourierElement = FourierElement::shift_one(&space);
        let m = matrix(&space, &w).unwrap().to_float();
        assert_eq!(m.fibers[0].nrows(), 4);
        assert!((op_norm(&space, &w).unwrap() - 1.0).abs() < 1e-12);
        let id: FourierElement = FourierElement::identity(&space);
        assert!((op_norm(&space, &id).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(min_degree(&w).unwrap(), 1);
    }

    #[test]
    fn fejer_values() {
        assert!((fejer_kernel(1, Complex64::new(1.0, 0.0)) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matrix_round_trip() {
        let q = quiver(&[&[0, 1], &[2, 1]]);
        let space = FockSpace::new(&q, 3).unwrap();
        let w: FourierElement = FourierElement::shift_one(&space);
        let t = series_product(&space, &w, &w).unwrap();
        assert_eq!(matrix(&space, &t).unwrap().coefficients(&space), t.clone().trimmed());
    }
}
