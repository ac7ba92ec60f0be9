//! Characters over fixed points: discs of radius `√w(x,x)`, evaluation
//! `θ_{x,z}(T) = Σ ξ_n(x,…,x) zⁿ`, Möbius automorphisms of the unit disc and
//! the zeroing pair `(λ, γ)`.

use num_complex::Complex64;

use crate::conjugacy::Pt;
use crate::correspondence::Quiver;
use crate::error::{Error, Result};
use crate::fock::{FockSpace, FourierElement, Scalar};
use crate::rational::{to_f64, Rational};
use crate::spaces::Subset;
use crate::wps::Wps;

const TOL: f64 = 1e-12;

/// A fixed point with the squared radius `w(x,x)` of its disc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscDatum {
    pub point: Pt,
    pub radius_sq: Rational,
}

/// Discs of a system: one per isolated fixed point, and the fixed
/// intervals on which the radius is given by [`radius_sq_at`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscData {
    pub discs: Vec<DiscDatum>,
    pub intervals: Vec<(Rational, Rational)>,
}

pub fn disc_data(sys: &Wps) -> Result<DiscData> {
    match (sys, sys.fixed_points()) {
        (Wps::Finite(s), Subset::Atoms(xs)) => Ok(DiscData {
            discs: xs
                .into_iter()
                .map(|x| Ok(DiscDatum { point: Pt::Atom(x), radius_sq: s.edge_weight((x, x))? }))
                .collect::<Result<_>>()?,
            intervals: Vec::new(),
        }),
        (Wps::Interval(s), Subset::Reals(set)) => {
            let mut discs = Vec::new();
            let mut intervals = Vec::new();
            for part in set.parts() {
                let (lo, hi) = (&part.lo, &part.hi);
                if lo == hi {
                    discs.push(DiscDatum { point: Pt::Real(lo.clone()), radius_sq: s.edge_weight(lo, lo)? });
                } else {
                    intervals.push((lo.clone(), hi.clone()));
                }
            }
            Ok(DiscData { discs, intervals })
        }
        _ => unreachable!("fixed points live in the system's own space"),
    }
}

/// `w(x,x)` at a fixed point.
pub fn radius_sq_at(sys: &Wps, x: &Pt) -> Result<Rational> {
    let r = match (sys, x) {
        (Wps::Finite(s), Pt::Atom(i)) => s.edge_weight((*i, *i)),
        (Wps::Interval(s), Pt::Real(v)) => s.edge_weight(v, v),
        _ => return Err(Error::Argument("point does not belong to the system's space".into())),
    };
    r.map_err(|_| Error::Domain(format!("{} is not a fixed point", x.describe(sys))))
}

/// `θ_{x,z}(T)`. At a non-fixed point only `z = 0` is allowed.
pub fn eval_character<S: Scalar>(space: &FockSpace, t: &FourierElement<S>, x: usize, z: Complex64) -> Result<Complex64> {
    t.check(space)?;
    let q: &Quiver = &space.quiver;
    let looped = q.edge_index(x, x);
    let radius_sq = looped.map_or(0.0, |e| to_f64(&q.weights[e]));
    if z.norm_sqr() > radius_sq + TOL * (1.0 + radius_sq) {
        return Err(Error::Domain(format!("|z|² = {} exceeds the disc radius² {radius_sq}", z.norm_sqr())));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (&n, c) in &t.coeffs {
        let v = if n == 0 {
            c[x].to_c64()
        } else {
            let Some(e) = looped else { continue };
            match space.spaces[n].position(&vec![e; n]) {
                Some(pos) => c[pos].to_c64(),
                None => continue,
            }
        };
        acc += v * z.powu(n as u32);
    }
    Ok(acc)
}

/// `f(z) = e^{iθ}(w − z)/(1 − w̄z)` with `|w| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub theta: f64,
    pub w: Complex64,
}

impl Mobius {
    pub fn new(theta: f64, w: Complex64) -> Result<Mobius> {
        if w.norm() >= 1.0 {
            return Err(Error::Domain(format!("center {w} is not in the open unit disc")));
        }
        Ok(Mobius { theta: theta.rem_euclid(std::f64::consts::TAU), w })
    }

    pub fn identity() -> Mobius {
        Mobius { theta: std::f64::consts::PI, w: Complex64::new(0.0, 0.0) }
    }

    /// `z ↦ λz` for unimodular `λ`.
    pub fn rotation(lambda: Complex64) -> Mobius {
        Mobius { theta: (-lambda).arg().rem_euclid(std::f64::consts::TAU), w: Complex64::new(0.0, 0.0) }
    }

    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > 1.0 + TOL {
            return Err(Error::Domain(format!("|z| = {} exceeds 1", z.norm())));
        }
        Ok(self.eval(z))
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        self.phase() * (self.w - z) / (1.0 - self.w.conj() * z)
    }

    /// Coefficients `[a, b, c, d]` of `(az + b)/(cz + d)`.
    pub fn matrix(&self) -> [Complex64; 4] {
        let p = self.phase();
        [-p, p * self.w, -self.w.conj(), Complex64::new(1.0, 0.0)]
    }

    /// Back to the canonical form: `w = −b/a`, `e^{iθ} = −a/d`.
    pub fn from_matrix(m: [Complex64; 4]) -> Result<Mobius> {
        let [a, b, _, d] = m;
        Mobius::new((-a / d).arg(), -b / a)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Mobius) -> Mobius {
        let [a, b, c, d] = self.matrix();
        let [e, f, g, h] = inner.matrix();
        Mobius::from_matrix([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
            .expect("disc automorphisms compose to a disc automorphism")
    }

    pub fn invert(&self) -> Mobius {
        let [a, b, c, d] = self.matrix();
        Mobius::from_matrix([d, -b, -c, a]).expect("disc automorphisms invert to a disc automorphism")
    }
}

/// `γ = (1+h)/2 + i√(1 − ((1+h)/2)²)` and `λ = (γ − 1)/(γ − h)` for
/// `0 ≤ h < 1`. Returns `(λ, γ)`.
pub fn solve_zeroing_pair(h: f64) -> Result<(Complex64, Complex64)> {
    if !(0.0..1.0).contains(&h) {
        return Err(Error::Domain(format!("h = {h} is outside [0, 1)")));
    }
    let re = (1.0 + h) / 2.0;
    let gamma = Complex64::new(re, (1.0 - re * re).sqrt());
    let lambda = (gamma - 1.0) / (gamma - h);
    Ok((lambda, gamma))
}

/// `|(f ∘ rot_γ ∘ f⁻¹ ∘ rot_λ ∘ f)(0)|` for the zeroing pair of `h = |w|²`.
pub fn zeroing_residual(f: &Mobius) -> Result<f64> {
    let (lambda, gamma) = solve_zeroing_pair(f.w.norm_sqr())?;
    verify_zeroing_composition(f, &f.invert(), lambda, gamma)
}

pub fn verify_zeroing_composition(f: &Mobius, f_inv: &Mobius, lambda: Complex64, gamma: Complex64) -> Result<f64> {
    let z = f.apply(Complex64::new(0.0, 0.0))?;
    let z = Mobius::rotation(lambda).apply(z)?;
    let z = f_inv.apply(z)?;
    let z = Mobius::rotation(gamma).apply(z)?;
    Ok(f.apply(z)?.norm())
}

/// Result of [`semi_gradedness_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    /// Indices with `f_x(0) ≠ 0`.
    pub not_zeroed: Vec<usize>,
    /// For each of those: `(λ, γ, residual)` of the zeroing correction.
    pub corrections: Vec<(Complex64, Complex64, f64)>,
}

impl Probe {
    pub fn semi_graded(&self) -> bool {
        self.not_zeroed.is_empty()
    }
}

/// Which maps of a per-fixed-point family fail to fix 0, and the
/// corrections that zero them.
pub fn semi_gradedness_probe(family: &[Mobius]) -> Result<Probe> {
    let mut not_zeroed = Vec::new();
    let mut corrections = Vec::new();
    for (i, f) in family.iter().enumerate() {
        if f.w.norm() > TOL {
            let (lambda, gamma) = solve_zeroing_pair(f.w.norm_sqr())?;
            not_zeroed.push(i);
            corrections.push((lambda, gamma, verify_zeroing_composition(f, &f.invert(), lambda, gamma)?));
        }
    }
    Ok(Probe { not_zeroed, corrections })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_rotation() {
        let id = Mobius::identity();
        let z = Complex64::new(0.3, -0.4);
        assert!((id.apply(z).unwrap() - z).norm() < 1e-15);
        let i = Complex64::new(0.0, 1.0);
        assert!((Mobius::rotation(i).apply(z).unwrap() - i * z).norm() < 1e-15);
    }

    #[test]
    fn zeroing_pair_examples() {
        let (lambda, gamma) = solve_zeroing_pair(0.5).unwrap();
        assert!((gamma - Complex64::new(0.75, 7f64.sqrt() / 4.0)).norm() < 1e-15);
        assert!(((gamma - 1.0).norm() - (gamma - 0.5).norm()).abs() < 1e-15);
        assert!((lambda.norm() - 1.0).abs() < 1e-12);
        let f = Mobius::new(1.1, Complex64::new(0.3, 0.0)).unwrap();
        assert!(zeroing_residual(&f).unwrap() < 1e-9);
        assert!(solve_zeroing_pair(1.0).is_err());
    }
}
