//! Exact scalars and the small amount of polynomial machinery the rest of the
//! crate needs for piecewise-rational extrema.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for every exact quantity.
pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}` (expected `p/q` or an integer)")]
pub struct ParseRationalError(pub String);

/// Parses `p/q`, `-p/q` or a bare integer. Decimal notation is rejected so
/// that documents never carry rounded values.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Canonical `p/q` rendering (`p` when the denominator is one).
pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Wrapper for `Display` of a rational in canonical form.
pub struct Show<'a>(pub &'a Rational);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_rational(self.0))
    }
}

/// Exact square root when `q` is the square of a rational.
pub fn sqrt_exact(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Rational::new(rn, rd))
    } else {
        None
    }
}

/// Rational enclosure `[lo, hi]` of `sqrt(q)` with `hi - lo <= 2^-bits`.
pub fn sqrt_bracket(q: &Rational, bits: u32) -> (Rational, Rational) {
    if let Some(r) = sqrt_exact(q) {
        return (r.clone(), r);
    }
    // sqrt(n/d) = sqrt(n d) / d
    let nd = q.numer() * q.denom();
    let scale = BigInt::one() << bits;
    let s = (&nd * &scale * &scale).sqrt();
    let den = q.denom() * &scale;
    (
        Rational::new(s.clone(), den.clone()),
        Rational::new(s + 1, den),
    )
}

pub fn min_q(a: &Rational, b: &Rational) -> Rational {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_q(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    pub fn constant(c: Rational) -> Self {
        Poly(vec![c]).trimmed()
    }

    pub fn linear(slope: Rational, intercept: Rational) -> Self {
        Poly(vec![intercept, slope]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let out = (0..n)
            .map(|i| {
                let a = self.0.get(i).cloned().unwrap_or_else(Rational::zero);
                let b = other.0.get(i).cloned().unwrap_or_else(Rational::zero);
                a + b
            })
            .collect();
        Poly(out).trimmed()
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly(Vec::new());
        }
        let mut out = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
        .trimmed()
    }

    /// Sound enclosure of the polynomial over `[lo, hi]` by interval Horner.
    pub fn enclose(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let mut acc = (Rational::zero(), Rational::zero());
        for c in self.0.iter().rev() {
            let prods = [&acc.0 * lo, &acc.0 * hi, &acc.1 * lo, &acc.1 * hi];
            let mn = prods.iter().min().unwrap().clone();
            let mx = prods.iter().max().unwrap().clone();
            acc = (mn + c, mx + c);
        }
        acc
    }
}

/// Real roots of `p` inside the open interval `(a, b)`.
///
/// Exact roots are returned as degenerate brackets; irrational roots of a
/// quadratic come back as narrow rational brackets. Higher degrees fall back
/// to `None`, which callers treat as "bound by subdivision".
pub fn roots_in(p: &Poly, a: &Rational, b: &Rational) -> Option<Vec<(Rational, Rational)>> {
    let inside = |r: &Rational| r > a && r < b;
    match p.degree() {
        _ if p.is_zero() => Some(Vec::new()),
        0 => Some(Vec::new()),
        1 => {
            let r = -&p.0[0] / &p.0[1];
            Some(if inside(&r) { vec![(r.clone(), r)] } else { vec![] })
        }
        2 => {
            let (c, bb, aa) = (&p.0[0], &p.0[1], &p.0[2]);
            let disc = bb * bb - int(4) * aa * c;
            if disc.is_negative() {
                return Some(Vec::new());
            }
            let two_a = aa * int(2);
            let mut out = Vec::new();
            if let Some(s) = sqrt_exact(&disc) {
                for r in [(-bb + &s) / &two_a, (-bb - &s) / &two_a] {
                    if inside(&r) && !out.iter().any(|(x, _): &(Rational, Rational)| *x == r) {
                        out.push((r.clone(), r));
                    }
                }
            } else {
                let (slo, shi) = sqrt_bracket(&disc, 64);
                for sign in [1i64, -1] {
                    let e1 = (-bb + int(sign) * &slo) / &two_a;
                    let e2 = (-bb + int(sign) * &shi) / &two_a;
                    let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
                    if hi > *a && lo < *b {
                        out.push((max_q(&lo, a), min_q(&hi, b)));
                    }
                }
            }
            out.sort();
            Some(out)
        }
        _ => None,
    }
}

/// Quotient of polynomials; the denominator is assumed sign-definite on the
/// intervals where the function is bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFn {
    pub num: Poly,
    pub den: Poly,
}

/// Closed range `[lo, hi]` of a function over a closed interval. `exact` is
/// false when an irrational critical point forced a rational enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeBound {
    pub lo: Rational,
    pub hi: Rational,
    pub exact: bool,
}

impl RangeBound {
    pub fn point(v: Rational) -> Self {
        RangeBound { lo: v.clone(), hi: v, exact: true }
    }
}

impl RatFn {
    pub fn poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::constant(int(1)) }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        RatFn { num: self.num.mul(&other.num), den: self.den.mul(&other.den) }
    }

    pub fn recip(&self) -> RatFn {
        RatFn { num: self.den.clone(), den: self.num.clone() }
    }

    fn enclose(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let (nl, nh) = self.num.enclose(lo, hi);
        let (dl, dh) = self.den.enclose(lo, hi);
        let qs = [&nl / &dl, &nl / &dh, &nh / &dl, &nh / &dh];
        (qs.iter().min().unwrap().clone(), qs.iter().max().unwrap().clone())
    }

    /// Range over the closed interval `[a, b]`, evaluated at the endpoints and
    /// at every critical point inside.
    pub fn range_on(&self, a: &Rational, b: &Rational) -> RangeBound {
        let mut lo = min_q(&self.eval(a), &self.eval(b));
        let mut hi = max_q(&self.eval(a), &self.eval(b));
        if a == b {
            return RangeBound { lo, hi, exact: true };
        }
        let d = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        let mut exact = true;
        match roots_in(&d, a, b) {
            Some(roots) => {
                for (rl, rh) in roots {
                    if rl == rh {
                        let v = self.eval(&rl);
                        lo = min_q(&lo, &v);
                        hi = max_q(&hi, &v);
                    } else {
                        exact = false;
                        let (el, eh) = self.enclose(&rl, &rh);
                        lo = min_q(&lo, &el);
                        hi = max_q(&hi, &eh);
                    }
                }
            }
            None => {
                exact = false;
                let steps = 256;
                let width = (b - a) / int(steps);
                for k in 0..steps {
                    let l = a + &width * int(k);
                    let r = &l + &width;
                    let (el, eh) = self.enclose(&l, &r);
                    lo = min_q(&lo, &el);
                    hi = max_q(&hi, &eh);
                }
            }
        }
        RangeBound { lo, hi, exact }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" -4 ").unwrap(), int(-4));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(fmt_rational(&ratio(-2, 4)), "-1/2");
        assert_eq!(fmt_rational(&int(7)), "7");
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(sqrt_exact(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(sqrt_exact(&int(2)), None);
        let (lo, hi) = sqrt_bracket(&int(2), 40);
        assert!(&lo * &lo < int(2) && &hi * &hi > int(2));
        assert!(&hi - &lo < ratio(1, 1 << 39));
    }

    #[test]
    fn quadratic_roots_are_located() {
        // (x - 1/3)(x - 2/3)
        let p = Poly(vec![ratio(2, 9), int(-1), int(1)]);
        let roots = roots_in(&p, &int(0), &int(1)).unwrap();
        assert_eq!(roots, vec![(ratio(1, 3), ratio(1, 3)), (ratio(2, 3), ratio(2, 3))]);
        // x^2 - 2 has an irrational root inside (1, 2)
        let q = Poly(vec![int(-2), int(0), int(1)]);
        let roots = roots_in(&q, &int(1), &int(2)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].0 < roots[0].1);
    }

    #[test]
    fn ratfn_range_finds_interior_extremum() {
        // x(1-x) peaks at 1/2 with value 1/4
        let f = RatFn::poly(Poly(vec![int(0), int(1), int(-1)]));
        let r = f.range_on(&int(0), &int(1));
        assert_eq!(r, RangeBound { lo: int(0), hi: ratio(1, 4), exact: true });
    }

    #[test]
    fn ratfn_range_with_irrational_critical_point_is_sound() {
        // x^3 - 2x on [0, 2]: minimum at sqrt(2/3)
        let f = RatFn::poly(Poly(vec![int(0), int(-2), int(0), int(1)]));
        let r = f.range_on(&int(0), &int(2));
        assert!(!r.exact);
        let true_min = -4.0 / 3.0 * (2.0f64 / 3.0).sqrt();
        assert!(to_f64(&r.lo) <= true_min && to_f64(&r.lo) > true_min - 1e-9);
        assert_eq!(r.hi, int(4));
    }
}
