//! Cubic polynomials: Routh-Hurwitz test, discriminant, closed-form roots and
//! Sturm counting of real roots on an interval.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CubicError {
    #[error("leading coefficient must be nonzero")]
    ZeroLeading,
    #[error("leading coefficient must be positive")]
    NonPositiveLeading,
    #[error("coefficients must be finite")]
    NonFinite,
}

/// `a0 t^3 + a1 t^2 + a2 t + a3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicPoly {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl CubicPoly {
    pub const fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Self { a0, a1, a2, a3 }
    }

    pub fn coeffs(&self) -> [f64; 4] {
        [self.a0, self.a1, self.a2, self.a3]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        ((self.a0 * t + self.a1) * t + self.a2) * t + self.a3
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        ((t * self.a0 + self.a1) * t + self.a2) * t + self.a3
    }

    fn derivative_at(&self, t: Complex64) -> Complex64 {
        (t * (3.0 * self.a0) + 2.0 * self.a1) * t + self.a2
    }

    fn check(&self) -> Result<(), CubicError> {
        if !self.coeffs().iter().all(|c| c.is_finite()) {
            return Err(CubicError::NonFinite);
        }
        if self.a0 == 0.0 {
            return Err(CubicError::ZeroLeading);
        }
        Ok(())
    }
}

/// Routh-Hurwitz for a cubic with positive leading coefficient: all roots lie
/// in the open left half-plane iff `a1, a2, a3 > 0` and `a1 a2 > a0 a3`.
pub fn routh_hurwitz_cubic(c: &CubicPoly) -> Result<bool, CubicError> {
    c.check()?;
    if c.a0 <= 0.0 {
        return Err(CubicError::NonPositiveLeading);
    }
    Ok(c.a1 > 0.0 && c.a2 > 0.0 && c.a3 > 0.0 && c.a1 * c.a2 > c.a0 * c.a3)
}

/// `18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2` for `a t^3 + b t^2 + c t + d`.
///
/// Positive: three distinct real roots. Zero: a repeated root, all real.
/// Negative: one real root and a complex-conjugate pair.
pub fn cubic_discriminant(c: &CubicPoly) -> Result<f64, CubicError> {
    c.check()?;
    let CubicPoly { a0: a, a1: b, a2: c, a3: d } = *c;
    Ok(18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * a * c.powi(3) - 27.0 * a * a * d * d)
}

/// All three roots, real ones first in ascending order, then the conjugate
/// pair with positive imaginary part first.
///
/// Closed form on the depressed cubic (trigonometric branch for three real
/// roots, Cardano otherwise), followed by Newton polishing on the original
/// polynomial. The complex pair is obtained by deflating the polished real
/// root.
pub fn cubic_roots(c: &CubicPoly) -> Result<[Complex64; 3], CubicError> {
    c.check()?;
    let b = c.a1 / c.a0;
    let cc = c.a2 / c.a0;
    let d = c.a3 / c.a0;

    let shift = b / 3.0;
    let p = cc - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let mut roots = if disc <= 0.0 {
        // Three real roots (possibly repeated).
        if p == 0.0 {
            [Complex64::new(-shift, 0.0); 3]
        } else {
            let m = 2.0 * (-third_p).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            let mut r = [0.0; 3];
            for (k, slot) in r.iter_mut().enumerate() {
                *slot = m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift;
            }
            r.map(|x| Complex64::new(polish_real(c, x), 0.0))
        }
    } else {
        let s = disc.sqrt();
        let a = -half_q.signum() * (half_q.abs() + s).cbrt();
        let bb = if a == 0.0 { 0.0 } else { -third_p / a };
        let real = polish_real(c, a + bb - shift);
        let [z1, z2] = deflate(c, real);
        [Complex64::new(real, 0.0), z1, z2]
    };

    for z in roots.iter_mut() {
        *z = polish_complex(c, *z);
    }
    sort_roots(&mut roots);
    Ok(roots)
}

fn polish_real(c: &CubicPoly, mut x: f64) -> f64 {
    let mut best = c.eval(x).abs();
    for _ in 0..8 {
        let f = c.eval(x);
        let df = (3.0 * c.a0 * x + 2.0 * c.a1) * x + c.a2;
        if f == 0.0 || df == 0.0 || !df.is_finite() {
            break;
        }
        let next = x - f / df;
        let r = c.eval(next).abs();
        if !(r < best) {
            break;
        }
        best = r;
        x = next;
    }
    x
}

fn polish_complex(c: &CubicPoly, mut z: Complex64) -> Complex64 {
    let mut best = c.eval_complex(z).norm();
    for _ in 0..8 {
        let f = c.eval_complex(z);
        let df = c.derivative_at(z);
        if best == 0.0 || df.norm() == 0.0 {
            break;
        }
        let next = z - f / df;
        let r = c.eval_complex(next).norm();
        if !(r < best) {
            break;
        }
        best = r;
        z = next;
    }
    z
}

/// Roots of the quadratic left after dividing out `t - root`.
fn deflate(c: &CubicPoly, root: f64) -> [Complex64; 2] {
    let qa = c.a0;
    let qb = c.a1 + qa * root;
    let qc = c.a2 + qb * root;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let t = -0.5 * (qb + qb.signum() * s);
        let (r1, r2) = if t == 0.0 { (0.0, 0.0) } else { (t / qa, qc / t) };
        [Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)]
    } else {
        let re = -qb / (2.0 * qa);
        let im = (-disc).sqrt() / (2.0 * qa.abs());
        [Complex64::new(re, im), Complex64::new(re, -im)]
    }
}

fn sort_roots(r: &mut [Complex64; 3]) {
    r.sort_by(|a, b| {
        let ka = (a.im != 0.0, a.re, -a.im);
        let kb = (b.im != 0.0, b.re, -b.im);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Relative tolerance deciding when a computed root counts as real or
/// negative: real if `|im| <= tol (1 + |re|)`, negative if `re < -tol`.
pub const EIG_TOL: f64 = 1e-9;

/// Whether some root is real and strictly negative, with the tolerance
/// convention of [`EIG_TOL`].
pub fn has_negative_real_root(c: &CubicPoly, tol: f64) -> Result<bool, CubicError> {
    let roots = cubic_roots(c)?;
    Ok(roots.iter().any(|z| z.im.abs() <= tol * (1.0 + z.re.abs()) && z.re < -tol))
}

/// Number of distinct real roots in the half-open interval `(lo, hi]`,
/// counted with a Sturm sequence. `hi = f64::INFINITY` is allowed.
pub fn sturm_count(c: &CubicPoly, lo: f64, hi: f64) -> Result<usize, CubicError> {
    c.check()?;
    let seq = sturm_sequence(c);
    Ok(sign_changes(&seq, lo).saturating_sub(sign_changes(&seq, hi)))
}

// Polynomials stored highest degree first.
fn sturm_sequence(c: &CubicPoly) -> Vec<Vec<f64>> {
    let scale = c.max_abs_coeff();
    let p0: Vec<f64> = c.coeffs().iter().map(|v| v / scale).collect();
    let p1 = vec![3.0 * p0[0], 2.0 * p0[1], p0[2]];
    let mut seq = vec![p0, p1];
    loop {
        let n = seq.len();
        let rem = poly_rem(&seq[n - 2], &seq[n - 1]);
        let mag = rem.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if rem.is_empty() || mag <= 1e-12 {
            break;
        }
        seq.push(rem.iter().map(|v| -v).collect());
        if seq.last().map_or(0, Vec::len) == 1 {
            break;
        }
    }
    seq
}

fn poly_rem(num: &[f64], den: &[f64]) -> Vec<f64> {
    let mut r = num.to_vec();
    while r.len() >= den.len() {
        let k = r[0] / den[0];
        for (i, d) in den.iter().enumerate() {
            r[i] -= k * d;
        }
        r.remove(0);
    }
    while r.len() > 1 && r[0].abs() <= 1e-14 {
        r.remove(0);
    }
    r
}

fn sign_at(poly: &[f64], t: f64) -> f64 {
    if t.is_infinite() {
        let lead = poly.iter().find(|v| **v != 0.0).copied().unwrap_or(0.0);
        let deg = poly.len() - 1;
        let s = if t < 0.0 && deg % 2 == 1 { -1.0 } else { 1.0 };
        return lead.signum() * s;
    }
    poly.iter().fold(0.0, |acc, v| acc * t + v)
}

fn sign_changes(seq: &[Vec<f64>], t: f64) -> usize {
    let signs: Vec<f64> = seq.iter().map(|p| sign_at(p, t)).filter(|v| *v != 0.0).collect();
    signs.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(r: &[Complex64; 3]) -> Vec<f64> {
        let mut v: Vec<f64> = r.iter().map(|z| z.re).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn routh_hurwitz_examples() {
        assert_eq!(routh_hurwitz_cubic(&CubicPoly::new(1.0, 1.0, 1.0, 2.0)), Ok(false));
        assert_eq!(routh_hurwitz_cubic(&CubicPoly::new(1.0, 3.0, 3.0, 1.0)), Ok(true));
        assert_eq!(routh_hurwitz_cubic(&CubicPoly::new(-1.0, 3.0, 3.0, 1.0)), Err(CubicError::NonPositiveLeading));
        assert_eq!(routh_hurwitz_cubic(&CubicPoly::new(0.0, 3.0, 3.0, 1.0)), Err(CubicError::ZeroLeading));
    }

    #[test]
    fn discriminant_examples() {
        assert_eq!(cubic_discriminant(&CubicPoly::new(1.0, 0.0, -1.0, 0.0)), Ok(4.0));
        assert_eq!(cubic_discriminant(&CubicPoly::new(1.0, -3.0, 3.0, -1.0)), Ok(0.0));
        assert!(cubic_discriminant(&CubicPoly::new(0.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn roots_of_factorable_cubics() {
        let r = cubic_roots(&CubicPoly::new(1.0, 0.0, -1.0, 0.0)).unwrap();
        assert!(r.iter().all(|z| z.im == 0.0));
        let re = sorted_re(&r);
        for (got, want) in re.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14, "{re:?}");
        }

        let r = cubic_roots(&CubicPoly::new(1.0, -3.0, 3.0, -1.0)).unwrap();
        for z in r {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn complex_pair_ordering() {
        // (t - 2)(t^2 + 2t + 5): roots 2, -1 +/- 2i
        let r = cubic_roots(&CubicPoly::new(1.0, 0.0, 1.0, -10.0)).unwrap();
        assert!((r[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(-1.0, 2.0)).norm() < 1e-12);
        assert!((r[2] - Complex64::new(-1.0, -2.0)).norm() < 1e-12);
    }

    #[test]
    fn negative_real_root_examples() {
        assert_eq!(has_negative_real_root(&CubicPoly::new(1.0, 0.0, -1.0, 0.0), EIG_TOL), Ok(true));
        assert_eq!(has_negative_real_root(&CubicPoly::new(1.0, -3.0, 3.0, -1.0), EIG_TOL), Ok(false));
        assert_eq!(has_negative_real_root(&CubicPoly::new(1.0, 0.0, 1.0, -10.0), EIG_TOL), Ok(false));
    }

    #[test]
    fn sturm_counts() {
        let c = CubicPoly::new(1.0, 0.0, -1.0, 0.0);
        assert_eq!(sturm_count(&c, f64::NEG_INFINITY, f64::INFINITY), Ok(3));
        assert_eq!(sturm_count(&c, 0.0, f64::INFINITY), Ok(1));
        assert_eq!(sturm_count(&c, -0.5, f64::INFINITY), Ok(2));
        let c = CubicPoly::new(1.0, 0.0, 1.0, -10.0);
        assert_eq!(sturm_count(&c, f64::NEG_INFINITY, f64::INFINITY), Ok(1));
        assert_eq!(sturm_count(&c, 2.5, f64::INFINITY), Ok(0));
        // repeated root counted once
        let c = CubicPoly::new(1.0, -3.0, 3.0, -1.0);
        assert_eq!(sturm_count(&c, 0.0, f64::INFINITY), Ok(1));
    }
}
