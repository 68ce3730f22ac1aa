//! The polynomial model problem `f(z) = (2 + z)^n - 2^n` on the unit disc.
//!
//! `f` is evaluated through its expanded form `sum_{k>=1} C(n,k) 2^{n-k} z^k`
//! (the constant cancels symbolically), which is well conditioned near the
//! principal solution branch where the iterates live. The closed-form
//! continuous inverse `g(Z) = 2 ((1 + 2^{-n} Z)^{1/n} - 1)` on the principal
//! branch serves as the independent reference for the descent solver.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::local::{LocalParams, OwnedLocalProblem};

/// Largest exponent for which the expanded coefficients fit in `u128`.
const MAX_N: u32 = 80;

#[derive(Debug, Clone)]
pub struct ExampleA {
    n: u32,
    /// `coeffs[k-1] = C(n,k) * 2^(n-k)` for `k = 1..=n`.
    coeffs: Vec<f64>,
}

impl ExampleA {
    pub fn new(n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if n > MAX_N {
            return Err(Error::InvalidArgument(format!(
                "n = {n} exceeds the supported maximum {MAX_N}"
            )));
        }
        let mut coeffs = Vec::with_capacity(n as usize);
        let mut binom: u128 = 1;
        for k in 1..=n as u128 {
            // C(n,k) = C(n,k-1) * (n-k+1) / k, exact in u128.
            binom = binom * (n as u128 - k + 1) / k;
            let a = binom << (n as u128 - k);
            coeffs.push(a as f64);
        }
        Ok(ExampleA { n, coeffs })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Expanded coefficients `C(n,k) 2^{n-k}` for `k = 1..=n`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn eval_raw(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(*self.coeffs.last().unwrap(), 0.0);
        for &a in self.coeffs.iter().rev().skip(1) {
            acc = acc * z + a;
        }
        acc * z
    }

    /// `f(z) = (2 + z)^n - 2^n` for `|z| < 1`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() >= 1.0 {
            return Err(Error::OutOfBall {
                norm: z.norm(),
                radius: 1.0,
            });
        }
        Ok(self.eval_raw(z))
    }

    /// `Df(z)` acts by multiplication with `n (2 + z)^{n-1}`.
    pub fn derivative_multiplier(&self, z: Complex64) -> Complex64 {
        self.n as f64 * complex_powu(Complex64::new(2.0, 0.0) + z, self.n - 1)
    }

    /// `L(z)` acts by multiplication with `n^{-1} (2 + z)^{1-n}`.
    pub fn inverse_multiplier(&self, z: Complex64) -> Complex64 {
        (self.n as f64 * complex_powu(Complex64::new(2.0, 0.0) + z, self.n - 1)).finv()
    }

    /// Principal-branch closed-form inverse `g(Z) = 2((1 + 2^{-n} Z)^{1/n} - 1)`.
    ///
    /// Requires `|Z| < 2^n` and `1 + 2^{-n} Z` off the negative real axis.
    pub fn closed_inverse(&self, target: Complex64) -> Result<Complex64> {
        let scale = 2f64.powi(-(self.n as i32));
        let w = target * scale;
        let shifted = Complex64::new(1.0, 0.0) + w;
        if shifted.im == 0.0 && shifted.re <= 0.0 {
            return Err(Error::InvalidArgument(
                "argument lies on the branch cut".into(),
            ));
        }
        if target.norm() * scale >= 1.0 {
            return Err(Error::OutOfRadius {
                norm: target.norm(),
                radius: 2f64.powi(self.n as i32),
            });
        }
        let q = ln1p_c(w) / self.n as f64;
        Ok(2.0 * expm1_c(q))
    }

    /// Package as a local problem on the unit disc with constants `(m, a)`.
    ///
    /// `sup ||L|| = 1/n` on the disc, so any `m > 1/n` is admissible; the
    /// defect constant `a` can be any value in `(0, 1)` since the derivative
    /// ratio is continuous in the evaluation point.
    pub fn problem(&self, m: f64, a: f64) -> Result<OwnedLocalProblem<Complex64, Complex64>> {
        let n = self.n;
        let sup_l = 1.0 / n as f64;
        if !(m > sup_l) {
            return Err(Error::InvalidArgument(format!(
                "m must exceed sup||L|| = {sup_l}, got {m}"
            )));
        }
        if !(0.0..1.0).contains(&a) {
            return Err(Error::InvalidArgument(format!(
                "a must lie in [0, 1), got {a}"
            )));
        }
        let fa = self.clone();
        let fb = self.clone();
        let fc = self.clone();
        let lip = n as f64 * 3f64.powi(n as i32 - 1);
        Ok(OwnedLocalProblem::new(
            move |z: &Complex64| fa.eval_raw(*z),
            move |z: &Complex64, h: &Complex64| fb.derivative_multiplier(*z) * h,
            move |z: &Complex64, k: &Complex64| fc.inverse_multiplier(*z) * k,
            |z: &Complex64| z.norm(),
            |k: &Complex64| k.norm(),
            Complex64::new(0.0, 0.0),
            LocalParams {
                radius: 1.0,
                m,
                a,
                lip,
                sup_l,
                left_invertible: true,
            },
        ))
    }
}

/// `f(z) = (2 + z)^n - 2^n` for `|z| < 1`.
pub fn example_a_f(n: u32, z: Complex64) -> Result<Complex64> {
    ExampleA::new(n)?.eval(z)
}

/// Principal-branch closed inverse of the model polynomial.
pub fn example_a_closed_inverse(n: u32, target: Complex64) -> Result<Complex64> {
    ExampleA::new(n)?.closed_inverse(target)
}

/// Integer power by binary exponentiation (avoids polar-form rounding).
fn complex_powu(base: Complex64, mut e: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

/// `ln(1 + w)` on the principal branch, accurate for tiny `|w|`.
fn ln1p_c(w: Complex64) -> Complex64 {
    if w.norm() < 0.1 {
        // Alternating series; 20 terms leave a relative error below 1e-20.
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = w;
        for j in 1..=20 {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            acc += pow * (sign / j as f64);
            pow *= w;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) + w).ln()
    }
}

/// `exp(q) - 1`, accurate for tiny `|q|`.
fn expm1_c(q: Complex64) -> Complex64 {
    if q.norm() < 0.1 {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for j in 1..=16 {
            term *= q / j as f64;
            acc += term;
        }
        acc
    } else {
        q.exp() - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishes_at_origin() {
        for n in [1, 2, 8, 16, 64] {
            let f = ExampleA::new(n).unwrap();
            assert_eq!(f.eval(Complex64::new(0.0, 0.0)).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn n1_is_the_identity() {
        let f = ExampleA::new(1).unwrap();
        for z in [
            Complex64::new(0.3, -0.2),
            Complex64::new(-0.9, 0.0),
            Complex64::new(0.0, 0.5),
        ] {
            assert_eq!(f.eval(z).unwrap(), z);
        }
    }

    #[test]
    fn quadratic_value() {
        // (2.25)^2 - 4 = 1.0625
        let f = ExampleA::new(2).unwrap();
        let v = f.eval(Complex64::new(0.25, 0.0)).unwrap();
        assert!((v - Complex64::new(1.0625, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn expanded_form_matches_direct_power_inside_disc() {
        // Away from the cancellation regime both evaluations agree.
        let f = ExampleA::new(8).unwrap();
        for z in [
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.4, 0.1),
            Complex64::new(0.0, -0.6),
        ] {
            let direct = complex_powu(Complex64::new(2.0, 0.0) + z, 8) - 2f64.powi(8);
            let expanded = f.eval(z).unwrap();
            assert!((direct - expanded).norm() <= 1e-12 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn rejects_points_outside_the_disc() {
        let f = ExampleA::new(2).unwrap();
        assert!(matches!(
            f.eval(Complex64::new(1.0, 0.0)),
            Err(Error::OutOfBall { .. })
        ));
    }

    #[test]
    fn closed_inverse_at_zero() {
        for n in [1, 2, 8, 64] {
            let f = ExampleA::new(n).unwrap();
            let g = f.closed_inverse(Complex64::new(0.0, 0.0)).unwrap();
            assert_eq!(g.norm(), 0.0);
        }
    }

    #[test]
    fn closed_inverse_reference_value() {
        // 2 (sqrt(1.25) - 1)
        let f = ExampleA::new(2).unwrap();
        let g = f.closed_inverse(Complex64::new(1.0, 0.0)).unwrap();
        assert!((g.re - 0.236067977499790).abs() < 1e-14);
        assert!(g.im.abs() < 1e-16);
    }

    #[test]
    fn closed_inverse_round_trip() {
        for (n, target) in [
            (2, Complex64::new(1.0, 0.0)),
            (8, Complex64::new(0.0, 0.5)),
            (16, Complex64::new(0.3, -0.4)),
            (64, Complex64::new(0.0, 13.0)),
        ] {
            let f = ExampleA::new(n).unwrap();
            let g = f.closed_inverse(target).unwrap();
            let back = f.eval(g).unwrap();
            assert!(
                (back - target).norm() <= 1e-12 * target.norm(),
                "n = {n}: round trip off by {:.3e}",
                (back - target).norm() / target.norm()
            );
        }
    }

    #[test]
    fn closed_inverse_branch_cut_rejected() {
        // n = 1: 1 + Z/2 hits the negative real axis for real Z <= -2.
        let f = ExampleA::new(1).unwrap();
        assert!(matches!(
            f.closed_inverse(Complex64::new(-2.5, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            f.closed_inverse(Complex64::new(2.5, 0.0)),
            Err(Error::OutOfRadius { .. })
        ));
        // Inside the radius the shifted argument cannot reach the cut.
        assert!(f.closed_inverse(Complex64::new(-1.5, 0.0)).is_ok());
    }

    #[test]
    fn derivative_and_inverse_multipliers_cancel() {
        let f = ExampleA::new(8).unwrap();
        for z in [Complex64::new(0.2, 0.1), Complex64::new(-0.3, 0.4)] {
            let prod = f.derivative_multiplier(z) * f.inverse_multiplier(z);
            assert!((prod - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }
}
