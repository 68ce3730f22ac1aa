//! Exhaustive root location for complex polynomials by multi-start Newton
//! with deduplication.
//!
//! This is the independent oracle behind the root census: it never touches
//! the descent solver, so census results cannot be self-confirming.

use num_complex::Complex64;

/// Dense complex polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone)]
pub struct ComplexPoly {
    pub coeffs: Vec<Complex64>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        ComplexPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation of the polynomial and its derivative.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).0
    }

    /// Newton iteration from `start`; `None` when it wanders or stalls high.
    fn newton_from(&self, start: Complex64, max_iter: usize) -> Option<Complex64> {
        let mut z = start;
        let mut last_step = f64::INFINITY;
        for _ in 0..max_iter {
            let (p, dp) = self.eval_with_derivative(z);
            if dp.norm() == 0.0 {
                return None;
            }
            let step = p / dp;
            let sn = step.norm();
            z -= step;
            if !z.re.is_finite() || !z.im.is_finite() {
                return None;
            }
            // At the attainable floor the increments stop shrinking.
            if sn <= 1e-13 * (1.0 + z.norm()) {
                return Some(z);
            }
            if sn < 1e-9 && sn >= last_step {
                return Some(z);
            }
            last_step = sn;
        }
        None
    }

    /// Distinct roots found from a grid of ring starts covering the closed
    /// disc of the given radius around `center`. Results are deduplicated at
    /// `dedup_tol` and sorted by argument for determinism.
    pub fn roots_in_disc(
        &self,
        center: Complex64,
        radius: f64,
        dedup_tol: f64,
    ) -> Vec<Complex64> {
        let mut found: Vec<Complex64> = Vec::new();
        let n_angles = (8 * self.degree().max(8)).min(1024);
        let rings = [0.15, 0.35, 0.55, 0.75, 0.9, 1.0, 1.1];
        for (ri, &rf) in rings.iter().enumerate() {
            let r = radius * rf;
            for j in 0..n_angles {
                // Offset alternate rings so starts do not share rays.
                let theta = std::f64::consts::TAU * (j as f64 + 0.5 * (ri % 2) as f64)
                    / n_angles as f64;
                let start = center + Complex64::from_polar(r, theta);
                if let Some(root) = self.newton_from(start, 120) {
                    if (root - center).norm() <= radius * (1.0 + 1e-9)
                        && !found.iter().any(|f| (f - root).norm() <= dedup_tol)
                    {
                        found.push(root);
                    }
                }
            }
        }
        found.sort_by(|a, b| {
            a.arg()
                .partial_cmp(&b.arg())
                .unwrap()
                .then(a.norm().partial_cmp(&b.norm()).unwrap())
        });
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        // z - (1 + 2i)
        let p = ComplexPoly::new(vec![Complex64::new(-1.0, -2.0), Complex64::new(1.0, 0.0)]);
        let roots = p.roots_in_disc(Complex64::new(0.0, 0.0), 3.0, 1e-9);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - Complex64::new(1.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn quadratic_with_known_roots() {
        // (z - 1)(z + 2) = z^2 + z - 2
        let p = ComplexPoly::new(vec![
            Complex64::new(-2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let roots = p.roots_in_disc(Complex64::new(0.0, 0.0), 3.0, 1e-9);
        assert_eq!(roots.len(), 2);
        let mut dists: Vec<f64> = roots
            .iter()
            .map(|r| {
                (r - Complex64::new(1.0, 0.0))
                    .norm()
                    .min((r - Complex64::new(-2.0, 0.0)).norm())
            })
            .collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(dists[1] < 1e-10);
    }

    #[test]
    fn disc_filter_excludes_far_roots() {
        // Same quadratic, small disc around the origin: only z = 1 inside.
        let p = ComplexPoly::new(vec![
            Complex64::new(-2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let roots = p.roots_in_disc(Complex64::new(0.0, 0.0), 1.5, 1e-9);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn roots_of_unity_all_found() {
        // z^6 - 1: six roots on the unit circle.
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 7];
        coeffs[0] = Complex64::new(-1.0, 0.0);
        coeffs[6] = Complex64::new(1.0, 0.0);
        let p = ComplexPoly::new(coeffs);
        let roots = p.roots_in_disc(Complex64::new(0.0, 0.0), 1.2, 1e-9);
        assert_eq!(roots.len(), 6);
        for r in &roots {
            assert!((r.norm() - 1.0).abs() < 1e-10);
        }
    }
}
