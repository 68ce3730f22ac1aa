//! Pointwise superposition `u -> phi o u` on a periodic collocation grid.
//!
//! The scalar function `phi` is strictly increasing (`inf phi' > 0`), so the
//! operator has the diagonal derivative `h -> (phi' o u) h`, whose inverse is
//! pointwise division. The exact superposition inverse `psi = phi^{-1}`,
//! computed by a safeguarded scalar iteration, is the independent oracle for
//! the descent solver on this problem.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::local::{LocalParams, OwnedLocalProblem};
use crate::space::sup_norm;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct NemytskiiProblem {
    phi: ScalarFn,
    phi_prime: ScalarFn,
    grid_size: usize,
    inf_phi_prime: f64,
    sup_phi_prime: f64,
}

impl NemytskiiProblem {
    pub fn new(
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        grid_size: usize,
        inf_phi_prime: f64,
        sup_phi_prime: f64,
    ) -> Result<Self> {
        if !(inf_phi_prime > 0.0) {
            return Err(Error::InvalidArgument(
                "phi' must be bounded below by a positive constant".into(),
            ));
        }
        if grid_size == 0 {
            return Err(Error::InvalidArgument("grid must be nonempty".into()));
        }
        if phi(0.0) != 0.0 {
            return Err(Error::InvalidArgument(
                "phi must vanish at 0 (shift it first)".into(),
            ));
        }
        Ok(NemytskiiProblem {
            phi: Arc::new(phi),
            phi_prime: Arc::new(phi_prime),
            grid_size,
            inf_phi_prime,
            sup_phi_prime,
        })
    }

    /// Default instance `phi(t) = t + 0.45 sin t`, so `phi'` ranges over
    /// `[0.55, 1.45]`.
    pub fn sine_default(grid_size: usize) -> Self {
        NemytskiiProblem::new(
            |t| t + 0.45 * t.sin(),
            |t| 1.0 + 0.45 * t.cos(),
            grid_size,
            0.55,
            1.45,
        )
        .expect("default instance is valid")
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn inf_phi_prime(&self) -> f64 {
        self.inf_phi_prime
    }

    fn check_grid(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.grid_size {
            return Err(Error::InvalidArgument(format!(
                "grid size mismatch: expected {}, got {}",
                self.grid_size,
                u.len()
            )));
        }
        Ok(())
    }

    /// `Phi(u) = phi o u` pointwise.
    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        Ok(u.iter().map(|&t| (self.phi)(t)).collect())
    }

    /// `DPhi(u) h = (phi' o u) . h` pointwise.
    pub fn apply_derivative(&self, u: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        self.check_grid(h)?;
        Ok(u.iter()
            .zip(h.iter())
            .map(|(&t, &d)| (self.phi_prime)(t) * d)
            .collect())
    }

    /// `L(u) k = k / (phi' o u)` pointwise; both a right and a left inverse.
    pub fn apply_inverse(&self, u: &[f64], k: &[f64]) -> Result<Vec<f64>> {
        self.check_grid(u)?;
        self.check_grid(k)?;
        Ok(u.iter()
            .zip(k.iter())
            .map(|(&t, &d)| d / (self.phi_prime)(t))
            .collect())
    }

    /// Scalar inverse `psi(v)`: the unique root of `phi(t) = v`.
    pub fn scalar_inverse(&self, v: f64) -> Result<f64> {
        let bound = v.abs() / self.inf_phi_prime + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        if (self.phi)(lo) > v || (self.phi)(hi) < v {
            return Err(Error::OracleFailure(format!(
                "bracket [{lo}, {hi}] does not enclose the root of phi(t) = {v}"
            )));
        }
        // Safeguarded Newton: bisection step whenever Newton leaves the bracket.
        let mut t = v / 1.0_f64.max(self.inf_phi_prime);
        t = t.clamp(lo, hi);
        for _ in 0..200 {
            let r = (self.phi)(t) - v;
            if r == 0.0 {
                return Ok(t);
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let dp = (self.phi_prime)(t);
            let mut next = t - r / dp;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-17 * (1.0 + t.abs()) {
                return Ok(next);
            }
            t = next;
        }
        let r = (self.phi)(t) - v;
        if r.abs() <= 1e-13 * (1.0 + v.abs()) {
            Ok(t)
        } else {
            Err(Error::OracleFailure(format!(
                "scalar iteration stalled at residual {r:.3e}"
            )))
        }
    }

    /// `Psi(v) = psi o v` pointwise, the exact superposition inverse.
    pub fn exact_inverse(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_grid(v)?;
        v.iter().map(|&val| self.scalar_inverse(val)).collect()
    }

    /// Package as a local problem with sup norms on the grid.
    pub fn problem(
        &self,
        radius: f64,
        m: f64,
        a: f64,
    ) -> Result<OwnedLocalProblem<Vec<f64>, Vec<f64>>> {
        let sup_l = 1.0 / self.inf_phi_prime;
        if !(m > sup_l) {
            return Err(Error::InvalidArgument(format!(
                "m must exceed sup||L|| = {sup_l}, got {m}"
            )));
        }
        let pa = self.clone();
        let pb = self.clone();
        let pc = self.clone();
        let origin = vec![0.0; self.grid_size];
        Ok(OwnedLocalProblem::new(
            move |u: &Vec<f64>| pa.apply(u).expect("grid shape fixed by problem"),
            move |u: &Vec<f64>, h: &Vec<f64>| {
                pb.apply_derivative(u, h).expect("grid shape fixed by problem")
            },
            move |u: &Vec<f64>, k: &Vec<f64>| {
                pc.apply_inverse(u, k).expect("grid shape fixed by problem")
            },
            |u: &Vec<f64>| sup_norm(u),
            |k: &Vec<f64>| sup_norm(k),
            origin,
            LocalParams {
                radius,
                m,
                a,
                lip: self.sup_phi_prime,
                sup_l,
                left_invertible: true,
            },
        ))
    }

    /// Problem with the conventional constants: ball radius 10,
    /// `m = 2 / inf phi'`, defect `a = 1/2`.
    pub fn default_problem(&self) -> OwnedLocalProblem<Vec<f64>, Vec<f64>> {
        self.problem(10.0, 2.0 / self.inf_phi_prime, 0.5)
            .expect("default constants are admissible")
    }
}
