//! Scale-aware problem interface and randomized verification of the tame
//! estimates its implementations claim.
//!
//! Constants are certified empirically: seeded sweeps sample the estimate
//! ratios over random states and gradings, and the worst observed ratio must
//! stay below the constant frozen in the problem definition.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scale::{ScaleSpec, ScaleVector};
use crate::space::LinearOps;

/// Loss indices and frozen estimate constants of a tame map.
#[derive(Debug, Clone, Copy)]
pub struct TameParams {
    /// Base grading.
    pub s0: f64,
    /// Derivative loss: `DF(u): V_{s+m} -> W_s`.
    pub m_loss: f64,
    /// Loss of the inverse in its state dependence.
    pub ell: f64,
    /// Loss of the inverse in its argument: `L(u): W_{s+ell'} -> V_s`.
    pub ell_prime: f64,
    /// Frozen constant of the direct estimate.
    pub a_direct: f64,
    /// Frozen constant of the inverse estimate.
    pub b_inverse: f64,
}

/// A map between tame scales with a tame right-invertible linearization.
pub trait TameMap: Send + Sync {
    fn domain(&self) -> &Arc<ScaleSpec>;
    fn target(&self) -> &Arc<ScaleSpec>;
    fn params(&self) -> TameParams;

    /// `F(u)`; must vanish at the origin.
    fn eval(&self, u: &ScaleVector) -> Result<ScaleVector>;

    /// `F(u + z) - F(u)` evaluated without cancellation where possible.
    fn eval_diff(&self, u: &ScaleVector, z: &ScaleVector) -> Result<ScaleVector> {
        let shifted = u.add_scaled(1.0, z);
        Ok(self.eval(&shifted)?.sub(&self.eval(u)?))
    }

    /// `DF(u) h`.
    fn apply_df(&self, u: &ScaleVector, h: &ScaleVector) -> Result<ScaleVector>;

    /// Approximate right-inverse `L(u) k`, computed within the span of modes
    /// with `w(k) <= cutoff` (pass `domain().max_weight()` for the full
    /// truncation).
    fn apply_l(&self, u: &ScaleVector, k: &ScaleVector, cutoff: f64) -> Result<ScaleVector>;

    /// Largest base-norm state amplitude for which applying `L` on the full
    /// truncation is admissible. Estimate sweeps sample states inside this
    /// region; one means unconstrained.
    fn state_amplitude_limit(&self) -> f64 {
        1.0
    }
}

/// Random element with coefficients damped by `w(k)^{-decay}`, rescaled to
/// the requested norm at grading `s_norm`.
pub fn random_scale_vector(
    spec: &Arc<ScaleSpec>,
    decay: f64,
    s_norm: f64,
    target_norm: f64,
    rng: &mut impl Rng,
) -> ScaleVector {
    let mut u = ScaleVector::zeros(spec);
    for k in spec.modes() {
        let damp = spec.weight(k).powf(-decay);
        let c = Complex64::new(
            rng.gen_range(-1.0..1.0) * damp,
            rng.gen_range(-1.0..1.0) * damp,
        );
        u.set(k, c).expect("mode within spec");
    }
    let n = u.norm(s_norm).expect("grading within scale");
    if n == 0.0 {
        u
    } else {
        u.scaled(target_norm / n)
    }
}

/// Worst sampled ratio of the direct estimate
/// `||DF(u) h||'_s / (||h||_{s+m} + ||u||_{s+m} ||h||_{s0+m})`.
pub fn verify_tame_direct(
    problem: &dyn TameMap,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let p = problem.params();
    let spec = problem.domain();
    let s_hi = spec.s_max() - p.m_loss;
    let decay = spec.s_max() / 2.0 + 2.0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let s = rng.gen_range(p.s0..=s_hi);
        let amp_u = rng.gen_range(0.05..0.8);
        let u = random_scale_vector(spec, decay, p.s0 + p.m_loss, amp_u, rng);
        let h = random_scale_vector(spec, decay, p.s0 + p.m_loss, 1.0, rng);
        let num = problem.apply_df(&u, &h)?.norm(s)?;
        let den = h.norm(s + p.m_loss)? + u.norm(s + p.m_loss)? * h.norm(p.s0 + p.m_loss)?;
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(worst)
}

/// Worst sampled ratio of the inverse estimate
/// `||L(u) k||_s / (||k||'_{s+ell'} + ||k||'_{s0+ell'} ||u||_{s+ell})`.
pub fn verify_tame_inverse(
    problem: &dyn TameMap,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let p = problem.params();
    let spec = problem.domain();
    let s_hi = spec.s_max() - p.ell.max(p.ell_prime);
    let decay = spec.s_max() / 2.0 + 2.0;
    let cutoff = problem.domain().max_weight();
    let limit = problem.state_amplitude_limit();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let s = rng.gen_range(p.s0..=s_hi);
        // The state stays inside the region where the series correction of
        // the inverse is admissible.
        let amp_u = rng.gen_range(0.05..0.8) * limit;
        let u = random_scale_vector(spec, decay, p.s0 + p.m_loss, amp_u, rng);
        let k = random_scale_vector(problem.target(), decay, p.s0 + p.ell_prime, 1.0, rng);
        let num = problem.apply_l(&u, &k, cutoff)?.norm(s)?;
        let den = k.norm(s + p.ell_prime)? + k.norm(p.s0 + p.ell_prime)? * u.norm(s + p.ell)?;
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(worst)
}

/// Worst sampled relative defect of the left-inverse identity
/// `L(u) DF(u) h = h` at the base grading.
pub fn verify_left_inverse(
    problem: &dyn TameMap,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let p = problem.params();
    let spec = problem.domain();
    let decay = spec.s_max() / 2.0 + 2.0;
    let cutoff = spec.max_weight();
    let limit = problem.state_amplitude_limit();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let amp_u = rng.gen_range(0.05..0.8) * limit;
        let u = random_scale_vector(spec, decay, p.s0 + p.m_loss, amp_u, rng);
        let h = random_scale_vector(spec, decay, p.s0 + p.m_loss, 1.0, rng);
        let dfh = problem.apply_df(&u, &h)?;
        let back = problem.apply_l(&u, &dfh, cutoff)?;
        let defect = back.sub(&h).norm(p.s0)?;
        worst = worst.max(defect / h.norm(p.s0)?);
    }
    Ok(worst)
}

/// Worst relative error of a central finite-difference check of `DF`
/// against `F` at the base grading.
pub fn derivative_consistency(
    problem: &dyn TameMap,
    trials: usize,
    step: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    let p = problem.params();
    let spec = problem.domain();
    let decay = spec.s_max() / 2.0 + 2.0;
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_scale_vector(spec, decay, p.s0 + p.m_loss, 0.3, rng);
        let h = random_scale_vector(spec, decay, p.s0 + p.m_loss, 0.5, rng);
        let plus = problem.eval(&u.add_scaled(step, &h))?;
        let minus = problem.eval(&u.add_scaled(-step, &h))?;
        let fd = plus.sub(&minus).scaled(0.5 / step);
        let dfh = problem.apply_df(&u, &h)?;
        let err = fd.sub(&dfh).norm(p.s0)?;
        let scale = dfh.norm(p.s0)?.max(1e-300);
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

/// Modulus-of-differentiability ladder: the ratios
/// `||F(u + t_j d) - F(u) - DF(u)(t_j d)||_s / ||t_j d||_{s0+m}`
/// for `t_j = 2^{-j}`, `j = 1..=rungs`.
///
/// For a differentiable map the sequence decreases to zero.
pub fn modulus_ladder(
    problem: &dyn TameMap,
    u: &ScaleVector,
    d: &ScaleVector,
    s: f64,
    rungs: usize,
) -> Result<Vec<f64>> {
    let p = problem.params();
    let mut out = Vec::with_capacity(rungs);
    for j in 1..=rungs {
        let t = 2f64.powi(-(j as i32));
        let td = d.scaled(t);
        let diff = problem.eval_diff(u, &td)?;
        let lin = problem.apply_df(u, &td)?;
        let num = diff.sub(&lin).norm(s)?;
        let den = td.norm(p.s0 + p.m_loss)?;
        if den == 0.0 {
            return Err(Error::ZeroVector);
        }
        out.push(num / den);
    }
    Ok(out)
}
