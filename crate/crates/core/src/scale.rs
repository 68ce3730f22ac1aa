//! Graded spectral norms, cutoff projectors, and empirical checks of the
//! smoothing estimates they satisfy.
//!
//! The scale is a weighted sequence space over integer modes `|k| <= k_max`
//! with weight `w(k) = (1 + k^2)^{1/2}` and norms
//! `||u||_s = (sum_k w(k)^{2s} |u_k|^2)^{1/2}` for `s` in `[0, s_max]`.
//! The sharp cutoff projector `Pi(lambda)` keeps exactly the modes with
//! `w(k) <= lambda`, which makes the growth and approximation constants
//! equal to one, so both estimates are machine-checkable without fitted
//! constants.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::space::LinearOps;

/// Grading range and mode truncation of one scale of spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSpec {
    s_max: f64,
    k_max: i64,
}

impl ScaleSpec {
    pub fn new(s_max: f64, k_max: i64) -> Result<Arc<Self>> {
        if !(s_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "s_max must be positive, got {s_max}"
            )));
        }
        if k_max < 1 {
            return Err(Error::InvalidArgument(format!(
                "k_max must be at least 1, got {k_max}"
            )));
        }
        Ok(Arc::new(ScaleSpec { s_max, k_max }))
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Mode weight `w(k) = (1 + k^2)^{1/2}`; `w(0) = 1` and `w(-k) = w(k)`.
    pub fn weight(&self, k: i64) -> f64 {
        let kf = k as f64;
        (1.0 + kf * kf).sqrt()
    }

    /// Largest weight present in the truncation, `w(k_max)`.
    pub fn max_weight(&self) -> f64 {
        self.weight(self.k_max)
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        -self.k_max..=self.k_max
    }

    pub fn dim(&self) -> usize {
        (2 * self.k_max + 1) as usize
    }

    fn check_grading(&self, s: f64) -> Result<()> {
        if !(0.0..=self.s_max).contains(&s) {
            return Err(Error::GradingOutOfRange {
                s,
                s_max: self.s_max,
            });
        }
        Ok(())
    }
}

/// A truncated spectral element; lives in every `V_s` of its scale at once.
#[derive(Debug, Clone)]
pub struct ScaleVector {
    spec: Arc<ScaleSpec>,
    coeff: Vec<Complex64>,
}

impl ScaleVector {
    pub fn zeros(spec: &Arc<ScaleSpec>) -> Self {
        ScaleVector {
            spec: Arc::clone(spec),
            coeff: vec![Complex64::new(0.0, 0.0); spec.dim()],
        }
    }

    pub fn from_modes(spec: &Arc<ScaleSpec>, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut u = ScaleVector::zeros(spec);
        for &(k, c) in modes {
            u.set(k, c)?;
        }
        Ok(u)
    }

    pub fn spec(&self) -> &Arc<ScaleSpec> {
        &self.spec
    }

    fn index_of(&self, k: i64) -> Result<usize> {
        if k.abs() > self.spec.k_max {
            return Err(Error::ModeOutOfRange(k));
        }
        Ok((k + self.spec.k_max) as usize)
    }

    pub fn get(&self, k: i64) -> Complex64 {
        match self.index_of(k) {
            Ok(i) => self.coeff[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, k: i64, c: Complex64) -> Result<()> {
        let i = self.index_of(k)?;
        self.coeff[i] = c;
        Ok(())
    }

    /// Iterate `(mode, coefficient)` pairs in ascending mode order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeff
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as i64 - self.spec.k_max, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Graded norm `||u||_s`; nondecreasing in `s`.
    pub fn norm(&self, s: f64) -> Result<f64> {
        self.spec.check_grading(s)?;
        let mut acc = 0.0;
        for (k, c) in self.iter() {
            let sq = c.norm_sqr();
            if sq != 0.0 {
                let kf = k as f64;
                acc += (1.0 + kf * kf).powf(s) * sq;
            }
        }
        Ok(acc.sqrt())
    }

    /// Apply the diagonal multiplier `u_k -> w(k)^p * u_k`.
    pub fn graded_multiplier(&self, p: f64) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeff.iter_mut().enumerate() {
            let k = i as i64 - self.spec.k_max;
            let kf = k as f64;
            *c *= (1.0 + kf * kf).powf(p / 2.0);
        }
        out
    }

    /// Keep exactly the modes with `lo < w(k) <= hi` (an annular slice).
    pub fn band(&self, lo: f64, hi: f64) -> Self {
        let mut out = ScaleVector::zeros(&self.spec);
        for (i, &c) in self.coeff.iter().enumerate() {
            let k = i as i64 - self.spec.k_max;
            let w = self.spec.weight(k);
            if w > lo && w <= hi {
                out.coeff[i] = c;
            }
        }
        out
    }

    fn check_same_spec(&self, other: &Self) -> Result<()> {
        if *self.spec != *other.spec {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }
}

impl LinearOps for ScaleVector {
    fn zeros_like(&self) -> Self {
        ScaleVector::zeros(&self.spec)
    }

    fn add_scaled(&self, alpha: f64, other: &Self) -> Self {
        self.check_same_spec(other).expect("mismatched scale specs");
        let coeff = self
            .coeff
            .iter()
            .zip(other.coeff.iter())
            .map(|(a, b)| a + alpha * b)
            .collect();
        ScaleVector {
            spec: Arc::clone(&self.spec),
            coeff,
        }
    }

    fn scaled(&self, alpha: f64) -> Self {
        ScaleVector {
            spec: Arc::clone(&self.spec),
            coeff: self.coeff.iter().map(|c| alpha * c).collect(),
        }
    }
}

/// Sharp-cutoff smoothing projectors over one scale.
///
/// `Pi(lambda)` keeps the modes with `w(k) <= lambda`. Ranges are
/// nondecreasing and kernels nonincreasing in `lambda`, and the growth /
/// approximation constants are exactly one.
#[derive(Debug, Clone)]
pub struct ProjectorFamily {
    spec: Arc<ScaleSpec>,
    a1: f64,
    a2: f64,
}

impl ProjectorFamily {
    pub fn sharp(spec: &Arc<ScaleSpec>) -> Self {
        ProjectorFamily {
            spec: Arc::clone(spec),
            a1: 1.0,
            a2: 1.0,
        }
    }

    pub fn spec(&self) -> &Arc<ScaleSpec> {
        &self.spec
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    fn check_cutoff(&self, lambda: f64) -> Result<()> {
        if !(lambda >= 1.0) {
            return Err(Error::CutoffBelowOne(lambda));
        }
        Ok(())
    }

    /// Low-frequency part `Pi(lambda) u`; idempotent and linear.
    pub fn project(&self, u: &ScaleVector, lambda: f64) -> Result<ScaleVector> {
        self.check_cutoff(lambda)?;
        Ok(u.band(0.0, lambda))
    }

    /// High-frequency remainder `(I - Pi(lambda)) u`.
    pub fn tail(&self, u: &ScaleVector, lambda: f64) -> Result<ScaleVector> {
        self.check_cutoff(lambda)?;
        Ok(u.band(lambda, f64::INFINITY))
    }

    /// Ratio `||Pi(lambda) u||_t / (lambda^{(t-s)^+} ||u||_s)`.
    ///
    /// The growth estimate holds iff the ratio stays `<= a1`.
    pub fn verify_loss(&self, u: &ScaleVector, s: f64, t: f64, lambda: f64) -> Result<f64> {
        self.spec.check_grading(s)?;
        self.spec.check_grading(t)?;
        self.check_cutoff(lambda)?;
        if u.is_zero() {
            return Err(Error::ZeroVector);
        }
        let num = self.project(u, lambda)?.norm(t)?;
        let den = lambda.powf((t - s).max(0.0)) * u.norm(s)?;
        Ok(num / den)
    }

    /// Ratio `||(I - Pi(lambda)) u||_t / (lambda^{-(s-t)} ||u||_s)` for `t <= s`.
    ///
    /// The approximation estimate holds iff the ratio stays `<= a2`.
    pub fn verify_gain(&self, u: &ScaleVector, s: f64, t: f64, lambda: f64) -> Result<f64> {
        self.spec.check_grading(s)?;
        self.spec.check_grading(t)?;
        self.check_cutoff(lambda)?;
        if t > s {
            return Err(Error::InvalidArgument(format!(
                "approximation estimate requires t <= s, got t = {t}, s = {s}"
            )));
        }
        if u.is_zero() {
            return Err(Error::ZeroVector);
        }
        let num = self.tail(u, lambda)?.norm(t)?;
        let den = lambda.powf(-(s - t)) * u.norm(s)?;
        Ok(num / den)
    }
}

/// Write nonzero modes as `k re im` lines in ascending mode order.
pub fn write_modes<W: Write>(u: &ScaleVector, mut out: W) -> Result<()> {
    for (k, c) in u.iter() {
        if c.norm_sqr() != 0.0 {
            writeln!(out, "{} {:.17e} {:.17e}", k, c.re, c.im)?;
        }
    }
    Ok(())
}

/// Read `k re im` lines back into a vector over `spec`.
///
/// Blank lines and `#` comments are skipped; unknown modes are an error.
pub fn read_modes<R: BufRead>(spec: &Arc<ScaleSpec>, input: R) -> Result<ScaleVector> {
    let mut u = ScaleVector::zeros(spec);
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Config(format!(
                "mode record line {}: expected `k re im`, got {:?}",
                lineno + 1,
                trimmed,
            )));
        }
        let k: i64 = fields[0]
            .parse()
            .map_err(|_| Error::Config(format!("line {}: bad mode index", lineno + 1)))?;
        let re: f64 = fields[1]
            .parse()
            .map_err(|_| Error::Config(format!("line {}: bad real part", lineno + 1)))?;
        let im: f64 = fields[2]
            .parse()
            .map_err(|_| Error::Config(format!("line {}: bad imaginary part", lineno + 1)))?;
        u.set(k, Complex64::new(re, im))?;
    }
    Ok(u)
}
