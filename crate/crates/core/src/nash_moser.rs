//! Multilevel Galerkin iteration producing the continuous right-inverse on a
//! tame scale, one frequency window at a time.
//!
//! Level `n` solves the projected increment equation
//! `Pi_n (F(u_{n-1} + z) - F(u_{n-1})) = Delta_n v + e_n` inside the
//! finite-dimensional range of `Pi(Lambda_n)`, delegating to the local
//! descent solver with the right-inverse restricted to that window. The
//! admissibility constants of each inner problem are re-sampled on the level
//! space along the directions the solve will actually visit.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::local::{solve_local, DescentConfig, LocalParams, LocalProblem};
use crate::problems::tame::TameMap;
use crate::scale::ScaleVector;
use crate::space::LinearOps;

/// Grading layout, cutoff schedule, target-ball radius and inner-solver
/// thresholds for one iteration.
#[derive(Debug, Clone, Copy)]
pub struct NashMoserConfig {
    pub s0: f64,
    pub s1: f64,
    pub delta: f64,
    /// Cutoff schedule `Lambda_n = lambda0 * sigma^n`.
    pub lambda0: f64,
    pub sigma: f64,
    /// Number of levels `N`; the recursion runs `n = 1..=N`.
    pub levels: usize,
    /// Admissible target radius `r` in the delta-graded norm.
    pub radius: f64,
    /// Relative residual tolerance of each inner solve.
    pub inner_tol: f64,
    /// Absolute floor: right-hand sides and residuals below it are resolved.
    pub inner_floor: f64,
    pub inner_max_steps: usize,
    /// Directional probes used to re-sample the inner-problem constants.
    pub probe_dirs: usize,
}

impl NashMoserConfig {
    /// Layout derived from the problem losses with margin one:
    /// `s1 = s0 + max(m, ell)` and `delta = s1 + ell' + 1`.
    pub fn for_problem(problem: &dyn TameMap, levels: usize, sigma: f64, radius: f64) -> Self {
        let p = problem.params();
        let s1 = p.s0 + p.m_loss.max(p.ell);
        NashMoserConfig {
            s0: p.s0,
            s1,
            delta: s1 + p.ell_prime + 1.0,
            lambda0: 2.0,
            sigma,
            levels,
            radius,
            inner_tol: 1e-12,
            inner_floor: 1e-12,
            inner_max_steps: 200,
            probe_dirs: 4,
        }
    }

    /// `Lambda_n` for `n >= 0`; `n = -1` denotes the zero projector.
    pub fn lambda(&self, n: i64) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.lambda0 * self.sigma.powi(n as i32)
        }
    }

    pub fn validate(&self, problem: &dyn TameMap) -> Result<()> {
        let p = problem.params();
        if self.s1 < p.s0 + p.m_loss.max(p.ell) {
            return Err(Error::Config(format!(
                "s1 = {} must be at least s0 + max(m, ell) = {}",
                self.s1,
                p.s0 + p.m_loss.max(p.ell)
            )));
        }
        if self.delta <= self.s1 + p.ell_prime {
            return Err(Error::Config(format!(
                "delta = {} must exceed s1 + ell' = {}",
                self.delta,
                self.s1 + p.ell_prime
            )));
        }
        if self.delta > problem.target().s_max() {
            return Err(Error::Config(format!(
                "delta = {} exceeds the scale range {}",
                self.delta,
                problem.target().s_max()
            )));
        }
        if !(self.lambda0 >= 1.0 && self.sigma > 1.0) {
            return Err(Error::Config(
                "schedule requires lambda0 >= 1 and sigma > 1".into(),
            ));
        }
        let top = self.lambda(self.levels as i64);
        let available = problem.domain().max_weight();
        if top > available {
            return Err(Error::Config(format!(
                "schedule tops out at {top:.1} but the truncation only resolves {available:.1}",
            )));
        }
        if !(self.radius > 0.0) {
            return Err(Error::Config("radius must be positive".into()));
        }
        Ok(())
    }
}

/// Per-level bookkeeping of one run.
#[derive(Debug, Clone, Copy)]
pub struct LevelState {
    pub n: usize,
    pub lambda: f64,
    /// Norm of the right-hand side window fed to the inner solve.
    pub rhs_norm: f64,
    /// `||z_n||_{s1}` of the accepted increment.
    pub z_norm_s1: f64,
    /// `||e_n||'_{s0}` of the unresolved-defect window.
    pub e_norm_s0: f64,
    /// `||Pi_n F(u_n) - Pi_{n-1} v||'_{s0}` after the level.
    pub identity_residual: f64,
    /// Cumulative `||G_n(v)||_{s1}`.
    pub g_norm_s1: f64,
    pub inner_steps: usize,
}

#[derive(Debug, Clone)]
pub struct NashMoserRun {
    pub levels: Vec<LevelState>,
    /// `G(v)`: the constructed preimage (partial if a level failed).
    pub solution: ScaleVector,
    pub v_norm_delta: f64,
    /// `||G(v)||_{s1} <= r^{-1} ||v||'_delta (1 + 1e-6)` held at exit.
    pub bound_ok: bool,
    /// Why the iteration stopped early, with the completed levels kept.
    pub failure: Option<String>,
}

impl NashMoserRun {
    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }
}

/// The annular target slice `Delta_n v = Pi_{n-1}(1 - Pi_{n-2}) v`
/// (`Pi_{-1} = 0`, so `Delta_1 v` is the base window).
pub fn delta_v(v: &ScaleVector, n: usize, cfg: &NashMoserConfig) -> Result<ScaleVector> {
    if n < 1 {
        return Err(Error::InvalidArgument("levels start at n = 1".into()));
    }
    let hi = cfg.lambda(n as i64 - 1);
    let lo = cfg.lambda(n as i64 - 2);
    Ok(v.band(lo, hi))
}

/// The level-`n` window of the unresolved residual,
/// `e_n = -Pi_n (1 - Pi_{n-1}) F(u_{n-1})`; zero at the base level.
pub fn defect_e(
    problem: &dyn TameMap,
    u_prev: &ScaleVector,
    n: usize,
    cfg: &NashMoserConfig,
) -> Result<ScaleVector> {
    if n < 1 {
        return Err(Error::InvalidArgument("levels start at n = 1".into()));
    }
    if n == 1 {
        return Ok(ScaleVector::zeros(problem.target()));
    }
    let fu = problem.eval(u_prev)?;
    Ok(fu
        .band(cfg.lambda(n as i64 - 1), cfg.lambda(n as i64))
        .scaled(-1.0))
}

/// Outcome of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerOutcome {
    pub z: ScaleVector,
    pub steps: usize,
    /// Constants the level problem was re-sampled at (`m`, `a`).
    pub sampled_m: f64,
    pub sampled_a: f64,
}

/// Solve the level-`n` window equation for the increment `z in E_n`.
///
/// Right-hand sides below the absolute floor are considered resolved and
/// short-circuit to `z = 0`; this is what keeps late levels (whose windows
/// carry only rounding-level defect) away from the regime where the series
/// correction of the right-inverse no longer contracts.
pub fn inner_solve(
    problem: &dyn TameMap,
    u_prev: &ScaleVector,
    rhs: &ScaleVector,
    n: usize,
    cfg: &NashMoserConfig,
) -> Result<InnerOutcome> {
    let p = problem.params();
    let lam = cfg.lambda(n as i64);
    let rhs_norm = rhs.norm(cfg.s0)?;
    if rhs_norm <= cfg.inner_floor {
        return Ok(InnerOutcome {
            z: ScaleVector::zeros(problem.domain()),
            steps: 0,
            sampled_m: 0.0,
            sampled_a: 0.0,
        });
    }

    // Re-sample the admissibility constants along the orbit of directions
    // the descent will actually push through the window.
    let mut m_hat: f64 = 0.0;
    let mut a_hat: f64 = 0.0;
    let mut w = rhs.clone();
    for _ in 0..cfg.probe_dirs {
        let wn = w.norm(cfg.s0)?;
        if wn <= cfg.inner_floor * 1e-3 {
            break;
        }
        let lw = problem
            .apply_l(u_prev, &w, lam)
            .map_err(|e| level_failure(n, &format!("inverse probe: {e}")))?;
        m_hat = m_hat.max(lw.norm(cfg.s0 + p.m_loss)? / wn);
        let dlw = problem.apply_df(u_prev, &lw)?.band(0.0, lam);
        let defect = w.sub(&dlw);
        a_hat = a_hat.max(defect.norm(cfg.s0)? / wn);
        w = defect;
    }
    if a_hat >= 0.9 {
        return Err(level_failure(
            n,
            &format!("sampled defect ratio {a_hat:.3} leaves no contraction margin"),
        ));
    }
    let a_n = (1.5 * a_hat + 0.02).min(0.9);
    let sup_l = m_hat.max(1e-12);
    let m_n = 1.5 * sup_l;

    // Ball radius: generous for the expected increment, capped so the state
    // stays strictly inside the domain ball of F.
    let headroom = 0.9 * (1.0 - u_prev.norm(cfg.s0 + p.m_loss)?);
    if headroom <= 0.0 {
        return Err(level_failure(n, "no headroom left inside the domain ball"));
    }
    let generous = 64.0 * m_n * rhs_norm / (1.0 - a_n);
    let radius_n = generous.min(headroom);

    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let s_dom = cfg.s0 + p.m_loss;
    let origin = ScaleVector::zeros(problem.domain());
    let inner = LocalProblem::new(
        |z: &ScaleVector| {
            problem
                .eval_diff(u_prev, z)
                .map(|d| d.band(0.0, lam))
                .unwrap_or_else(|e| {
                    *failure.lock().unwrap() = Some(e);
                    z.zeros_like()
                })
        },
        |z: &ScaleVector, h: &ScaleVector| {
            let at = u_prev.add_scaled(1.0, z);
            problem
                .apply_df(&at, h)
                .map(|d| d.band(0.0, lam))
                .unwrap_or_else(|e| {
                    *failure.lock().unwrap() = Some(e);
                    h.zeros_like()
                })
        },
        |z: &ScaleVector, k: &ScaleVector| {
            let at = u_prev.add_scaled(1.0, z);
            problem.apply_l(&at, k, lam).unwrap_or_else(|e| {
                *failure.lock().unwrap() = Some(e);
                k.zeros_like()
            })
        },
        move |z: &ScaleVector| z.norm(s_dom).expect("grading fixed"),
        move |k: &ScaleVector| k.norm(cfg.s0).expect("grading fixed"),
        origin,
        LocalParams {
            radius: radius_n,
            m: m_n,
            a: a_n,
            lip: 0.0,
            sup_l,
            left_invertible: false,
        },
    );

    let tol = cfg.inner_tol.max(cfg.inner_floor / rhs_norm);
    let inner_cfg = DescentConfig::for_problem(&inner)
        .with_tol(tol)
        .with_max_steps(cfg.inner_max_steps);
    let outcome = solve_local(&inner, rhs, &inner_cfg)
        .map_err(|e| level_failure(n, &format!("inner solve rejected: {e}")))?;
    if let Some(err) = failure.lock().unwrap().take() {
        return Err(level_failure(n, &format!("window operator failed: {err}")));
    }
    if !outcome.converged {
        return Err(level_failure(
            n,
            &format!(
                "inner solve ended with {:?} at residual {:.3e} (target {:.3e})",
                outcome.termination,
                outcome.final_residual(),
                tol * rhs_norm
            ),
        ));
    }
    Ok(InnerOutcome {
        z: outcome.x,
        steps: outcome.trace.len() - 1,
        sampled_m: m_n,
        sampled_a: a_n,
    })
}

fn level_failure(n: usize, reason: &str) -> Error {
    Error::LevelFailure {
        n,
        reason: reason.to_string(),
    }
}

/// Run the full iteration for the target `v` with `||v||'_delta < r`.
pub fn run(problem: &dyn TameMap, v: &ScaleVector, cfg: &NashMoserConfig) -> Result<NashMoserRun> {
    cfg.validate(problem)?;
    let v_norm_delta = v.norm(cfg.delta)?;
    if v_norm_delta >= cfg.radius {
        return Err(Error::OutOfRadius {
            norm: v_norm_delta,
            radius: cfg.radius,
        });
    }

    let mut u = ScaleVector::zeros(problem.domain());
    let mut levels = Vec::with_capacity(cfg.levels);
    let mut failure = None;
    for n in 1..=cfg.levels {
        let slice = delta_v(v, n, cfg)?;
        let defect = defect_e(problem, &u, n, cfg)?;
        let rhs = slice.add_scaled(1.0, &defect);
        let inner = match inner_solve(problem, &u, &rhs, n, cfg) {
            Ok(inner) => inner,
            Err(err) => {
                // Keep the completed levels as a partial trace.
                failure = Some(err.to_string());
                break;
            }
        };
        u = u.add_scaled(1.0, &inner.z);

        let fu = problem.eval(&u)?;
        let identity_residual = fu
            .band(0.0, cfg.lambda(n as i64))
            .sub(&v.band(0.0, cfg.lambda(n as i64 - 1)))
            .norm(cfg.s0)?;
        levels.push(LevelState {
            n,
            lambda: cfg.lambda(n as i64),
            rhs_norm: rhs.norm(cfg.s0)?,
            z_norm_s1: inner.z.norm(cfg.s1)?,
            e_norm_s0: defect.norm(cfg.s0)?,
            identity_residual,
            g_norm_s1: u.norm(cfg.s1)?,
            inner_steps: inner.steps,
        });
    }

    let g_norm = u.norm(cfg.s1)?;
    let bound_ok = g_norm <= v_norm_delta / cfg.radius * (1.0 + 1e-6);
    Ok(NashMoserRun {
        levels,
        solution: u,
        v_norm_delta,
        bound_ok,
        failure,
    })
}

/// Geometric decay ratio fitted to the increment norms of a run (least
/// squares on the log scale). Leading and trailing exactly-resolved levels
/// (zero increment) are trimmed; interior zeros are floored. Values below
/// one certify summability.
pub fn increment_decay_ratio(levels: &[LevelState]) -> Option<f64> {
    let first = levels.iter().position(|l| l.z_norm_s1 > 0.0)?;
    let last = levels.iter().rposition(|l| l.z_norm_s1 > 0.0)?;
    let pts: Vec<(f64, f64)> = levels[first..=last]
        .iter()
        .map(|l| (l.n as f64, l.z_norm_s1.max(1e-300).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    Some(slope.exp())
}

/// Deviation report of two independently configured runs over a target grid.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// Largest deviation over the grid points where both runs succeeded.
    pub max_deviation: f64,
    /// Per-point deviation; `None` marks an excluded (failed) point.
    pub deviations: Vec<Option<f64>>,
    pub failures: usize,
    /// Grading the deviations are measured at.
    pub s_meas: f64,
}

/// Run two schedules over a grid of targets and compare the constructed
/// preimages in the uniqueness-grade norm
/// `s0 + max(2m + ell', m + ell)`.
pub fn uniqueness_suite(
    problem: &dyn TameMap,
    v_grid: &[ScaleVector],
    cfg_a: &NashMoserConfig,
    cfg_b: &NashMoserConfig,
) -> Result<UniquenessReport> {
    let p = problem.params();
    let s_meas = p.s0 + (2.0 * p.m_loss + p.ell_prime).max(p.m_loss + p.ell);
    let mut deviations = Vec::with_capacity(v_grid.len());
    let mut max_deviation: f64 = 0.0;
    let mut failures = 0usize;
    for v in v_grid {
        let a = run(problem, v, cfg_a);
        let b = run(problem, v, cfg_b);
        match (a, b) {
            (Ok(ra), Ok(rb)) if ra.converged() && rb.converged() => {
                let dev = ra.solution.sub(&rb.solution).norm(s_meas)?;
                max_deviation = max_deviation.max(dev);
                deviations.push(Some(dev));
            }
            _ => {
                failures += 1;
                deviations.push(None);
            }
        }
    }
    Ok(UniquenessReport {
        max_deviation,
        deviations,
        failures,
        s_meas,
    })
}

/// Empirical admissible radius: bisect the largest scaling of `v_hat`
/// (normalized in the delta-norm) for which every level converges, and
/// return that delta-norm. The caller freezes the returned value into its
/// configuration.
pub fn calibrate_radius(
    problem: &dyn TameMap,
    v_hat: &ScaleVector,
    cfg: &NashMoserConfig,
    t_max: f64,
    bisections: usize,
) -> Result<f64> {
    let base_norm = v_hat.norm(cfg.delta)?;
    if base_norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let unit = v_hat.scaled(1.0 / base_norm);
    let mut probe_cfg = *cfg;
    probe_cfg.radius = f64::MAX;
    let succeeds = |t: f64| {
        run(problem, &unit.scaled(t), &probe_cfg)
            .map(|r| r.converged())
            .unwrap_or(false)
    };

    if succeeds(t_max) {
        return Ok(t_max);
    }
    let mut lo = 0.0f64;
    let mut hi = t_max;
    if !succeeds(t_max * 1e-3) {
        return Err(Error::InvalidArgument(
            "no admissible radius found down to t_max/1000".into(),
        ));
    }
    lo = lo.max(t_max * 1e-3);
    for _ in 0..bisections {
        let mid = 0.5 * (lo + hi);
        if succeeds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
