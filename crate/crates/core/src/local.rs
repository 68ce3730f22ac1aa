//! Local solve of `f(x) = y` inside a ball by the right-inverse descent flow.
//!
//! The problem supplies `f`, the directional derivative `Df`, an approximate
//! right-inverse `L` of `Df`, and the constants `(R, m, a)` under which the
//! flow `dx/dt = L(x)(y - f(x))` contracts the residual. The solver is an
//! explicit Euler discretization of that flow with a step-halving line
//! search; the decay inequality the continuous flow satisfies becomes a
//! checkable contract on the recorded trace.

use crate::error::{Error, Result};
use crate::space::LinearOps;

/// Constants of a local problem: ball radius, right-inverse bound,
/// approximation defect, Lipschitz bound, sampled sup of `||L||`.
#[derive(Debug, Clone, Copy)]
pub struct LocalParams {
    /// Radius of the open domain ball around the origin.
    pub radius: f64,
    /// Uniform right-inverse bound: `sup ||L(x)|| < m`.
    pub m: f64,
    /// Approximation defect of `L`: `||(Df(x')L(x) - I)w|| <= a ||w||` near `x`.
    pub a: f64,
    /// Lipschitz bound of `f` on the ball.
    pub lip: f64,
    /// Sampled or analytic value of `sup ||L||` (must be `< m`).
    pub sup_l: f64,
    /// Whether `L(x)` is also a left-inverse of `Df(x)` (uniqueness device).
    pub left_invertible: bool,
}

type EvalFn<'a, X, Y> = Box<dyn Fn(&X) -> Y + Send + Sync + 'a>;
type DerivFn<'a, X, Y> = Box<dyn Fn(&X, &X) -> Y + Send + Sync + 'a>;
type InverseFn<'a, X, Y> = Box<dyn Fn(&X, &Y) -> X + Send + Sync + 'a>;
type NormFn<'a, V> = Box<dyn Fn(&V) -> f64 + Send + Sync + 'a>;

/// A map `f` between two normed spaces together with its linearization,
/// an approximate right-inverse of the linearization, and the constants
/// under which the descent flow is admissible.
pub struct LocalProblem<'a, X, Y> {
    f: EvalFn<'a, X, Y>,
    df: DerivFn<'a, X, Y>,
    l: InverseFn<'a, X, Y>,
    norm_x: NormFn<'a, X>,
    norm_y: NormFn<'a, Y>,
    origin: X,
    pub params: LocalParams,
}

pub type OwnedLocalProblem<X, Y> = LocalProblem<'static, X, Y>;

impl<'a, X: LinearOps, Y: LinearOps> LocalProblem<'a, X, Y> {
    pub fn new(
        f: impl Fn(&X) -> Y + Send + Sync + 'a,
        df: impl Fn(&X, &X) -> Y + Send + Sync + 'a,
        l: impl Fn(&X, &Y) -> X + Send + Sync + 'a,
        norm_x: impl Fn(&X) -> f64 + Send + Sync + 'a,
        norm_y: impl Fn(&Y) -> f64 + Send + Sync + 'a,
        origin: X,
        params: LocalParams,
    ) -> Self {
        LocalProblem {
            f: Box::new(f),
            df: Box::new(df),
            l: Box::new(l),
            norm_x: Box::new(norm_x),
            norm_y: Box::new(norm_y),
            origin,
            params,
        }
    }

    /// The zero of the domain space (where `f` vanishes).
    pub fn origin(&self) -> &X {
        &self.origin
    }

    pub fn eval_f(&self, x: &X) -> Y {
        (self.f)(x)
    }

    pub fn apply_df(&self, x: &X, h: &X) -> Y {
        (self.df)(x, h)
    }

    pub fn apply_l(&self, x: &X, k: &Y) -> X {
        (self.l)(x, k)
    }

    pub fn norm_x(&self, x: &X) -> f64 {
        (self.norm_x)(x)
    }

    pub fn norm_y(&self, y: &Y) -> f64 {
        (self.norm_y)(y)
    }

    /// Admissible target radius from the origin: `R' = (1 - a) R / m`.
    pub fn admissible_radius(&self) -> f64 {
        (1.0 - self.params.a) * self.params.radius / self.params.m
    }

    /// Admissible target radius for a warm start with `||x0|| = dist`.
    pub fn admissible_radius_at(&self, dist: f64) -> f64 {
        (1.0 - self.params.a) * (self.params.radius - dist) / self.params.m
    }

    /// The norm amplification `m / (1 - a)` of the continuous selection.
    pub fn selection_bound(&self) -> f64 {
        self.params.m / (1.0 - self.params.a)
    }
}

/// Time-stepping configuration for the discretized descent flow.
#[derive(Debug, Clone, Copy)]
pub struct DescentConfig {
    /// Euler step `h`; at most `tau`.
    pub step: f64,
    /// Relaxed defect `a < a' < 1` used by the acceptance rule.
    pub a_prime: f64,
    /// Relative residual stopping threshold.
    pub tol: f64,
    pub max_steps: usize,
    /// Guaranteed flow horizon `(m - m0) / ((1 - a') m0)`.
    pub tau: f64,
    /// Intermediate bound `sup ||L|| < m0 < m`.
    pub m0: f64,
}

impl DescentConfig {
    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step.min(self.tau);
        self
    }

    /// Defaults derived from the problem constants: `m0` midway between the
    /// sampled sup and `m`, `a' = (1 + a)/2`, unit step capped by `tau`,
    /// relative tolerance `1e-12`.
    pub fn for_problem<X: LinearOps, Y: LinearOps>(problem: &LocalProblem<'_, X, Y>) -> Self {
        let p = &problem.params;
        let m0 = 0.5 * (p.sup_l + p.m);
        let a_prime = 0.5 * (1.0 + p.a);
        let tau = (p.m - m0) / ((1.0 - a_prime) * m0);
        DescentConfig {
            step: tau.min(1.0),
            a_prime,
            tol: 1e-12,
            max_steps: 600,
            tau,
            m0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= self.tau) {
            return Err(Error::InvalidArgument(format!(
                "step must lie in (0, tau = {}], got {}",
                self.tau, self.step
            )));
        }
        if !(self.a_prime < 1.0 && self.a_prime > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "a' must lie in (0, 1), got {}",
                self.a_prime
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }
}

/// One accepted Euler step of the flow.
#[derive(Debug, Clone, Copy)]
pub struct TraceStep {
    pub index: usize,
    pub time: f64,
    pub residual: f64,
    pub x_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxSteps,
    /// The line search could not find a residual-decreasing step.
    Stalled,
    /// Every trial step left the domain ball.
    RadiusBreach,
}

/// Outcome of a local solve, with the flow bookkeeping needed to audit the
/// decay contract afterwards.
#[derive(Debug, Clone)]
pub struct SolveResult<X> {
    pub x: X,
    pub trace: Vec<TraceStep>,
    pub flow_time: f64,
    pub termination: Termination,
    pub converged: bool,
    /// `||x - x0|| <= m/(1-a) ||y - f(x0)|| (1 + 1e-9)` held at exit.
    pub bound_ok: bool,
    pub y_norm: f64,
    pub initial_residual: f64,
    pub tol: f64,
    pub tau: f64,
}

impl<X> SolveResult<X> {
    pub fn residuals(&self) -> Vec<f64> {
        self.trace.iter().map(|s| s.residual).collect()
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map(|s| s.residual).unwrap_or(0.0)
    }
}

/// One explicit Euler step `x + h L(x)(y - f(x))`.
///
/// Rejects steps that leave the open ball.
pub fn descent_step<X: LinearOps, Y: LinearOps>(
    problem: &LocalProblem<'_, X, Y>,
    x: &X,
    y: &Y,
    h: f64,
) -> Result<X> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive, got {h}"
        )));
    }
    let xn = problem.norm_x(x);
    if xn >= problem.params.radius {
        return Err(Error::OutOfBall {
            norm: xn,
            radius: problem.params.radius,
        });
    }
    let w = y.sub(&problem.eval_f(x));
    let direction = problem.apply_l(x, &w);
    let next = x.add_scaled(h, &direction);
    let next_norm = problem.norm_x(&next);
    if next_norm >= problem.params.radius {
        return Err(Error::RadiusBreach {
            radius: problem.params.radius,
        });
    }
    Ok(next)
}

/// Truncated geometric-series correction of the right-inverse:
/// `L(x) (sum_{j < terms} P^j k)` with `P = I - Df(x) L(x)`.
///
/// The defect after `terms` terms is bounded by `a^terms ||k||`.
pub fn neumann_right_inverse<X: LinearOps, Y: LinearOps>(
    problem: &LocalProblem<'_, X, Y>,
    x: &X,
    k: &Y,
    terms: usize,
) -> Result<X> {
    if terms < 1 {
        return Err(Error::InvalidArgument(
            "the series needs at least one term".into(),
        ));
    }
    if problem.params.a >= 1.0 {
        return Err(Error::InvalidArgument(
            "series requires defect a < 1".into(),
        ));
    }
    let mut acc = k.clone();
    let mut term = k.clone();
    for _ in 1..terms {
        // P w = w - Df(x) L(x) w
        let lw = problem.apply_l(x, &term);
        term = term.sub(&problem.apply_df(x, &lw));
        acc = acc.add_scaled(1.0, &term);
    }
    Ok(problem.apply_l(x, &acc))
}

/// Solve `f(x) = y` from the origin.
pub fn solve_local<X: LinearOps, Y: LinearOps>(
    problem: &LocalProblem<'_, X, Y>,
    y: &Y,
    cfg: &DescentConfig,
) -> Result<SolveResult<X>> {
    let zero = problem.origin().clone();
    solve_local_from(problem, &zero, y, cfg)
}

/// Solve `f(x) = y` starting from `x0` inside the ball.
///
/// With `x0 = 0` the admissibility precondition is `||y|| < (1-a) R / m`;
/// from a warm start it shrinks to the local radius around `f(x0)`.
pub fn solve_local_from<X: LinearOps, Y: LinearOps>(
    problem: &LocalProblem<'_, X, Y>,
    x0: &X,
    y: &Y,
    cfg: &DescentConfig,
) -> Result<SolveResult<X>> {
    cfg.validate()?;
    let p = problem.params;
    if cfg.a_prime <= p.a {
        return Err(Error::InvalidArgument(format!(
            "a' = {} must exceed the problem defect a = {}",
            cfg.a_prime, p.a
        )));
    }
    let x0_norm = problem.norm_x(x0);
    if x0_norm >= p.radius {
        return Err(Error::OutOfBall {
            norm: x0_norm,
            radius: p.radius,
        });
    }

    let y_norm = problem.norm_y(y);
    let mut w = y.sub(&problem.eval_f(x0));
    let r0 = problem.norm_y(&w);
    let admissible = problem.admissible_radius_at(x0_norm);
    if r0 >= admissible {
        return Err(Error::OutOfRadius {
            norm: r0,
            radius: admissible,
        });
    }

    let stop = cfg.tol * y_norm;
    let bound = problem.selection_bound() * r0 * (1.0 + 1e-9);

    let mut x = x0.clone();
    let mut r = r0;
    let mut t = 0.0;
    let mut trace = vec![TraceStep {
        index: 0,
        time: 0.0,
        residual: r0,
        x_norm: x0_norm,
    }];

    // Degenerate target: nothing to flow.
    if r0 == 0.0 || r0 <= stop {
        return Ok(SolveResult {
            x,
            trace,
            flow_time: 0.0,
            termination: Termination::Converged,
            converged: true,
            bound_ok: true,
            y_norm,
            initial_residual: r0,
            tol: cfg.tol,
            tau: cfg.tau,
        });
    }

    let mut termination = Termination::MaxSteps;
    for index in 1..=cfg.max_steps {
        let direction = problem.apply_l(&x, &w);
        let mut h = cfg.step;
        let mut accepted = None;
        let mut radius_blocked = true;
        for _ in 0..60 {
            let candidate = x.add_scaled(h, &direction);
            if problem.norm_x(&candidate) >= p.radius {
                h *= 0.5;
                continue;
            }
            radius_blocked = false;
            let w_new = y.sub(&problem.eval_f(&candidate));
            let r_new = problem.norm_y(&w_new);
            // Accept when the residual decays at least half the contracted rate.
            if r_new <= (1.0 - (1.0 - cfg.a_prime) * h * 0.5) * r {
                accepted = Some((candidate, w_new, r_new, h));
                break;
            }
            h *= 0.5;
        }

        match accepted {
            Some((candidate, w_new, r_new, h_used)) => {
                x = candidate;
                w = w_new;
                r = r_new;
                t += h_used;
                trace.push(TraceStep {
                    index,
                    time: t,
                    residual: r,
                    x_norm: problem.norm_x(&x),
                });
                if r <= stop {
                    termination = Termination::Converged;
                    break;
                }
            }
            None => {
                termination = if radius_blocked {
                    Termination::RadiusBreach
                } else {
                    Termination::Stalled
                };
                break;
            }
        }
    }

    let converged = termination == Termination::Converged;
    let shift = x.sub(x0);
    let bound_ok = problem.norm_x(&shift) <= bound;
    Ok(SolveResult {
        x,
        trace,
        flow_time: t,
        termination,
        converged,
        bound_ok,
        y_norm,
        initial_residual: r0,
        tol: cfg.tol,
        tau: cfg.tau,
    })
}

/// Audit a recorded trace against the flow decay contract
/// `residual(t) <= (1 - (1 - a') t) residual(0) + 10 tol ||y||`
/// for every recorded time `t <= min(tau, 1/2)`.
pub fn residual_decay_check<X>(result: &SolveResult<X>, a_prime: f64) -> bool {
    let horizon = result.tau.min(0.5);
    let slack = 10.0 * result.tol * result.y_norm;
    let r0 = result.initial_residual;
    result
        .trace
        .iter()
        .filter(|s| s.time <= horizon + 1e-15)
        .all(|s| s.residual <= (1.0 - (1.0 - a_prime) * s.time) * r0 + slack)
}

/// Randomized certification of the problem assumptions.
#[derive(Debug, Clone, Copy)]
pub struct AssumptionReport {
    /// `||f(0)||` (must be 0).
    pub f_origin_norm: f64,
    /// Largest sampled `||L(x) v|| / ||v||`.
    pub worst_l_ratio: f64,
    /// Largest sampled `||(Df(x') L(x) - I) w|| / ||w||` for `x'` near `x`.
    pub worst_defect_ratio: f64,
}

/// Sample the uniform right-inverse bound and the approximation defect over
/// random points and directions. The defect radius is existential in the
/// assumptions, so this can falsify but never fully certify them.
pub fn certify_assumptions<'a, X, Y>(
    problem: &LocalProblem<'a, X, Y>,
    mut sample_x: impl FnMut() -> X,
    mut sample_y: impl FnMut() -> Y,
    trials: usize,
    proximity: f64,
) -> AssumptionReport
where
    X: LinearOps,
    Y: LinearOps,
{
    let f0 = problem.eval_f(problem.origin());
    let f_origin_norm = problem.norm_y(&f0);
    let mut worst_l_ratio: f64 = 0.0;
    let mut worst_defect_ratio: f64 = 0.0;
    for _ in 0..trials {
        let x = sample_x();
        let w = sample_y();
        let wn = problem.norm_y(&w);
        if wn == 0.0 {
            continue;
        }
        let lw = problem.apply_l(&x, &w);
        worst_l_ratio = worst_l_ratio.max(problem.norm_x(&lw) / wn);

        // Perturb the evaluation point of Df while keeping L anchored at x.
        let shift = sample_x();
        let sn = problem.norm_x(&shift).max(1e-300);
        let x_near = x.add_scaled(proximity / sn, &shift);
        if problem.norm_x(&x_near) >= problem.params.radius {
            continue;
        }
        let defect = problem.apply_df(&x_near, &lw).sub(&w);
        worst_defect_ratio = worst_defect_ratio.max(problem.norm_y(&defect) / wn);
    }
    AssumptionReport {
        f_origin_norm,
        worst_l_ratio,
        worst_defect_ratio,
    }
}
