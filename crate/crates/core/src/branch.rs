//! Track the continuous selection `y -> g(y)` along target paths with warm
//! starts, probe pointwise uniqueness, and count competing solutions with an
//! independent root oracle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::local::{solve_local_from, DescentConfig, LocalProblem};
use crate::poly::ComplexPoly;
use crate::problems::example_a::ExampleA;
use crate::space::LinearOps;

/// An ordered list of admissible targets starting at the origin.
#[derive(Debug, Clone)]
pub struct PathSpec<Y> {
    pub samples: Vec<Y>,
    pub max_gap: f64,
}

impl PathSpec<Complex64> {
    /// Straight path `0 -> target` in `steps` equal hops.
    pub fn line(target: Complex64, steps: usize, max_gap: f64) -> Self {
        let samples = (0..=steps)
            .map(|i| target * (i as f64 / steps as f64))
            .collect();
        PathSpec { samples, max_gap }
    }

    /// Lead-in `0 -> radius` followed by a full circle of the given radius.
    ///
    /// The final sample reuses the first circle sample verbatim so closure
    /// can be detected by exact equality.
    pub fn circle(radius: f64, circle_samples: usize, max_gap: f64) -> Self {
        let start = Complex64::new(radius, 0.0);
        let mut samples = vec![Complex64::new(0.0, 0.0), start];
        for j in 1..circle_samples {
            let theta = std::f64::consts::TAU * j as f64 / circle_samples as f64;
            samples.push(Complex64::from_polar(radius, theta));
        }
        samples.push(start);
        PathSpec { samples, max_gap }
    }
}

/// Sampled branch of the continuous selection along a path.
#[derive(Debug, Clone)]
pub struct BranchResult<X> {
    pub points: Vec<X>,
    /// Final solve residual per sample (zero for the origin sample).
    pub residuals: Vec<f64>,
    pub residual_max: f64,
    /// `||g(y_{i+1}) - g(y_i)||` per segment.
    pub modulus: Vec<f64>,
    /// `||g(y_N) - g(y_j)||` for the earliest `j` with `y_j = y_N` exactly.
    pub closure_gap: Option<f64>,
    /// Every segment satisfied the selection bound `m/(1-a) ||dy||`.
    pub bound_ok: bool,
}

/// Margin applied to the theoretical warm-start radius before accepting a
/// segment, absorbing discretization slack.
const SEGMENT_MARGIN: f64 = 0.9;

/// Track the selection along `path` by solving each sample from the previous
/// solution as warm start. The first sample must be the origin.
pub fn track_path<X: LinearOps, Y: LinearOps>(
    problem: &LocalProblem<'_, X, Y>,
    path: &PathSpec<Y>,
    cfg: &DescentConfig,
) -> Result<BranchResult<X>> {
    if path.samples.is_empty() {
        return Err(Error::InvalidArgument("path has no samples".into()));
    }
    if problem.norm_y(&path.samples[0]) != 0.0 {
        return Err(Error::InvalidArgument(
            "path must start at the zero target".into(),
        ));
    }
    for (i, pair) in path.samples.windows(2).enumerate() {
        let gap = problem.norm_y(&pair[1].sub(&pair[0]));
        if gap > path.max_gap {
            return Err(Error::PathRefinement {
                segment: i,
                gap,
                limit: path.max_gap,
            });
        }
    }

    let selection_bound = problem.selection_bound();
    let mut points: Vec<X> = Vec::with_capacity(path.samples.len());
    let mut residuals = Vec::with_capacity(path.samples.len());
    let mut modulus = Vec::with_capacity(path.samples.len().saturating_sub(1));
    let mut residual_max: f64 = 0.0;
    let mut bound_ok = true;

    let mut current = problem.origin().clone();
    points.push(current.clone());
    residuals.push(0.0);

    for i in 1..path.samples.len() {
        let y_prev = &path.samples[i - 1];
        let y_next = &path.samples[i];
        let gap = problem.norm_y(&y_next.sub(y_prev));
        let local_radius = problem.admissible_radius_at(problem.norm_x(&current));
        if gap >= SEGMENT_MARGIN * local_radius {
            return Err(Error::PathRefinement {
                segment: i - 1,
                gap,
                limit: SEGMENT_MARGIN * local_radius,
            });
        }
        let solve = solve_local_from(problem, &current, y_next, cfg)?;
        if !solve.converged {
            return Err(Error::LevelFailure {
                n: i,
                reason: format!(
                    "segment solve ended with {:?} at residual {:.3e}",
                    solve.termination,
                    solve.final_residual()
                ),
            });
        }
        residuals.push(solve.final_residual());
        residual_max = residual_max.max(solve.final_residual());
        let step_norm = problem.norm_x(&solve.x.sub(&current));
        modulus.push(step_norm);
        if step_norm > selection_bound * gap * (1.0 + 1e-6) {
            bound_ok = false;
        }
        if !solve.bound_ok {
            bound_ok = false;
        }
        current = solve.x;
        points.push(current.clone());
    }

    // Closure against the earliest exactly-repeated sample.
    let last = path.samples.len() - 1;
    let closure_gap = (0..last)
        .find(|&j| problem.norm_y(&path.samples[j].sub(&path.samples[last])) == 0.0)
        .map(|j| problem.norm_x(&points[j].sub(&points[last])));

    Ok(BranchResult {
        points,
        residuals,
        residual_max,
        modulus,
        closure_gap,
        bound_ok,
    })
}

/// Outcome of a multi-start coincidence probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeVerdict {
    /// All runs converged to one point (within `10 tol`).
    Unique,
    /// At least two runs converged to separated points.
    Distinct { separation: f64 },
    /// Some run failed to converge; no verdict.
    Indeterminate { failures: usize },
}

/// Solve the same target from several admissible warm starts and compare the
/// limits. A left-inverse certificate on the problem is required, since
/// coincidence of limits is the numerical surrogate for the uniqueness of
/// the continuous selection.
pub fn uniqueness_probe<X: LinearOps, Y: LinearOps>(
    problem: &LocalProblem<'_, X, Y>,
    y: &Y,
    starts: &[X],
    cfg: &DescentConfig,
) -> Result<ProbeVerdict> {
    if !problem.params.left_invertible {
        return Err(Error::InvalidArgument(
            "uniqueness probe requires a left-inverse certificate".into(),
        ));
    }
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no starts supplied".into()));
    }
    let mut limits: Vec<X> = Vec::new();
    let mut failures = 0usize;
    for x0 in starts {
        let run = solve_local_from(problem, x0, y, cfg)?;
        if run.converged {
            limits.push(run.x);
        } else {
            failures += 1;
        }
    }
    if failures > 0 {
        return Ok(ProbeVerdict::Indeterminate { failures });
    }
    let scale = limits
        .iter()
        .map(|x| problem.norm_x(x))
        .fold(0.0f64, f64::max);
    let threshold = 10.0 * cfg.tol * (1.0 + scale);
    let mut separation: f64 = 0.0;
    for i in 0..limits.len() {
        for j in (i + 1)..limits.len() {
            separation = separation.max(problem.norm_x(&limits[i].sub(&limits[j])));
        }
    }
    if separation <= threshold {
        Ok(ProbeVerdict::Unique)
    } else {
        Ok(ProbeVerdict::Distinct { separation })
    }
}

/// Number of solutions of `(2 + z)^n - 2^n = target` in the closed disc
/// `|z| <= radius`, via the multi-start Newton oracle on the expanded
/// polynomial (deduplication at 1e-9).
pub fn root_census(n: u32, target: Complex64, radius: f64) -> Result<usize> {
    if radius <= 0.0 {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    Ok(census_roots(n, target, radius)?.len())
}

/// The census roots themselves (ascending argument), for reporting.
pub fn census_roots(n: u32, target: Complex64, radius: f64) -> Result<Vec<Complex64>> {
    let f = ExampleA::new(n)?;
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    coeffs.push(-target);
    coeffs.extend(
        f.coefficients()
            .iter()
            .map(|&a| Complex64::new(a, 0.0)),
    );
    let poly = ComplexPoly::new(coeffs);
    Ok(poly.roots_in_disc(Complex64::new(0.0, 0.0), radius, 1e-9))
}
