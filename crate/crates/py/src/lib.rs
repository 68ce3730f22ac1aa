//! Python bindings for the solver: the model-problem solves, the root
//! census, the scale-axiom sweeps and the multilevel run are exposed as
//! plain functions and small result classes.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ridflow::branch::{census_roots, track_path, PathSpec};
use ridflow::local::{solve_local, DescentConfig};
use ridflow::nash_moser::{increment_decay_ratio, run as nm_run, NashMoserConfig};
use ridflow::problems::example_a::ExampleA;
use ridflow::problems::nemytskii::NemytskiiProblem;
use ridflow::problems::synthetic::SyntheticLossProblem;
use ridflow::problems::tame::{random_scale_vector, TameMap};
use ridflow::scale::{ProjectorFamily, ScaleSpec};
use ridflow::space::LinearOps;

fn to_py_err(err: ridflow::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// One local solve: solution, residual history and contract flags.
#[pyclass]
#[derive(Clone)]
struct SolveReport {
    #[pyo3(get)]
    x: Complex64,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    bound_ok: bool,
    #[pyo3(get)]
    residuals: Vec<f64>,
    #[pyo3(get)]
    flow_time: f64,
}

#[pymethods]
impl SolveReport {
    fn __repr__(&self) -> String {
        format!(
            "SolveReport(x=({:.8}+{:.8}j), converged={}, residual={:.3e})",
            self.x.re,
            self.x.im,
            self.converged,
            self.residuals.last().copied().unwrap_or(0.0)
        )
    }
}

/// Solve `(2+z)^n - 2^n = target` by the descent flow from the origin.
#[pyfunction]
#[pyo3(signature = (n, target, m=None, a=1e-3, tol=1e-12))]
fn solve_example_a(
    n: u32,
    target: Complex64,
    m: Option<f64>,
    a: f64,
    tol: f64,
) -> PyResult<SolveReport> {
    let f = ExampleA::new(n).map_err(to_py_err)?;
    let problem = f
        .problem(m.unwrap_or(2.0 / n as f64), a)
        .map_err(to_py_err)?;
    let cfg = DescentConfig::for_problem(&problem).with_tol(tol);
    let result = solve_local(&problem, &target, &cfg).map_err(to_py_err)?;
    Ok(SolveReport {
        x: result.x,
        converged: result.converged,
        bound_ok: result.bound_ok,
        residuals: result.residuals(),
        flow_time: result.flow_time,
    })
}

/// Principal-branch closed-form inverse of the model polynomial.
#[pyfunction]
fn closed_inverse_example_a(n: u32, target: Complex64) -> PyResult<Complex64> {
    ExampleA::new(n)
        .and_then(|f| f.closed_inverse(target))
        .map_err(to_py_err)
}

/// Number of solutions of `(2+z)^n - 2^n = target` with `|z| <= radius`.
#[pyfunction]
fn root_census(n: u32, target: Complex64, radius: f64) -> PyResult<usize> {
    census_roots(n, target, radius)
        .map(|roots| roots.len())
        .map_err(to_py_err)
}

/// Track the selection around a circle of targets; returns the closure gap.
#[pyfunction]
#[pyo3(signature = (n, radius, samples=256))]
fn circle_closure_gap(n: u32, radius: f64, samples: usize) -> PyResult<f64> {
    let f = ExampleA::new(n).map_err(to_py_err)?;
    let problem = f.problem(2.0 / n as f64, 1e-3).map_err(to_py_err)?;
    let cfg = DescentConfig::for_problem(&problem);
    let path = PathSpec::circle(radius, samples, radius);
    let branch = track_path(&problem, &path, &cfg).map_err(to_py_err)?;
    branch
        .closure_gap
        .ok_or_else(|| PyValueError::new_err("path did not close"))
}

/// Invert the superposition operator pointwise on a grid of values.
#[pyfunction]
fn nemytskii_invert(values: Vec<f64>) -> PyResult<Vec<f64>> {
    let p = NemytskiiProblem::sine_default(values.len());
    p.exact_inverse(&values).map_err(to_py_err)
}

/// Worst loss/gain ratios over seeded random samples of the scale axioms.
#[pyfunction]
#[pyo3(signature = (k_max=128, trials=10_000, seed=7))]
fn verify_scale_axioms(k_max: i64, trials: usize, seed: u64) -> PyResult<(f64, f64)> {
    let spec = ScaleSpec::new(6.0, k_max).map_err(to_py_err)?;
    let family = ProjectorFamily::sharp(&spec);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst_loss: f64 = 0.0;
    let mut worst_gain: f64 = 0.0;
    for _ in 0..trials {
        let u = random_scale_vector(&spec, 1.0, 0.0, 1.0, &mut rng);
        let s = rng.gen_range(0.0..6.0);
        let t = rng.gen_range(0.0..6.0);
        let lam = rng.gen_range(1.0..spec.max_weight());
        worst_loss = worst_loss.max(family.verify_loss(&u, s, t, lam).map_err(to_py_err)?);
        let (s_hi, t_lo) = if s >= t { (s, t) } else { (t, s) };
        worst_gain = worst_gain.max(family.verify_gain(&u, s_hi, t_lo, lam).map_err(to_py_err)?);
    }
    Ok((worst_loss, worst_gain))
}

/// Multilevel run summary on the manufactured derivative-loss problem.
#[pyclass]
struct MultilevelReport {
    #[pyo3(get)]
    recovery_error: f64,
    #[pyo3(get)]
    worst_identity_residual: f64,
    #[pyo3(get)]
    increment_decay_ratio: Option<f64>,
    #[pyo3(get)]
    bound_ok: bool,
    #[pyo3(get)]
    levels: usize,
}

#[pymethods]
impl MultilevelReport {
    fn __repr__(&self) -> String {
        format!(
            "MultilevelReport(levels={}, recovery_error={:.3e}, worst_identity={:.3e})",
            self.levels, self.recovery_error, self.worst_identity_residual
        )
    }
}

/// Run the manufactured-solution experiment and report the recovery error.
#[pyfunction]
#[pyo3(signature = (k_max=256, levels=6, sigma=2.0, eps=0.01, ell_prime=2.0))]
fn nash_moser_demo(
    k_max: i64,
    levels: usize,
    sigma: f64,
    eps: f64,
    ell_prime: f64,
) -> PyResult<MultilevelReport> {
    let spec = ScaleSpec::new(6.0, k_max).map_err(to_py_err)?;
    let p = SyntheticLossProblem::new(&spec, ell_prime, eps).map_err(to_py_err)?;
    let cfg = NashMoserConfig::for_problem(&p, levels, sigma, 1.0);
    let u_star = p.manufactured_state();
    let v = p.eval(&u_star).map_err(to_py_err)?;
    let out = nm_run(&p, &v, &cfg).map_err(to_py_err)?;
    let recovery = out
        .solution
        .sub(&u_star)
        .norm(cfg.s1)
        .map_err(to_py_err)?;
    Ok(MultilevelReport {
        recovery_error: recovery,
        worst_identity_residual: out
            .levels
            .iter()
            .map(|l| l.identity_residual)
            .fold(0.0, f64::max),
        increment_decay_ratio: increment_decay_ratio(&out.levels),
        bound_ok: out.bound_ok,
        levels: out.levels.len(),
    })
}

#[pymodule]
fn ridflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SolveReport>()?;
    m.add_class::<MultilevelReport>()?;
    m.add_function(wrap_pyfunction!(solve_example_a, m)?)?;
    m.add_function(wrap_pyfunction!(closed_inverse_example_a, m)?)?;
    m.add_function(wrap_pyfunction!(root_census, m)?)?;
    m.add_function(wrap_pyfunction!(circle_closure_gap, m)?)?;
    m.add_function(wrap_pyfunction!(nemytskii_invert, m)?)?;
    m.add_function(wrap_pyfunction!(verify_scale_axioms, m)?)?;
    m.add_function(wrap_pyfunction!(nash_moser_demo, m)?)?;
    Ok(())
}
