//! Config-driven front end: local solves, branch tracking, root censuses,
//! estimate sweeps and multilevel runs, each emitting deterministic CSV
//! artifacts.
//!
//! Exit codes: 0 success, 2 config error, 3 out-of-radius, 4 non-convergence,
//! 5 oracle failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ridflow::branch::{census_roots, track_path, PathSpec};
use ridflow::config::ConfigDoc;
use ridflow::local::{solve_local, DescentConfig, OwnedLocalProblem};
use ridflow::nash_moser::{increment_decay_ratio, run as nm_run, uniqueness_suite, NashMoserConfig};
use ridflow::problems::example_a::ExampleA;
use ridflow::problems::nemytskii::NemytskiiProblem;
use ridflow::problems::synthetic::SyntheticLossProblem;
use ridflow::problems::tame::{
    random_scale_vector, verify_tame_direct, verify_tame_inverse, TameMap,
};
use ridflow::report::{fmt_f, write_branch, write_csv, write_levels, write_solve_trace};
use ridflow::scale::{read_modes, write_modes, ProjectorFamily, ScaleSpec, ScaleVector};
use ridflow::space::LinearOps;
use ridflow::{Error, Result};

#[derive(Parser)]
#[command(name = "ridflow", version, about = "right-inverse descent and multilevel Galerkin solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration file.
    #[arg(long, global = true, default_value = "run.cfg")]
    config: PathBuf,
    /// Seed for randomized sweeps (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve f(x) = y for one target.
    Solve,
    /// Track the continuous selection along a target path.
    Branch,
    /// Count solutions in a disc with the independent root oracle.
    Census,
    /// Randomized sweeps of the scale axioms and tame estimates.
    VerifyTame,
    /// Multilevel Galerkin run on the manufactured problem.
    Nashmoser,
    /// Compare two schedules over a target grid.
    Uniqueness,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", cli.config.display())))?;
    let doc = ConfigDoc::parse(&text)?;
    let seed = match cli.seed {
        Some(s) => s,
        None => doc.u64_or("run", "seed", 0)?,
    };
    fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Solve => cmd_solve(&doc, &cli.out),
        Command::Branch => cmd_branch(&doc, &cli.out),
        Command::Census => cmd_census(&doc, &cli.out),
        Command::VerifyTame => cmd_verify_tame(&doc, seed, &cli.out),
        Command::Nashmoser => cmd_nashmoser(&doc, &cli.out),
        Command::Uniqueness => cmd_uniqueness(&doc, &cli.out),
    }
}

fn example_a_from(doc: &ConfigDoc) -> Result<(ExampleA, OwnedLocalProblem<Complex64, Complex64>)> {
    let n = doc.u64("problem", "n")? as u32;
    let f = ExampleA::new(n)?;
    let m = doc.f64_or("problem", "m", 2.0 / n as f64)?;
    let a = doc.f64_or("problem", "a", 1e-3)?;
    let p = f.problem(m, a)?;
    Ok((f, p))
}

fn descent_cfg<X: LinearOps, Y: LinearOps>(
    doc: &ConfigDoc,
    problem: &ridflow::local::LocalProblem<'_, X, Y>,
) -> Result<DescentConfig> {
    let mut cfg = DescentConfig::for_problem(problem);
    cfg = cfg.with_tol(doc.f64_or("descent", "tol", cfg.tol)?);
    cfg = cfg.with_max_steps(doc.usize_or("descent", "max_steps", cfg.max_steps)?);
    if doc.get("descent", "step").is_some() {
        cfg = cfg.with_step(doc.f64("descent", "step")?);
    }
    if doc.get("descent", "a_prime").is_some() {
        cfg.a_prime = doc.f64("descent", "a_prime")?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_solve(doc: &ConfigDoc, out: &Path) -> Result<ExitCode> {
    let kind = doc.str_or("problem", "kind", "example-a");
    match kind {
        "example-a" => {
            let (_, problem) = example_a_from(doc)?;
            let target = doc.complex("solve", "target")?;
            let cfg = descent_cfg(doc, &problem)?;
            let result = solve_local(&problem, &target, &cfg)?;
            write_solve_trace(&out.join("trace.csv"), &result)?;
            println!(
                "solve example-a: converged={} x=({:.8}, {:.8}) residual={:.3e} steps={} bound_ok={}",
                result.converged,
                result.x.re,
                result.x.im,
                result.final_residual(),
                result.trace.len() - 1,
                result.bound_ok,
            );
            Ok(exit_for(result.converged))
        }
        "nemytskii" => {
            let grid_size = doc.usize_or("problem", "grid_size", 1024)?;
            let nem = NemytskiiProblem::sine_default(grid_size);
            let problem = nem.default_problem();
            let level = doc.f64("solve", "target_const")?;
            let target = vec![level; grid_size];
            let cfg = descent_cfg(doc, &problem)?;
            let result = solve_local(&problem, &target, &cfg)?;
            write_solve_trace(&out.join("trace.csv"), &result)?;
            let oracle = nem.exact_inverse(&target)?;
            let dev = result
                .x
                .iter()
                .zip(oracle.iter())
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            println!(
                "solve nemytskii: converged={} residual={:.3e} oracle_deviation={:.3e}",
                result.converged,
                result.final_residual(),
                dev,
            );
            Ok(exit_for(result.converged))
        }
        other => Err(Error::Config(format!(
            "problem.kind: unsupported value {other:?} for solve"
        ))),
    }
}

fn cmd_branch(doc: &ConfigDoc, out: &Path) -> Result<ExitCode> {
    let (_, problem) = example_a_from(doc)?;
    let cfg = descent_cfg(doc, &problem)?;
    let kind = doc.str_or("branch", "kind", "line");
    let path = match kind {
        "line" => {
            let target = doc.complex("branch", "target")?;
            let steps = doc.usize_or("branch", "steps", 16)?;
            PathSpec::line(target, steps, doc.f64_or("branch", "max_gap", target.norm())?)
        }
        "circle" => {
            let radius = doc.f64("branch", "radius")?;
            let samples = doc.usize_or("branch", "samples", 256)?;
            PathSpec::circle(radius, samples, doc.f64_or("branch", "max_gap", radius)?)
        }
        other => {
            return Err(Error::Config(format!(
                "branch.kind: expected line or circle, got {other:?}"
            )))
        }
    };
    let result = track_path(&problem, &path, &cfg)?;
    write_branch(&out.join("branch.csv"), &path.samples, &result)?;
    let endpoint = result.points.last().unwrap();
    println!(
        "branch: samples={} endpoint=({:.8}, {:.8}) residual_max={:.3e} closure_gap={} bound_ok={}",
        path.samples.len(),
        endpoint.re,
        endpoint.im,
        result.residual_max,
        result
            .closure_gap
            .map(|g| format!("{g:.3e}"))
            .unwrap_or_else(|| "n/a".into()),
        result.bound_ok,
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_census(doc: &ConfigDoc, out: &Path) -> Result<ExitCode> {
    let n = doc.u64("census", "n")? as u32;
    let target = doc.complex("census", "target")?;
    let radius = doc.f64("census", "radius")?;
    let roots = census_roots(n, target, radius)?;
    let rows: Vec<Vec<String>> = roots
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), fmt_f(r.re), fmt_f(r.im), fmt_f(r.norm())])
        .collect();
    write_csv(&out.join("census.csv"), &["root", "re", "im", "modulus"], &rows)?;
    println!("census n={} radius={:.6}: roots_in_disc = {}", n, radius, roots.len());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_tame(doc: &ConfigDoc, seed: u64, out: &Path) -> Result<ExitCode> {
    let trials = doc.usize_or("verify", "trials", 10_000)?;
    let k_max = doc.u64_or("problem", "k_max", 128)? as i64;
    let s_max = doc.f64_or("problem", "s_max", 6.0)?;
    let spec = ScaleSpec::new(s_max, k_max)?;
    let family = ProjectorFamily::sharp(&spec);
    let mut rng = StdRng::seed_from_u64(seed);

    let mut worst_loss: f64 = 0.0;
    let mut worst_gain: f64 = 0.0;
    for _ in 0..trials {
        let u = random_scale_vector(&spec, 1.0, 0.0, 1.0, &mut rng);
        let s = rng.gen_range(0.0..s_max);
        let t = rng.gen_range(0.0..s_max);
        let lam = rng.gen_range(1.0..spec.max_weight());
        worst_loss = worst_loss.max(family.verify_loss(&u, s, t, lam)?);
        let (s_hi, t_lo) = if s >= t { (s, t) } else { (t, s) };
        worst_gain = worst_gain.max(family.verify_gain(&u, s_hi, t_lo, lam)?);
    }

    let mut rows = vec![
        vec!["worst_loss_ratio".into(), fmt_f(worst_loss)],
        vec!["worst_gain_ratio".into(), fmt_f(worst_gain)],
    ];

    let mut tame_summary = String::new();
    if doc.str_or("problem", "kind", "") == "synthetic" {
        let ell_prime = doc.f64_or("problem", "ell_prime", 2.0)?;
        let eps = doc.f64_or("problem", "eps", 0.01)?;
        let p = SyntheticLossProblem::new(&spec, ell_prime, eps)?;
        let sweep_trials = trials.min(2000);
        let wd = verify_tame_direct(&p, sweep_trials, &mut rng)?;
        let wi = verify_tame_inverse(&p, sweep_trials, &mut rng)?;
        rows.push(vec!["worst_tame_direct".into(), fmt_f(wd)]);
        rows.push(vec!["worst_tame_inverse".into(), fmt_f(wi)]);
        tame_summary = format!(" tame_direct={wd:.4} tame_inverse={wi:.4}");
    }

    write_csv(&out.join("ratios.csv"), &["quantity", "worst"], &rows)?;
    println!(
        "verify-tame trials={trials} seed={seed}: worst_loss_ratio={worst_loss:.15} worst_gain_ratio={worst_gain:.15}{tame_summary}"
    );
    Ok(ExitCode::SUCCESS)
}

fn synthetic_from(doc: &ConfigDoc) -> Result<SyntheticLossProblem> {
    let k_max = doc.u64_or("problem", "k_max", 2048)? as i64;
    let s_max = doc.f64_or("problem", "s_max", 6.0)?;
    let ell_prime = doc.f64_or("problem", "ell_prime", 2.0)?;
    let eps = doc.f64_or("problem", "eps", 0.01)?;
    let spec = ScaleSpec::new(s_max, k_max)?;
    SyntheticLossProblem::new(&spec, ell_prime, eps)
}

fn nm_cfg_from(
    doc: &ConfigDoc,
    p: &SyntheticLossProblem,
    sigma_key: &str,
    levels_key: &str,
) -> Result<NashMoserConfig> {
    let sigma = doc.f64_or("nashmoser", sigma_key, 2.0)?;
    let levels = doc.usize_or("nashmoser", levels_key, 10)?;
    let radius = doc.f64_or("nashmoser", "radius", 1.0)?;
    let mut cfg = NashMoserConfig::for_problem(p, levels, sigma, radius);
    cfg.lambda0 = doc.f64_or("nashmoser", "lambda0", cfg.lambda0)?;
    cfg.inner_tol = doc.f64_or("nashmoser", "inner_tol", cfg.inner_tol)?;
    cfg.inner_floor = doc.f64_or("nashmoser", "inner_floor", cfg.inner_floor)?;
    Ok(cfg)
}

/// The manufactured target `v = F(u*)`, exact on any truncation that
/// resolves the cube of the reference state.
fn manufactured_target(p: &SyntheticLossProblem) -> Result<(ScaleVector, ScaleVector)> {
    let u_star = p.manufactured_state();
    let v = p.eval(&u_star)?;
    Ok((u_star, v))
}

fn cmd_nashmoser(doc: &ConfigDoc, out: &Path) -> Result<ExitCode> {
    let p = synthetic_from(doc)?;
    let cfg = nm_cfg_from(doc, &p, "sigma", "levels")?;
    let (u_star, v) = manufactured_target(&p)?;
    let scale = doc.f64_or("nashmoser", "target_scale", 1.0)?;
    // Targets default to the manufactured field; a mode-record file
    // (`k re im` lines) overrides it.
    let (target, manufactured) = match doc.get("nashmoser", "target_file") {
        Some(path) => {
            let file = fs::File::open(path)
                .map_err(|e| Error::Config(format!("nashmoser.target_file: {e}")))?;
            (
                read_modes(p.target(), std::io::BufReader::new(file))?,
                false,
            )
        }
        None => (v.scaled(scale), scale == 1.0),
    };
    let outcome = nm_run(&p, &target, &cfg)?;
    write_levels(&out.join("levels.csv"), &outcome.levels)?;
    let solution_file = fs::File::create(out.join("solution.modes"))?;
    write_modes(&outcome.solution, std::io::BufWriter::new(solution_file))?;
    let worst_identity = outcome
        .levels
        .iter()
        .map(|l| l.identity_residual)
        .fold(0.0f64, f64::max);
    let ratio = increment_decay_ratio(&outcome.levels);
    let recovery = if manufactured {
        format!(
            " recovery_error={:.3e}",
            outcome.solution.sub(&u_star).norm(cfg.s1)?
        )
    } else {
        String::new()
    };
    println!(
        "nashmoser levels={}/{} sigma={}: worst_identity={:.3e} g_norm={:.6}{} decay_ratio={} bound_ok={}",
        outcome.levels.len(),
        cfg.levels,
        cfg.sigma,
        worst_identity,
        outcome.solution.norm(cfg.s1)?,
        recovery,
        ratio.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "n/a".into()),
        outcome.bound_ok,
    );
    if let Some(reason) = &outcome.failure {
        eprintln!("error: {reason} (partial level log written)");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_uniqueness(doc: &ConfigDoc, out: &Path) -> Result<ExitCode> {
    let p = synthetic_from(doc)?;
    let cfg_a = nm_cfg_from(doc, &p, "sigma", "levels")?;
    let mut cfg_b = nm_cfg_from(doc, &p, "sigma_b", "levels_b")?;
    cfg_b.inner_tol = doc.f64_or("nashmoser", "inner_tol_b", 1e-11)?;
    let (_, v) = manufactured_target(&p)?;
    let count = doc.usize_or("uniqueness", "targets", 9)?;
    let scale_max = doc.f64_or("uniqueness", "scale_max", 0.45)?;
    let grid: Vec<ScaleVector> = (1..=count)
        .map(|j| v.scaled(scale_max * j as f64 / count as f64))
        .collect();
    let report = uniqueness_suite(&p, &grid, &cfg_a, &cfg_b)?;
    let rows: Vec<Vec<String>> = report
        .deviations
        .iter()
        .enumerate()
        .map(|(i, d)| {
            vec![
                i.to_string(),
                d.map(fmt_f).unwrap_or_else(|| "excluded".into()),
            ]
        })
        .collect();
    write_csv(&out.join("deviations.csv"), &["target", "deviation"], &rows)?;
    println!(
        "uniqueness targets={} sigma {} vs {}: max_deviation={:.3e} failures={}",
        count, cfg_a.sigma, cfg_b.sigma, report.max_deviation, report.failures,
    );
    if report.failures > 0 {
        return Err(Error::LevelFailure {
            n: 0,
            reason: format!("{} grid points excluded", report.failures),
        });
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_for(converged: bool) -> ExitCode {
    if converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}
