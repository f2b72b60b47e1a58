//! Subcommand bodies. Each returns a normal `Result`; `main` maps results
//! and the converged flag onto process exit codes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use pmor::error::{Error, Result};
use pmor::estimator::ReductionState;
use pmor::greedy::{greedy_fixed, ipsue, validate, GreedyTrace};
use pmor::io::csv::{write_trace_csv, write_validation_csv};
use pmor::io::manifest::save_system;
use pmor::io::state::{load_state, save_state};
use pmor::rbf::{KernelSpec, RbfOptions, SurrogateBank};
use pmor::system::{AffineParametricSystem, ParameterPoint};
use serde::Serialize;

use crate::config::{resolve, Algorithm, RunConfig, SystemSource};

pub const SUMMARY_SCHEMA: &str = "pmor-summary/1";

/// Machine-readable record of one `reduce` invocation: the fully resolved
/// config plus outcome figures, enough to re-create the run.
#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    schema: &'a str,
    config: &'a RunConfig,
    converged: bool,
    stagnated: bool,
    iterations: usize,
    final_epsilon: f64,
    reduced_order: usize,
    estimator_evals: usize,
    surrogate_evals: usize,
    wall_ms: f64,
    trace_csv: &'a Path,
    state_json: &'a Path,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display(), e))
}

/// The directory artifacts land in: `--out` wins, then the config's
/// `output_dir` resolved against the config file's directory.
pub fn output_dir(cfg: &RunConfig, base: &Path, flag: Option<&Path>) -> Result<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.as_ref().map(|d| resolve(base, d)))
        .ok_or_else(|| {
            Error::InvalidArgument(
                "no output directory: set 'output_dir' in the config or pass --out".into(),
            )
        })
}

pub fn cmd_reduce(
    cfg: &RunConfig,
    base: &Path,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<bool> {
    let t0 = Instant::now();
    let sys = cfg.build_system(base)?;
    let greedy_cfg = cfg.greedy_config(seed_override);

    let (state, trace, bank) = match cfg.algorithm {
        Algorithm::Fixed => {
            let training = cfg.training.as_ref().expect("validated").build()?;
            let (state, trace) = greedy_fixed(&sys, &training, &greedy_cfg)?;
            (state, trace, None)
        }
        Algorithm::Ipsue => {
            let coarse = cfg.coarse.as_ref().expect("validated").build()?;
            let fine = cfg.fine.as_ref().expect("validated").build()?;
            let (state, trace) = ipsue(&sys, &coarse, &fine, &greedy_cfg)?;
            // Final surrogate of the estimate over the configured coarse
            // set, stored with the state so `estimate` can report g values.
            let bank = fit_bank(&state, &sys, &coarse, greedy_cfg.kernel, cfg)?;
            (state, trace, Some(bank))
        }
    };

    ensure_dir(out)?;
    let trace_path = out.join("trace.csv");
    let state_path = out.join("state.json");
    write_trace_csv(&trace_path, &trace)?;
    save_state(&state_path, &state, bank.as_ref())?;

    // Echo the seed that actually drove the run.
    let mut resolved = cfg.clone();
    resolved.seed = Some(greedy_cfg.seed);
    resolved.output_dir = Some(out.to_path_buf());
    let summary = RunSummary {
        schema: SUMMARY_SCHEMA,
        config: &resolved,
        converged: trace.converged,
        stagnated: trace.stagnated,
        iterations: trace.records.len(),
        final_epsilon: trace.final_epsilon,
        reduced_order: state.basis().n_cols(),
        estimator_evals: last_counts(&trace).0,
        surrogate_evals: last_counts(&trace).1,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        trace_csv: &trace_path,
        state_json: &state_path,
    };
    let summary_path = out.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::InvalidArgument(format!("summary serialization: {e}")))?;
    std::fs::write(&summary_path, text).map_err(|e| Error::io(summary_path.display(), e))?;

    log::info!(
        "reduce: converged={} r={} iterations={} final_epsilon={:.3e}",
        trace.converged,
        state.basis().n_cols(),
        trace.records.len(),
        trace.final_epsilon
    );
    println!(
        "converged={} r={} iterations={} final_epsilon={:.3e} out={}",
        trace.converged,
        state.basis().n_cols(),
        trace.records.len(),
        trace.final_epsilon,
        out.display()
    );
    Ok(trace.converged)
}

fn last_counts(trace: &GreedyTrace) -> (usize, usize) {
    trace
        .records
        .last()
        .map(|r| (r.est_evals, r.surrogate_evals))
        .unwrap_or((0, 0))
}

fn fit_bank(
    state: &ReductionState,
    sys: &AffineParametricSystem,
    centers: &[ParameterPoint],
    kernel: KernelSpec,
    cfg: &RunConfig,
) -> Result<SurrogateBank> {
    let values = centers
        .iter()
        .map(|pt| state.estimate(sys, pt).map(|e| e.delta_entries()))
        .collect::<Result<Vec<_>>>()?;
    let opts = RbfOptions {
        tail_constant: cfg.tail_constant.unwrap_or(false),
        log_values: cfg.log_surrogate.unwrap_or(false),
    };
    SurrogateBank::fit(centers, &values, kernel, opts)
}

pub fn cmd_validate(cfg: &RunConfig, base: &Path, state_path: &Path, out: &Path) -> Result<()> {
    let sys = cfg.build_system(base)?;
    let (state, _) = load_state(state_path, &sys)?;
    let test_spec = cfg.test.as_ref().ok_or_else(|| {
        Error::InvalidArgument("validate needs a 'test' set in the config".into())
    })?;
    let points = test_spec.build()?;
    let table = validate(&state, &sys, &points)?;
    ensure_dir(out)?;
    let path = out.join("validation.csv");
    write_validation_csv(&path, &table, sys.params())?;
    println!(
        "points={} max_error={:.3e} median_error={:.3e} max_estimate={:.3e} out={}",
        table.rows.len(),
        table.max_error(),
        table.median_error(),
        table.max_delta(),
        path.display()
    );
    Ok(())
}

pub fn cmd_generate(cfg: &RunConfig, out: &Path, name: &str) -> Result<()> {
    let gen = match &cfg.system {
        SystemSource::Generator(g) => g,
        SystemSource::Manifest { .. } => {
            return Err(Error::InvalidArgument(
                "generate needs a config with a generator system source".into(),
            ))
        }
    };
    let sys = gen.build()?;
    ensure_dir(out)?;
    let manifest = save_system(&sys, out, name)?;
    println!(
        "n={} inputs={} outputs={} params={} manifest={}",
        sys.n(),
        sys.m(),
        sys.p(),
        sys.params().len(),
        manifest.display()
    );
    Ok(())
}

/// Estimates at externally supplied points: the two summands behind each
/// Δ, and the stored surrogate's prediction g when the state carries one.
pub fn cmd_estimate(
    cfg: &RunConfig,
    base: &Path,
    state_path: &Path,
    points_path: &Path,
    out: &Path,
) -> Result<()> {
    let sys = cfg.build_system(base)?;
    let (state, bank) = load_state(state_path, &sys)?;
    let points = read_points(points_path, sys.params().len())?;

    let mut text = String::from("im_s");
    for p in sys.params() {
        text.push(',');
        text.push_str(&p.name);
    }
    text.push_str(",delta,term1,term2,g\n");
    for pt in &points {
        let est = state.estimate(&sys, pt)?;
        let term1 = est.term1.iter().fold(0.0f64, |acc, v| acc.max(*v));
        let term2 = est.term2.iter().fold(0.0f64, |acc, v| acc.max(*v));
        text.push_str(&format!("{}", pt.s.im));
        for mu in &pt.mu {
            text.push_str(&format!(",{mu}"));
        }
        text.push_str(&format!(",{},{},{}", est.delta, term1, term2));
        match &bank {
            Some(b) => text.push_str(&format!(",{}\n", b.eval_max(pt))),
            None => text.push_str(",\n"),
        }
    }
    ensure_dir(out)?;
    let path = out.join("estimates.csv");
    std::fs::write(&path, &text).map_err(|e| Error::io(path.display(), e))?;
    println!("points={} surrogate={} out={}", points.len(), bank.is_some(), path.display());
    Ok(())
}

/// Point list as CSV: header `im_s[,name...]`, one row per point, values
/// parsed as f64. The parameter count must match the system.
fn read_points(path: &Path, n_params: usize) -> Result<Vec<ParameterPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display(), e))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument(format!("{}: empty points file", path.display())))?;
    let cols = header.split(',').count();
    if cols != n_params + 1 {
        return Err(Error::InvalidArgument(format!(
            "{}: expected {} columns (im_s plus one per parameter), found {cols}",
            path.display(),
            n_params + 1
        )));
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    path: path.display().to_string(),
                    line: idx + 1,
                    column: 0,
                    message: format!("not a number: '{f}'"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != n_params + 1 {
            return Err(Error::InvalidArgument(format!(
                "{}: row {} has {} fields, expected {}",
                path.display(),
                idx + 1,
                fields.len(),
                n_params + 1
            )));
        }
        out.push(ParameterPoint::new(
            Complex64::new(0.0, fields[0]),
            fields[1..].to_vec(),
        ));
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{}: no points after the header",
            path.display()
        )));
    }
    Ok(out)
}
