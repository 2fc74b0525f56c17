use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use htm_core::bubble::{diagnose, write_profiles_csv};
use htm_core::extremal::{concentration_report, maximize_subcritical, ExtremalRecord, Seed, SolverOptions};
use htm_core::forms::{first_eigenvalue, QuadraticForms};
use htm_core::green::{green_l2_sq, solve_green, GreenMode};
use htm_core::grid::Grading;
use htm_core::testfn::{run_test_function, write_reports_csv, LowerBoundReport};
use htm_core::{assemble_forms, build_grid, RadialFunction, RadialGrid};

use crate::config::{RunConfig, GRID_FIELDS};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<htm_core::Error> for Failure {
    fn from(e: htm_core::Error) -> Self {
        Failure { code: if e.is_usage() { 2 } else { 1 }, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

/// Config hash of a finished command, and the failure of any part of it
/// that did not stop the rest.
pub struct Done {
    pub hash: String,
    pub partial: Option<Failure>,
}

impl Done {
    fn ok(hash: String) -> Self {
        Done { hash, partial: None }
    }
}

pub type Outcome = Result<Done, Failure>;

#[derive(Clone, Debug, Serialize)]
struct Provenance {
    n: usize,
    r_min: f64,
    delta_b: f64,
    grading: Grading,
}

fn provenance(g: &RadialGrid) -> Provenance {
    Provenance { n: g.len(), r_min: g.r_min(), delta_b: g.delta_b(), grading: g.grading() }
}

fn grid(cfg: &RunConfig) -> Result<Arc<RadialGrid>, Failure> {
    let ratio = cfg.grading_ratio().map_err(usage)?;
    Ok(Arc::new(build_grid(cfg.n, cfg.r_min, cfg.delta_b, ratio)?))
}

fn fields(extra: &[&'static str]) -> Vec<&'static str> {
    GRID_FIELDS.iter().chain(extra).copied().collect()
}

const ALPHA_FIELDS: [&str; 2] = ["alpha", "alpha_fraction"];
const SOLVER_FIELDS: [&str; 5] = ["tol", "max_iter", "damping", "certify_trials", "rng_seed"];

/// Forms at the configured `alpha`, which must stay below `λ1`.
fn forms(cfg: &RunConfig, grid: Arc<RadialGrid>) -> Result<QuadraticForms, Failure> {
    let base = assemble_forms(grid, 0.0)?;
    let alpha = match cfg.alpha_fraction {
        Some(f) => f * base.lambda1(),
        None => cfg.alpha,
    };
    Ok(base.with_alpha(alpha)?)
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        damping: cfg.damping,
        certify_trials: cfg.certify_trials,
        rng_seed: cfg.rng_seed,
        ..SolverOptions::default()
    }
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, Failure> {
    let jobs = cfg.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure { code: 1, message: format!("thread pool: {e}") })
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(&cfg.out)?;
    Ok(BufWriter::new(File::create(cfg.out.join(name))?))
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<(), Failure> {
    let mut w = out_file(cfg, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<(), Failure> {
    if cfg.format.json() {
        write_json(cfg, name, value)?;
    }
    println!("{}", serde_json::to_string(value).unwrap_or_default());
    Ok(())
}

fn emit_csv(
    cfg: &RunConfig,
    name: &str,
    write: impl FnOnce(&mut BufWriter<File>) -> htm_core::Result<()>,
) -> Result<(), Failure> {
    if cfg.format.csv() {
        let mut w = out_file(cfg, name)?;
        write(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

pub fn write_metadata(cfg: &RunConfig, command: &str, hash: &str, wall: Duration) -> Result<(), Failure> {
    write_json(
        cfg,
        "metadata.json",
        &json!({
            "command": command,
            "config_hash": hash,
            "wall_time_s": wall.as_secs_f64(),
            "version": env!("CARGO_PKG_VERSION"),
        }),
    )
}

pub fn eigen(cfg: &RunConfig) -> Outcome {
    // alpha is not part of the query, so it stays out of the hash
    let hash = cfg.hash_of(&GRID_FIELDS);
    let g = grid(cfg)?;
    let eig = first_eigenvalue(&assemble_forms(g.clone(), 0.0)?)?;
    emit(
        cfg,
        "eigen.json",
        &json!({
            "config_hash": hash,
            "grid": provenance(&g),
            "lambda1": eig.lambda1,
            "residual": eig.rayleigh_residual,
            "iterations": eig.iterations,
        }),
    )?;
    emit_csv(cfg, "eigenfunction.csv", |w| eig.eigenfunction.write_csv(w))?;
    Ok(Done::ok(hash))
}

#[derive(Serialize)]
struct MaximizerRecord {
    config_hash: String,
    grid: Provenance,
    #[serde(flatten)]
    record: ExtremalRecord,
    seed: Seed,
}

pub fn maximize(cfg: &RunConfig) -> Outcome {
    let hash = cfg.hash_of(&fields(&[&ALPHA_FIELDS[..], &SOLVER_FIELDS, &["gamma"]].concat()));
    let g = grid(cfg)?;
    let f = forms(cfg, g.clone())?;
    let res = maximize_subcritical(cfg.gamma, &f, &solver_options(cfg))?;
    let rec = MaximizerRecord { config_hash: hash.clone(), grid: provenance(&g), record: res.record(), seed: res.seed };
    emit(cfg, "maximize.json", &rec)?;
    emit_csv(cfg, "maximizer.csv", |w| res.u.write_csv(w))?;
    Ok(Done::ok(hash))
}

#[derive(Serialize)]
struct SweepRow {
    gamma: f64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    record: Option<ExtremalRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<Seed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    config_hash: String,
}

const SWEEP_HEADER: [&str; 8] = ["gamma", "alpha", "J", "lambda_eps", "c_eps", "norm", "residual", "iters"];

pub fn sweep(cfg: &RunConfig) -> Outcome {
    if cfg.gammas.is_empty() {
        return Err(usage("field `gammas`: empty list"));
    }
    let hash = cfg.hash_of(&fields(&[&ALPHA_FIELDS[..], &SOLVER_FIELDS, &["gammas", "beta"]].concat()));
    let g = grid(cfg)?;
    let f = forms(cfg, g.clone())?;
    let opts = solver_options(cfg);
    let mut gammas = cfg.gammas.clone();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();

    let results: Vec<_> =
        pool(cfg)?.install(|| gammas.par_iter().map(|&gamma| maximize_subcritical(gamma, &f, &opts)).collect());

    let mut rows = Vec::with_capacity(gammas.len());
    let mut solved = Vec::new();
    let mut failed = 0;
    for (&gamma, res) in gammas.iter().zip(results) {
        match res {
            Ok(r) => {
                rows.push(SweepRow {
                    gamma,
                    status: "ok",
                    record: Some(r.record()),
                    seed: Some(r.seed),
                    error: None,
                    config_hash: hash.clone(),
                });
                solved.push(r);
            }
            Err(e) => {
                failed += 1;
                rows.push(SweepRow {
                    gamma,
                    status: "failed",
                    record: None,
                    seed: None,
                    error: Some(e.to_string()),
                    config_hash: hash.clone(),
                });
            }
        }
    }

    let concentration = if solved.is_empty() {
        None
    } else {
        let one = RadialFunction::from_fn(g.clone(), |_| 1.0, 1.0);
        Some(concentration_report(&solved, &f, &one, cfg.beta)?)
    };
    emit(
        cfg,
        "sweep.json",
        &json!({
            "config_hash": hash,
            "grid": provenance(&g),
            "alpha": f.alpha(),
            "lambda1": f.lambda1(),
            "rows": rows,
            "concentration": concentration,
        }),
    )?;
    emit_csv(cfg, "sweep.csv", |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SWEEP_HEADER)?;
        for row in &rows {
            let fields = match &row.record {
                Some(r) => [r.gamma, r.alpha, r.j, r.lambda_eps, r.c_eps, r.norm, r.residual]
                    .iter()
                    .map(|&x| htm_core::function::fmt17(x))
                    .chain([r.iters.to_string()])
                    .collect::<Vec<_>>(),
                None => std::iter::once(htm_core::function::fmt17(row.gamma))
                    .chain([htm_core::function::fmt17(f.alpha())])
                    .chain(std::iter::repeat_n(String::new(), 6))
                    .collect(),
            };
            out.write_record(&fields)?;
        }
        out.flush()?;
        Ok(())
    })?;
    let partial =
        (failed > 0).then(|| Failure { code: 1, message: format!("{failed} of {} rows failed", gammas.len()) });
    Ok(Done { hash, partial })
}

pub fn green(cfg: &RunConfig) -> Outcome {
    let hash = cfg.hash_of(&fields(&ALPHA_FIELDS));
    let g = grid(cfg)?;
    let f = forms(cfg, g.clone())?;
    let res = solve_green(&f, GreenMode::Hardy)?;
    emit(
        cfg,
        "green.json",
        &json!({
            "config_hash": hash,
            "grid": provenance(&g),
            "record": res.record(),
            "green_l2_sq": green_l2_sq(&res),
            "bound": htm_core::capacity::upper_bound(res.a0),
        }),
    )?;
    emit_csv(cfg, "green.csv", |w| res.write_csv(w))?;
    Ok(Done::ok(hash))
}

pub fn bubble(cfg: &RunConfig) -> Outcome {
    let hash = cfg.hash_of(&fields(&[&ALPHA_FIELDS[..], &SOLVER_FIELDS, &["gamma", "window", "samples"]].concat()));
    let g = grid(cfg)?;
    let f = forms(cfg, g.clone())?;
    let res = maximize_subcritical(cfg.gamma, &f, &solver_options(cfg))?;
    let d = diagnose(&res.u, res.lambda_eps, res.gamma, cfg.window, cfg.samples)?;
    emit(
        cfg,
        "bubble.json",
        &json!({
            "config_hash": hash,
            "grid": provenance(&g),
            "alpha": f.alpha(),
            "window": cfg.window,
            "diagnostics": d,
        }),
    )?;
    emit_csv(cfg, "bubble_profiles.csv", |w| write_profiles_csv(&d.profiles, w))?;
    Ok(Done::ok(hash))
}

pub fn testfn(cfg: &RunConfig) -> Outcome {
    if cfg.eps.is_empty() {
        return Err(usage("field `eps`: empty list"));
    }
    let hash = cfg.hash_of(&fields(&[&ALPHA_FIELDS[..], &["eps", "constants"]].concat()));
    let g = grid(cfg)?;
    let alpha = forms(cfg, g.clone())?.alpha();
    let mode = cfg.constants.into();
    let results: Vec<_> = pool(cfg)?
        .install(|| cfg.eps.par_iter().map(|&eps| run_test_function(&g, eps, alpha, mode).map(|(_, r)| r)).collect());
    let reports: Vec<LowerBoundReport> = results.into_iter().collect::<htm_core::Result<_>>()?;
    let pass = reports.iter().all(|r| r.pass);
    emit(
        cfg,
        "testfn.json",
        &json!({
            "config_hash": hash,
            "grid": provenance(&g),
            "reports": reports,
            "pass": pass,
        }),
    )?;
    emit_csv(cfg, "testfn.csv", |w| write_reports_csv(&reports, w))?;
    let partial = (!pass).then(|| Failure { code: 1, message: "lower bound not reached for every eps".into() });
    Ok(Done { hash, partial })
}
