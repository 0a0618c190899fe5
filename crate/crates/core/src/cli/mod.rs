//! The `lamperti` command line.
//!
//! Exit codes: 0 success (all checks passed), 1 a check failed or a fit was
//! degenerate, 2 usage or configuration error, 3 I/O error or interruption.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, OnceLock};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::engine::csv::{read_transitions, write_paths, write_records};
use crate::engine::{run_ensemble_with, trajectory_seed, RunControl, TransitionBins};
use crate::error::{Error, Result};
use crate::estimators::drift_fit::DEFAULT_MIN_TRANSITIONS;
use crate::estimators::{drift_fit, merged_transitions, write_bins_csv, FitOptions};
use crate::models::ModelSpec;
use crate::report::{self, RD_FIT_X_MIN};
use crate::theory::{applicability_for, clt_std, lambda_const};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Seeds listed in the manifest.
const MANIFEST_SEEDS: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "lamperti", version, about = "Monte Carlo checks of limit laws for processes with asymptotically zero drift")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the predicted limit constants for given parameters.
    Theory(TheoryArgs),
    /// Simulate an ensemble and write its records.
    Simulate {
        config: PathBuf,
    },
    /// Simulate an ensemble, run the configured checks and write a report.
    Verify {
        config: PathBuf,
    },
    /// Estimate (rho, beta, sigma^2) from a config's simulated transitions or
    /// from an `x,dx` CSV file.
    DriftFit(DriftFitArgs),
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Holding probability of the birth-death chain.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Increment moment order; infinite when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Limiting increment standard deviation; `sqrt(1 - b)` when omitted.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DriftFitArgs {
    /// A run config (`.json`) or a transitions file with header `x,dx`.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for `drift_fit.json` and `drift_bins.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub min_transitions: Option<u64>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Interrupted { .. } => EXIT_IO,
        Error::FitDegenerate(_) => EXIT_CHECK_FAILED,
        _ => EXIT_USAGE,
    }
}

fn cancel_flag() -> Arc<AtomicBool> {
    static FLAG: OnceLock<Arc<AtomicBool>> = OnceLock::new();
    FLAG.get_or_init(|| {
        let flag = Arc::new(AtomicBool::new(false));
        let f = flag.clone();
        // Fails if a handler is already installed; runs then cannot be
        // interrupted cleanly, which is harmless.
        let _ = ctrlc::set_handler(move || f.store(true, std::sync::atomic::Ordering::SeqCst));
        flag
    })
    .clone()
}

fn control() -> RunControl {
    RunControl {
        cancel: Some(cancel_flag()),
        ..RunControl::from_env()
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// human output to `out`. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(std::env::args_os(), &mut lock)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Theory(a) => theory(&a, out).map(|_| EXIT_OK),
        Command::Simulate { config } => simulate(&config, out).map(|_| EXIT_OK),
        Command::Verify { config } => verify(&config, out),
        Command::DriftFit(a) => fit(&a, out).map(|_| EXIT_OK),
    }
}

fn flag_err(flag: &str, value: f64, reason: &str) -> Error {
    Error::Config {
        path: format!("--{flag}"),
        message: format!("{reason}, got {value}"),
    }
}

#[derive(Debug, Serialize)]
struct TheoryOutput {
    rho: f64,
    beta: f64,
    b: f64,
    gamma: Option<f64>,
    sigma: f64,
    lambda: f64,
    escape_exponent: f64,
    clt_std: Option<f64>,
    transience_ok: bool,
    sharp_bounds_ok: bool,
    clt_ok: bool,
}

fn theory(a: &TheoryArgs, out: &mut dyn Write) -> Result<()> {
    if !(0.0..1.0).contains(&a.beta) {
        return Err(flag_err("beta", a.beta, "must lie in [0, 1)"));
    }
    if !(a.rho > 0.0 && a.rho.is_finite()) {
        return Err(flag_err("rho", a.rho, "must be positive and finite"));
    }
    if !(0.0..1.0).contains(&a.b) {
        return Err(flag_err("b", a.b, "must lie in [0, 1)"));
    }
    if let Some(g) = a.gamma {
        if !(g > 0.0) {
            return Err(flag_err("gamma", g, "must be positive"));
        }
    }
    let sigma = a.sigma.unwrap_or_else(|| (1.0 - a.b).sqrt());
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(flag_err("sigma", sigma, "must be positive and finite"));
    }
    let gamma = a.gamma.unwrap_or(f64::INFINITY);
    let app = applicability_for(gamma, a.beta);
    let o = TheoryOutput {
        rho: a.rho,
        beta: a.beta,
        b: a.b,
        gamma: a.gamma.filter(|g| g.is_finite()),
        sigma,
        lambda: lambda_const(a.rho, a.beta)?,
        escape_exponent: 1.0 / (1.0 + a.beta),
        clt_std: if a.beta > 0.0 { Some(clt_std(sigma, a.beta)?) } else { None },
        transience_ok: app.transience_ok,
        sharp_bounds_ok: app.sharp_bounds_ok,
        clt_ok: app.clt_ok,
    };
    if a.json {
        serde_json::to_writer_pretty(&mut *out, &o).map_err(|e| Error::Io(e.into()))?;
        writeln!(out)?;
    } else {
        writeln!(out, "lambda           {}", o.lambda)?;
        writeln!(out, "escape exponent  {}", o.escape_exponent)?;
        match o.clt_std {
            Some(s) => writeln!(out, "clt std          {s}")?,
            None => writeln!(out, "clt std          n/a (beta = 0)")?,
        }
        writeln!(out, "transience_ok    {}", o.transience_ok)?;
        writeln!(out, "sharp_bounds_ok  {}", o.sharp_bounds_ok)?;
        writeln!(out, "clt_ok           {}", o.clt_ok)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn simulate(path: &Path, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::from_path(path)?;
    let engine = cfg.effective_engine();
    let records = run_ensemble_with(&cfg.model, &engine, &control())?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;

    let mut files = vec!["manifest.json", "records.csv"];
    let mut w = BufWriter::new(File::create(dir.join("records.csv"))?);
    write_records(&mut w, &records)?;
    w.flush()?;
    if engine.record_paths > 0 {
        let mut w = BufWriter::new(File::create(dir.join("paths.csv"))?);
        write_paths(&mut w, &records)?;
        w.flush()?;
        files.push("paths.csv");
    }

    let seeds: Vec<_> = (0..engine.n_traj.min(MANIFEST_SEEDS) as u64)
        .map(|id| json!({"traj_id": id, "seed": trajectory_seed(engine.base_seed, id)}))
        .collect();
    let manifest = json!({
        "version": crate::VERSION,
        "config_hash": cfg.hash(),
        "config": cfg,
        "seed_rule": "seed = splitmix64(base_seed ^ traj_id), generator xoshiro256++",
        "seeds": seeds,
        "files": files,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    writeln!(
        out,
        "simulated {} trajectories to T = {}; wrote {}",
        records.len(),
        engine.horizon,
        dir.display()
    )?;
    Ok(())
}

fn verify(path: &Path, out: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::from_path(path)?;
    let rep = report::verify(&cfg, &control())?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    if cfg.output.wants(Format::Json) {
        write_json(&dir.join("report.json"), &rep)?;
    }
    if cfg.output.wants(Format::Csv) {
        let mut w = BufWriter::new(File::create(dir.join("checks.csv"))?);
        w.write_all(b"name,pass,predicted,estimated,stderr,tolerance,pvalue,error\n")?;
        let opt = |v: Option<f64>| v.map(crate::engine::csv::fmt_real).unwrap_or_default();
        for c in &rep.checks {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                c.name,
                c.pass as u8,
                opt(c.predicted),
                opt(c.estimated.map(|e| e.point)),
                opt(c.estimated.map(|e| e.stderr)),
                opt(c.tolerance),
                opt(c.pvalue),
                c.error.as_deref().unwrap_or("").replace(',', ";")
            )?;
        }
        w.flush()?;
    }
    out.write_all(rep.summary().as_bytes())?;
    Ok(if rep.all_pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn is_config(path: &Path) -> Result<bool> {
    if path.extension().map_or(false, |e| e.eq_ignore_ascii_case("json")) {
        return Ok(true);
    }
    let text = fs::read_to_string(path)?;
    Ok(text.trim_start().starts_with('{'))
}

fn fit(a: &DriftFitArgs, out: &mut dyn Write) -> Result<()> {
    let mut x_min_default = 1.0;
    let bins = if is_config(&a.input)? {
        let mut cfg = RunConfig::from_path(&a.input)?;
        cfg.engine.record_transitions = true;
        if matches!(cfg.model, ModelSpec::Rd(_)) {
            x_min_default = RD_FIT_X_MIN;
        }
        let records = run_ensemble_with(&cfg.model, &cfg.engine, &control())?;
        merged_transitions(&records)?
    } else {
        let mut bins = TransitionBins::default();
        read_transitions(BufReader::new(File::open(&a.input)?), &mut bins)?;
        bins
    };
    if bins.total() == 0 {
        return Err(Error::InsufficientData {
            what: "drift fit transitions",
            needed: 1,
            got: 0,
        });
    }
    let opts = FitOptions {
        x_min: a.x_min.unwrap_or(x_min_default),
        x_max: a.x_max.unwrap_or(f64::INFINITY),
        min_transitions: a.min_transitions.unwrap_or(DEFAULT_MIN_TRANSITIONS),
    };
    let fit = drift_fit(&bins, &opts)?;
    let summary = json!({
        "rho_hat": fit.rho_hat,
        "rho_stderr": fit.rho_stderr,
        "beta_hat": fit.beta_hat,
        "beta_stderr": fit.beta_stderr,
        "sigma2_hat": fit.sigma2_hat,
        "sigma2_stderr": fit.sigma2_stderr,
        "transitions": fit.transitions,
        "bins_used": fit.bins_used,
    });
    serde_json::to_writer_pretty(&mut *out, &summary).map_err(|e| Error::Io(e.into()))?;
    writeln!(out)?;
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("drift_fit.json"), &fit)?;
        let mut w = BufWriter::new(File::create(dir.join("drift_bins.csv"))?);
        write_bins_csv(&mut w, &fit)?;
        w.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = run_with(std::iter::once("lamperti").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn theory_json() {
        let (code, out) = run(&["theory", "--rho", "0.5", "--beta", "0.5", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["lambda"].as_f64().unwrap(), lambda_const(0.5, 0.5).unwrap());
        assert!(v["clt_ok"].as_bool().unwrap());
    }

    #[test]
    fn theory_rejects_bad_beta() {
        let (code, _) = run(&["theory", "--rho", "0.5", "--beta", "1.2"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _) = run(&["theory", "--rho", "0.5"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn theory_beta_zero_has_no_clt() {
        let (code, out) = run(&["theory", "--rho", "1", "--beta", "0", "--gamma", "3", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["clt_std"].is_null());
        assert_eq!(v["lambda"].as_f64().unwrap(), 1.0);
        assert!(!v["clt_ok"].as_bool().unwrap());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::FitDegenerate("x".into())), 1);
        assert_eq!(exit_code(&Error::config("model.beta", "bad")), 2);
        assert_eq!(exit_code(&Error::Interrupted { completed: 0, total: 1 }), 3);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
    }
}
