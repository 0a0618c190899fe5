//! Deterministic ensemble simulation.
//!
//! Each trajectory owns its own [`Stream`] derived from `(base_seed, traj_id)`
//! and is stepped independently. Only grid samples and scalar accumulators
//! are kept, except for the first `record_paths` trajectories whose full
//! paths are dumped. Records come back sorted by `traj_id`, so the output
//! does not depend on the number of worker threads.

mod grid;
mod rng;
mod transitions;
pub mod csv;

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{BdProcess, BirthDeath, ModelSpec, Process};

pub use grid::geometric_grid;
pub use rng::{seed_stream, splitmix64, trajectory_seed, Stream};
pub use transitions::TransitionBins;

/// Largest number of trajectories whose full path may be dumped.
pub const MAX_RECORDED_PATHS: usize = 16;

fn default_budget() -> u64 {
    100_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub horizon: u64,
    pub base_seed: u64,
    pub grid_points: usize,
    #[serde(default)]
    pub record_doob: bool,
    #[serde(default)]
    pub record_paths: usize,
    #[serde(default)]
    pub record_transitions: bool,
    /// Initial state `X_0` (placed on the first axis for vector walks).
    #[serde(default)]
    pub start: f64,
    /// Upper limit on recorded samples across the ensemble.
    #[serde(default = "default_budget")]
    pub max_samples: u64,
}

impl EnsembleConfig {
    pub fn new(n_traj: usize, horizon: u64, base_seed: u64, grid_points: usize) -> Self {
        Self {
            n_traj,
            horizon,
            base_seed,
            grid_points,
            record_doob: false,
            record_paths: 0,
            record_transitions: false,
            start: 0.0,
            max_samples: default_budget(),
        }
    }

    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        let p = "engine";
        if self.n_traj == 0 {
            return Err(Error::config(format!("{p}.n_traj"), "must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::config(format!("{p}.horizon"), "must be positive"));
        }
        if self.grid_points == 0 {
            return Err(Error::config(format!("{p}.grid_points"), "must be positive"));
        }
        if self.record_paths > MAX_RECORDED_PATHS {
            return Err(Error::config(
                format!("{p}.record_paths"),
                format!("at most {MAX_RECORDED_PATHS} paths may be dumped, got {}", self.record_paths),
            ));
        }
        if !(self.start >= 0.0 && self.start.is_finite()) {
            return Err(Error::config(
                format!("{p}.start"),
                format!("must be finite and nonnegative, got {}", self.start),
            ));
        }
        if model.is_integer_valued() && self.start.fract() != 0.0 {
            return Err(Error::config(
                format!("{p}.start"),
                format!("must be an integer for lattice models, got {}", self.start),
            ));
        }
        if self.record_doob && !model.has_exact_drift() {
            return Err(Error::config(
                format!("{p}.record_doob"),
                format!("model '{}' has no exact drift for the Doob decomposition", model.type_name()),
            ));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<u64> {
        geometric_grid(self.horizon, self.grid_points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: u64,
    pub x: f64,
    /// `max_{s <= t} X_s`, maintained at every step.
    pub running_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoobSample {
    pub t: u64,
    /// `|X_t^(1+beta) - A_t| / t`, where `A_t` sums the exact conditional
    /// drifts of `X^(1+beta)` along the path.
    pub gap: f64,
    /// Exact conditional drift of `X^(1+beta)` from `X_t`.
    pub drift_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSnapshot {
    pub mid_t: u64,
    pub mid: Vec<f64>,
    pub end: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub traj_id: u64,
    pub samples: Vec<Sample>,
    pub doob: Option<Vec<DoobSample>>,
    /// Largest `t` with `X_t = 0`, or -1 if the path never touched zero.
    pub last_hit_zero: i64,
    pub transitions: Option<TransitionBins>,
    pub directions: Option<DirectionSnapshot>,
    /// `X_0, ..., X_T` for the first `record_paths` trajectories.
    pub path: Option<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("record has no samples")
    }
}

/// Execution knobs that must not influence results.
#[derive(Debug, Clone, Default)]
pub struct RunControl {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Set to request cancellation; checked between and inside trajectories.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl RunControl {
    /// Reads the thread count from `LAMPERTI_THREADS`.
    pub fn from_env() -> Self {
        let threads = std::env::var("LAMPERTI_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0);
        Self {
            threads,
            cancel: None,
        }
    }

    fn cancelled(&self) -> bool {
        self.cancel
            .as_ref()
            .map_or(false, |c| c.load(Ordering::Relaxed))
    }
}

pub fn run_ensemble(model: &ModelSpec, cfg: &EnsembleConfig) -> Result<Vec<TrajectoryRecord>> {
    run_ensemble_with(model, cfg, &RunControl::default())
}

pub fn run_ensemble_with(
    model: &ModelSpec,
    cfg: &EnsembleConfig,
    ctrl: &RunControl,
) -> Result<Vec<TrajectoryRecord>> {
    model.validate()?;
    cfg.validate(model)?;
    let grid = cfg.grid();

    let per_traj = grid.len() as u64 * if cfg.record_doob { 2 } else { 1 };
    let requested = (cfg.n_traj as u64)
        .saturating_mul(per_traj)
        .saturating_add((cfg.record_paths.min(cfg.n_traj) as u64).saturating_mul(cfg.horizon + 1));
    if requested > cfg.max_samples {
        return Err(Error::ResourceLimit {
            requested,
            budget: cfg.max_samples,
        });
    }

    let run = || match model {
        ModelSpec::Bd(p) => {
            let max_state = cfg.start as u64 + cfg.horizon;
            let proc_ = BdProcess::new(BirthDeath::Constant(*p), max_state, cfg.record_doob);
            simulate(&proc_, cfg, &grid, ctrl)
        }
        ModelSpec::Osc(p) => {
            let max_state = cfg.start as u64 + cfg.horizon;
            let proc_ = BdProcess::new(BirthDeath::Dyadic(*p), max_state, cfg.record_doob);
            simulate(&proc_, cfg, &grid, ctrl)
        }
        ModelSpec::Halfline(p) => simulate(p, cfg, &grid, ctrl),
        ModelSpec::Hidden(p) => simulate(p, cfg, &grid, ctrl),
        ModelSpec::Rd(p) => simulate(p, cfg, &grid, ctrl),
    };

    match ctrl.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    }
}

fn simulate<P: Process>(
    process: &P,
    cfg: &EnsembleConfig,
    grid: &[u64],
    ctrl: &RunControl,
) -> Result<Vec<TrajectoryRecord>> {
    let done = AtomicUsize::new(0);
    let results: Vec<Option<TrajectoryRecord>> = (0..cfg.n_traj as u64)
        .into_par_iter()
        .map(|id| {
            if ctrl.cancelled() {
                return None;
            }
            let rec = simulate_one(process, cfg, grid, id, ctrl);
            if rec.is_some() {
                done.fetch_add(1, Ordering::Relaxed);
            }
            rec
        })
        .collect();

    if results.iter().any(Option::is_none) {
        return Err(Error::Interrupted {
            completed: done.load(Ordering::Relaxed),
            total: cfg.n_traj,
        });
    }
    Ok(results.into_iter().flatten().collect())
}

/// Steps between cancellation polls inside one trajectory.
const CANCEL_POLL: u64 = 1 << 22;

fn simulate_one<P: Process>(
    process: &P,
    cfg: &EnsembleConfig,
    grid: &[u64],
    traj_id: u64,
    ctrl: &RunControl,
) -> Option<TrajectoryRecord> {
    let mut rng = seed_stream(cfg.base_seed, traj_id);
    let mut state = process.initial_state(cfg.start);
    let exponent = 1.0 + process.beta();

    let mut x = process.observe(&state);
    let mut running_max = x;
    let mut last_zero: i64 = if x == 0.0 { 0 } else { -1 };
    let mut drift_sum = 0.0;

    let mut samples = Vec::with_capacity(grid.len());
    let mut doob = cfg.record_doob.then(|| Vec::with_capacity(grid.len()));
    let mut transitions = cfg.record_transitions.then(TransitionBins::default);
    let mut path = ((traj_id as usize) < cfg.record_paths).then(|| {
        let mut v = Vec::with_capacity(cfg.horizon as usize + 1);
        v.push(x);
        v
    });
    let mid_t = cfg.horizon / 2;
    let mut mid_dir = if mid_t == 0 {
        process.direction(&state)
    } else {
        None
    };

    let mut next_grid = 0;
    for t in 1..=cfg.horizon {
        if t % CANCEL_POLL == 0 && ctrl.cancelled() {
            return None;
        }
        if doob.is_some() {
            drift_sum += process.drift_y(&state).unwrap_or(f64::NAN);
        }
        let prev = x;
        process.step(&mut state, &mut rng);
        x = process.observe(&state);
        if x > running_max {
            running_max = x;
        }
        if x == 0.0 {
            last_zero = t as i64;
        }
        if let Some(bins) = transitions.as_mut() {
            bins.push(prev, x - prev);
        }
        if let Some(p) = path.as_mut() {
            p.push(x);
        }
        if t == mid_t {
            mid_dir = process.direction(&state);
        }
        if t == grid[next_grid] {
            samples.push(Sample { t, x, running_max });
            if let Some(d) = doob.as_mut() {
                d.push(DoobSample {
                    t,
                    gap: (x.powf(exponent) - drift_sum).abs() / t as f64,
                    drift_y: process.drift_y(&state).unwrap_or(f64::NAN),
                });
            }
            next_grid += 1;
        }
    }

    let directions = match (mid_dir, process.direction(&state)) {
        (Some(mid), Some(end)) => Some(DirectionSnapshot { mid_t, mid, end }),
        _ => None,
    };

    Some(TrajectoryRecord {
        traj_id,
        samples,
        doob,
        last_hit_zero: last_zero,
        transitions,
        directions,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{bd_step, BdChainParams, NoiseSpec, RdWalkParams};

    fn reference() -> ModelSpec {
        ModelSpec::Bd(BdChainParams::new(0.5, 0.5, 0.0).unwrap())
    }

    #[test]
    fn identical_inputs_give_identical_records() {
        let cfg = EnsembleConfig::new(2, 10, 77, 5);
        let a = run_ensemble(&reference(), &cfg).unwrap();
        let b = run_ensemble(&reference(), &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].traj_id, 0);
        assert_eq!(a[1].traj_id, 1);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let mut cfg = EnsembleConfig::new(37, 2000, 5, 12);
        cfg.record_doob = true;
        cfg.record_transitions = true;
        let one = run_ensemble_with(&reference(), &cfg, &RunControl { threads: Some(1), cancel: None }).unwrap();
        let four = run_ensemble_with(&reference(), &cfg, &RunControl { threads: Some(4), cancel: None }).unwrap();
        assert_eq!(serde_json::to_vec(&one).unwrap(), serde_json::to_vec(&four).unwrap());
    }

    #[test]
    fn first_step_from_origin_lands_at_one() {
        let mut cfg = EnsembleConfig::new(50, 1, 3, 1);
        cfg.record_doob = true;
        let recs = run_ensemble(&reference(), &cfg).unwrap();
        for r in &recs {
            assert_eq!(r.samples, vec![Sample { t: 1, x: 1.0, running_max: 1.0 }]);
            assert_eq!(r.last_hit_zero, 0);
            // A_1 = 1 and Y_1 = 1.
            assert_eq!(r.doob.as_ref().unwrap()[0].gap, 0.0);
        }
    }

    #[test]
    fn records_match_manual_replay() {
        let p = BdChainParams::new(0.5, 0.5, 0.0).unwrap();
        let mut cfg = EnsembleConfig::new(3, 5000, 9, 20);
        cfg.record_paths = 2;
        let recs = run_ensemble(&ModelSpec::Bd(p), &cfg).unwrap();
        let grid = cfg.grid();
        for r in &recs {
            let mut rng = seed_stream(9, r.traj_id);
            let mut x = 0u64;
            let mut path = vec![0.0];
            for _ in 0..5000 {
                x = bd_step(&p, x, rng.uniform());
                path.push(x as f64);
            }
            let mut max = 0.0f64;
            let mut k = 0;
            for (t, &v) in path.iter().enumerate() {
                max = max.max(v);
                if k < grid.len() && t as u64 == grid[k] {
                    assert_eq!(r.samples[k], Sample { t: t as u64, x: v, running_max: max });
                    k += 1;
                }
            }
            let last_zero = path.iter().rposition(|&v| v == 0.0).map_or(-1, |i| i as i64);
            assert_eq!(r.last_hit_zero, last_zero);
            if r.traj_id < 2 {
                assert_eq!(r.path.as_ref().unwrap(), &path);
            } else {
                assert!(r.path.is_none());
            }
        }
    }

    #[test]
    fn doob_gap_matches_direct_accumulation() {
        let p = BdChainParams::new(0.5, 0.5, 0.0).unwrap();
        let mut cfg = EnsembleConfig::new(1, 3000, 4, 10);
        cfg.record_doob = true;
        let rec = &run_ensemble(&ModelSpec::Bd(p), &cfg).unwrap()[0];
        let mut rng = seed_stream(4, 0);
        let mut x = 0u64;
        let mut a = 0.0;
        let grid = cfg.grid();
        let mut k = 0;
        for t in 1..=3000u64 {
            a += crate::models::exact_drift_y(&p, x);
            x = bd_step(&p, x, rng.uniform());
            if t == grid[k] {
                let gap = ((x as f64).powf(1.5) - a).abs() / t as f64;
                assert_eq!(rec.doob.as_ref().unwrap()[k].gap, gap);
                k += 1;
            }
        }
    }

    #[test]
    fn running_max_tracks_every_step() {
        let model = ModelSpec::Halfline(crate::models::HalfLineWalkParams {
            beta: 0.5,
            rho: 0.0,
            noise: NoiseSpec::UniformPm1,
        });
        let mut cfg = EnsembleConfig::new(4, 4000, 1, 4);
        cfg.record_paths = 4;
        for r in run_ensemble(&model, &cfg).unwrap() {
            let path = r.path.as_ref().unwrap();
            for s in &r.samples {
                let m = path[..=s.t as usize].iter().cloned().fold(f64::MIN, f64::max);
                assert_eq!(s.running_max, m);
            }
            assert!(r.samples.windows(2).all(|w| w[0].running_max <= w[1].running_max));
        }
    }

    #[test]
    fn vector_walk_records_directions() {
        let model = ModelSpec::Rd(RdWalkParams {
            d: 3,
            beta: 0.5,
            rho: 0.5,
            noise_sigma: 1.0,
        });
        let cfg = EnsembleConfig::new(2, 100, 1, 5);
        let recs = run_ensemble(&model, &cfg).unwrap();
        let dirs = recs[0].directions.as_ref().unwrap();
        assert_eq!(dirs.mid_t, 50);
        assert!((crate::models::rd::norm(&dirs.end) - 1.0).abs() < 1e-12);
        assert_eq!(recs[0].final_sample().t, 100);
    }

    #[test]
    fn budget_and_validation_errors() {
        let mut cfg = EnsembleConfig::new(1000, 10, 1, 10);
        cfg.max_samples = 100;
        assert!(matches!(
            run_ensemble(&reference(), &cfg),
            Err(Error::ResourceLimit { .. })
        ));
        let mut cfg = EnsembleConfig::new(1, 10, 1, 10);
        cfg.record_paths = 17;
        assert!(run_ensemble(&reference(), &cfg).is_err());
        let mut cfg = EnsembleConfig::new(1, 10, 1, 10);
        cfg.record_doob = true;
        let rd = ModelSpec::Rd(RdWalkParams { d: 2, beta: 0.5, rho: 0.5, noise_sigma: 1.0 });
        let e = run_ensemble(&rd, &cfg).unwrap_err();
        assert!(e.to_string().starts_with("engine.record_doob"));
    }

    #[test]
    fn cancellation_reports_progress() {
        let flag = Arc::new(AtomicBool::new(true));
        let ctrl = RunControl {
            threads: Some(1),
            cancel: Some(flag),
        };
        let cfg = EnsembleConfig::new(5, 10, 1, 2);
        match run_ensemble_with(&reference(), &cfg, &ctrl) {
            Err(Error::Interrupted { completed, total }) => {
                assert_eq!(completed, 0);
                assert_eq!(total, 5);
            }
            other => panic!("{other:?}"),
        }
    }
}
