use std::time::Instant;

use lamperti::engine::{run_ensemble_with, EnsembleConfig, RunControl};
use lamperti::models::{BdChainParams, ModelSpec};

/// Soft target for single-core birth-death stepping.
const TARGET: f64 = 5e7;
/// Below this the stepper has regressed badly enough to fail outright.
const FLOOR: f64 = 1e7;

#[test]
fn bd_stepping_rate() {
    let model = ModelSpec::Bd(BdChainParams::new(0.5, 0.5, 0.0).unwrap());
    let cfg = EnsembleConfig::new(4, 50_000_000, 1, 20);
    let ctrl = RunControl {
        threads: Some(1),
        cancel: None,
    };
    let start = Instant::now();
    let recs = run_ensemble_with(&model, &cfg, &ctrl).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert_eq!(recs.len(), 4);
    let rate = 4.0 * 50e6 / secs;
    println!("bd stepping: {rate:.3e} steps/s on one thread");
    if rate < TARGET {
        eprintln!("warning: below the {TARGET:.0e} steps/s target");
    }
    assert!(rate >= FLOOR, "{rate:.3e} steps/s");
}
