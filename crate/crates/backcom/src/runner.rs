//! Multi-threaded trial runner.
//!
//! Blocks are the same as in [`backcom_core::simulator::run_trials`] and
//! their tallies are merged in block order, so the report does not depend
//! on the worker count.

use backcom_core::simulator::{
    block_count, block_range, run_block, trial_key, MetricsReport, SimOptions, Simulator, Tally, Timing,
};
use backcom_core::topology::SystemConfig;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn run_parallel(
    cfg: &SystemConfig,
    n_trials: u64,
    seed: u64,
    timing: Timing,
    opts: SimOptions,
    workers: usize,
) -> Result<MetricsReport> {
    if n_trials == 0 {
        return Err(Error::Usage("--trials must be at least 1".into()));
    }
    if workers == 0 {
        return Err(Error::Usage("--workers must be at least 1".into()));
    }
    let sim = Simulator::new(cfg, timing, opts)?;
    let key = trial_key(seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let tallies: Vec<Tally> = pool.install(|| {
        (0..block_count(n_trials))
            .into_par_iter()
            .map_init(|| sim.clone(), |s, b| run_block(s, &key, block_range(n_trials, b)))
            .collect()
    });
    let mut total = Tally::default();
    for t in &tallies {
        total.merge(t);
    }
    Ok(total.report(seed, cfg.digest()))
}
