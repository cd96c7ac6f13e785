use rayon::prelude::*;

use super::HarnessError;
use crate::engine::{self, EngineConfig, RunResult};
use crate::wsn::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Parses `--seeds`: a count `N` (seeds `1..=N`), an inclusive range `a..b`,
/// or a comma-separated list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    let spec = spec.trim();
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| format!("`{s}` is not a seed"))
    };
    let seeds: Vec<u64> = if let Some((lo, hi)) = spec.split_once("..") {
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return Err(format!("empty seed range {spec}"));
        }
        (lo..=hi).collect()
    } else if spec.contains(',') {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse)
            .collect::<Result<_, _>>()?
    } else {
        let n = parse(spec)?;
        (1..=n).collect()
    };
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}

/// One run per seed, returned in ascending seed order whatever the execution
/// mode. The first failing seed (in that order) aborts the batch.
pub fn run_experiment(
    scenario: &Scenario<f64>,
    config: &EngineConfig<f64>,
    seeds: &[u64],
    execution: Execution,
) -> Result<Vec<RunResult<f64>>, HarnessError> {
    if seeds.is_empty() {
        return Err(HarnessError::Experiment("seed list is empty".into()));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(HarnessError::Experiment(format!(
            "seed {} listed twice",
            w[0]
        )));
    }
    let one = |seed: u64| {
        let cfg = EngineConfig {
            seed,
            ..config.clone()
        };
        engine::run(scenario, &cfg).map_err(|source| HarnessError::Run {
            algorithm: cfg.algorithm,
            seed,
            source,
        })
    };
    let outcomes: Vec<Result<RunResult<f64>, HarnessError>> = match execution {
        Execution::Parallel => sorted.par_iter().map(|&s| one(s)).collect(),
        Execution::Sequential => sorted.iter().map(|&s| one(s)).collect(),
    };
    outcomes.into_iter().collect()
}
