//! Per-seed summaries and median/IQR aggregation.
//!
//! Quantiles use the lower nearest-rank convention: the `p`-quantile of `m`
//! sorted values is element `floor(p * (m - 1))`, so the median of an even
//! count is the lower middle value. Runs that never reached the quantity
//! (no feasible solution) sort after every finite value.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::engine::{Algorithm, RunResult};
use crate::wsn::Scenario;

/// Content hash of a scenario's geometry and radio parameters.
pub fn scenario_digest(scenario: &Scenario<f64>) -> String {
    let bytes = serde_json::to_vec(scenario).expect("scenarios always serialize");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub first_feasible_generation: Option<usize>,
    pub best_found_generation: Option<usize>,
    pub final_total_power: Option<f64>,
    pub final_violations: Option<usize>,
    pub best_fitness: Option<f64>,
}

impl RunSummary {
    pub fn of(result: &RunResult<f64>) -> Self {
        Self {
            seed: result.seed,
            first_feasible_generation: result.first_feasible_generation,
            best_found_generation: result.best_found_generation(),
            final_total_power: result.final_total_power(),
            final_violations: result.final_violations(),
            best_fitness: result.best.as_ref().map(|b| b.best_fitness),
        }
    }
}

/// Summaries of one algorithm's battery on one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRuns {
    pub algorithm: Algorithm,
    pub scenario_digest: String,
    pub runs: Vec<RunSummary>,
}

impl AlgorithmRuns {
    pub fn from_results(
        scenario: &Scenario<f64>,
        algorithm: Algorithm,
        results: &[RunResult<f64>],
    ) -> Self {
        let mut runs: Vec<RunSummary> = results.iter().map(RunSummary::of).collect();
        runs.sort_by_key(|r| r.seed);
        Self {
            algorithm,
            scenario_digest: scenario_digest(scenario),
            runs,
        }
    }
}

/// Median and quartiles; `None` means the quantile falls on a run that never
/// produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
    pub missing: usize,
}

fn censored_cmp(a: &Option<f64>, b: &Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

impl ColumnStats {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut v: Vec<Option<f64>> = values.into_iter().collect();
        v.sort_by(censored_cmp);
        let q = |p: f64| -> Option<f64> {
            if v.is_empty() {
                return None;
            }
            let idx = (p * (v.len() - 1) as f64).floor() as usize;
            v[idx]
        };
        Self {
            median: q(0.5),
            q1: q(0.25),
            q3: q(0.75),
            missing: v.iter().filter(|x| x.is_none()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmAggregate {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub feasible_runs: usize,
    pub first_feasible_generation: ColumnStats,
    pub best_found_generation: ColumnStats,
    pub final_total_power: ColumnStats,
    pub final_violations: ColumnStats,
}

pub fn aggregate(runs: &AlgorithmRuns) -> AlgorithmAggregate {
    let col = |f: &dyn Fn(&RunSummary) -> Option<f64>| ColumnStats::of(runs.runs.iter().map(f));
    AlgorithmAggregate {
        algorithm: runs.algorithm,
        runs: runs.runs.len(),
        feasible_runs: runs
            .runs
            .iter()
            .filter(|r| r.first_feasible_generation.is_some())
            .count(),
        first_feasible_generation: col(&|r| r.first_feasible_generation.map(|g| g as f64)),
        best_found_generation: col(&|r| r.best_found_generation.map(|g| g as f64)),
        final_total_power: col(&|r| r.final_total_power),
        final_violations: col(&|r| r.final_violations.map(|v| v as f64)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Qiga2,
    Qga,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnComparison {
    pub qga_median: Option<f64>,
    pub qiga2_median: Option<f64>,
    pub winner: Winner,
}

impl ColumnComparison {
    /// Smaller is better for every column.
    fn of(qga: &ColumnStats, qiga2: &ColumnStats) -> Self {
        let winner = match censored_cmp(&qiga2.median, &qga.median) {
            Ordering::Less => Winner::Qiga2,
            Ordering::Greater => Winner::Qga,
            Ordering::Equal => Winner::Tie,
        };
        Self {
            qga_median: qga.median,
            qiga2_median: qiga2.median,
            winner,
        }
    }
}

/// Side-by-side aggregates for the four compared columns: earliest feasible
/// generation, generation of the retained solution, total power, and
/// threshold violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub scenario_digest: String,
    pub qga: AlgorithmAggregate,
    pub qiga2: AlgorithmAggregate,
    pub first_feasible_generation: ColumnComparison,
    pub best_found_generation: ColumnComparison,
    pub final_total_power: ColumnComparison,
    pub final_violations: ColumnComparison,
}

pub fn compare(
    qga: &AlgorithmRuns,
    qiga2: &AlgorithmRuns,
) -> Result<ComparisonSummary, HarnessError> {
    if qga.runs.is_empty() || qiga2.runs.is_empty() {
        return Err(HarnessError::Experiment(
            "comparison needs runs on both sides".into(),
        ));
    }
    if qga.scenario_digest != qiga2.scenario_digest {
        return Err(HarnessError::Experiment(
            "result lists come from different scenarios".into(),
        ));
    }
    let a = aggregate(qga);
    let b = aggregate(qiga2);
    Ok(ComparisonSummary {
        scenario_digest: qga.scenario_digest.clone(),
        first_feasible_generation: ColumnComparison::of(
            &a.first_feasible_generation,
            &b.first_feasible_generation,
        ),
        best_found_generation: ColumnComparison::of(
            &a.best_found_generation,
            &b.best_found_generation,
        ),
        final_total_power: ColumnComparison::of(&a.final_total_power, &b.final_total_power),
        final_violations: ColumnComparison::of(&a.final_violations, &b.final_violations),
        qga: a,
        qiga2: b,
    })
}
