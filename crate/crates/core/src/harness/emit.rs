//! Artifact writers. Every `render_*` function is pure; the `emit_*`
//! wrappers only add the file write.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::compare::{aggregate, compare, AlgorithmAggregate, AlgorithmRuns, ComparisonSummary};
use super::scenario_file::ScenarioFile;
use super::HarnessError;
use crate::engine::{Algorithm, RunResult};
use crate::wsn::{ActivationVector, Scenario, Topology};

pub const CSV_HEADER: &str =
    "seed,generation,best_fitness,total_power,violations,connectivity_ratio,feasible";
pub const REPORT_SCHEMA: &str = "lqr-topology/report/1";

const VIEWPORT: f64 = 640.0;
const MARGIN: f64 = 20.0;

fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// One row per (seed, generation), seeds ascending.
pub fn render_csv(results: &[RunResult<f64>]) -> String {
    let mut ordered: Vec<&RunResult<f64>> = results.iter().collect();
    ordered.sort_by_key(|r| r.seed);
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in ordered {
        for h in &r.history {
            // f64 Display is the shortest string that parses back exactly
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.seed,
                h.generation,
                h.best_fitness,
                h.total_power,
                h.violations,
                h.connectivity_ratio,
                u8::from(h.feasible)
            );
        }
    }
    out
}

pub fn emit_csv(results: &[RunResult<f64>], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write_file(path.as_ref(), &render_csv(results))
}

/// Draws the result's snapshot: the retained feasible solution if any,
/// otherwise the best-store bits on the final positions. A result without
/// either draws every node hollow at its initial position.
pub fn render_svg(scenario: &Scenario<f64>, result: &RunResult<f64>) -> String {
    let mut geometry = scenario.clone();
    let act = match result.snapshot() {
        Some((bits, positions)) => {
            geometry.positions_mut().copy_from_slice(positions);
            bits.clone()
        }
        None => ActivationVector::all(scenario.len(), false),
    };
    let topo = Topology::evaluate(&geometry, &act).expect("snapshot matches the scenario size");

    let area = geometry.area();
    let scale = (VIEWPORT - 2.0 * MARGIN) / area.width.max(area.height);
    let sx = |x: f64| MARGIN + x * scale;
    let sy = |y: f64| VIEWPORT - MARGIN - y * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{v}" height="{v}" viewBox="0 0 {v} {v}">"#,
        v = VIEWPORT
    );
    let _ = writeln!(
        out,
        r#"<!-- {} seed {} generation {} -->"#,
        result.algorithm,
        result.seed,
        result
            .best_found_generation()
            .map_or_else(|| "none".to_owned(), |g| g.to_string())
    );
    let _ = writeln!(
        out,
        r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#,
        sx(0.0),
        sy(area.height),
        area.width * scale,
        area.height * scale
    );
    let pos = geometry.positions();
    for (i, j) in topo.adjacency.edges() {
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/>"#,
            sx(pos[i].x),
            sy(pos[i].y),
            sx(pos[j].x),
            sy(pos[j].y)
        );
    }
    for i in act.active_indices() {
        let r = topo.radii[i];
        if r > 0.0 {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="gray" stroke-dasharray="4 3"/>"#,
                sx(pos[i].x),
                sy(pos[i].y),
                r * scale
            );
        }
    }
    for (i, p) in pos.iter().enumerate() {
        let fill = if act.is_active(i) { "black" } else { "white" };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="{fill}" stroke="black"/>"#,
            sx(p.x),
            sy(p.y)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(
    scenario: &Scenario<f64>,
    result: &RunResult<f64>,
    path: impl AsRef<Path>,
) -> Result<(), HarnessError> {
    write_file(path.as_ref(), &render_svg(scenario, result))
}

/// Everything a battery produced, in a stable layout. `comparison` is set
/// when both algorithms ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: ScenarioFile,
    pub scenario_digest: String,
    pub seeds: Vec<u64>,
    pub runs: BTreeMap<Algorithm, AlgorithmRuns>,
    pub aggregates: BTreeMap<Algorithm, AlgorithmAggregate>,
    pub comparison: Option<ComparisonSummary>,
}

impl Report {
    pub fn new(
        scenario: ScenarioFile,
        batteries: Vec<AlgorithmRuns>,
    ) -> Result<Self, HarnessError> {
        let Some(first) = batteries.first() else {
            return Err(HarnessError::Experiment(
                "report needs at least one battery".into(),
            ));
        };
        let digest = first.scenario_digest.clone();
        let seeds: Vec<u64> = first.runs.iter().map(|r| r.seed).collect();
        let mut runs = BTreeMap::new();
        for b in batteries {
            if b.scenario_digest != digest {
                return Err(HarnessError::Experiment(
                    "batteries come from different scenarios".into(),
                ));
            }
            if b.runs.iter().map(|r| r.seed).ne(seeds.iter().copied()) {
                return Err(HarnessError::Experiment(
                    "batteries use different seed lists".into(),
                ));
            }
            if runs.insert(b.algorithm, b).is_some() {
                return Err(HarnessError::Experiment("algorithm listed twice".into()));
            }
        }
        let aggregates = runs.iter().map(|(a, r)| (*a, aggregate(r))).collect();
        let comparison = match (runs.get(&Algorithm::Qga), runs.get(&Algorithm::Qiga2)) {
            (Some(a), Some(b)) => Some(compare(a, b)?),
            _ => None,
        };
        Ok(Self {
            schema: REPORT_SCHEMA.to_owned(),
            scenario,
            scenario_digest: digest,
            seeds,
            runs,
            aggregates,
            comparison,
        })
    }
}

pub fn render_report(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("reports always serialize");
    text.push('\n');
    text
}

pub fn emit_report(report: &Report, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    write_file(path.as_ref(), &render_report(report))
}
