//! JSON scenario files.
//!
//! ```json
//! {
//!   "schema": "lqr-topology/scenario/1",
//!   "name": "example",
//!   "area": { "width": 100.0, "height": 100.0 },
//!   "placement": { "uniform": { "count": 16, "seed": 7 } },
//!   "r_max": 40.0, "r_t": 12.0, "dist_conn": 5.0, "path_loss_exponent": 2.0,
//!   "fitness_weights": { "connectivity": 0.5, "power": 0.3, "violations": 0.2 },
//!   "engine": {
//!     "theta": 0.031415926535897934, "delta": 2.0, "mode": "bidirectional",
//!     "generations_max": 200, "observations_per_generation": 10,
//!     "feasibility": { "min_connectivity_ratio": 0.5, "max_violations": 0 }
//!   }
//! }
//! ```
//!
//! `placement` is either `{"uniform": {"count", "seed"}}` or
//! `{"explicit": [{"x", "y"}, ...]}`. Unknown fields anywhere are rejected.

use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::engine::{Algorithm, EngineConfig, Feasibility, FitnessWeights};
use crate::lqr::AdjustmentMode;
use crate::rng::{CounterRng, Domain, StreamKey};
use crate::wsn::{Area, Point, Scenario};

pub const SCENARIO_SCHEMA: &str = "lqr-topology/scenario/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub area: Area<f64>,
    pub placement: Placement,
    pub r_max: f64,
    pub r_t: f64,
    pub dist_conn: f64,
    pub path_loss_exponent: f64,
    pub fitness_weights: FitnessWeights<f64>,
    pub engine: EngineSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    Uniform { count: usize, seed: u64 },
    Explicit(Vec<Point<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    pub theta: f64,
    pub delta: f64,
    pub mode: AdjustmentMode,
    pub generations_max: usize,
    pub observations_per_generation: usize,
    pub feasibility: Feasibility<f64>,
}

impl Placement {
    /// Node positions. Uniform placement depends on its own seed only.
    pub fn positions(&self, area: &Area<f64>) -> Vec<Point<f64>> {
        match self {
            Placement::Explicit(points) => points.clone(),
            Placement::Uniform { count, seed } => {
                let mut rng = CounterRng::new(StreamKey::new(*seed, Domain::Placement, 0, 0));
                (0..*count)
                    .map(|_| {
                        let x = rng.next_f64() * area.width;
                        let y = rng.next_f64() * area.height;
                        Point::new(x, y)
                    })
                    .collect()
            }
        }
    }
}

impl ScenarioFile {
    /// Builds the scenario and an engine configuration template. The template
    /// carries algorithm `qiga2` and seed 0; batch runners set both per run.
    pub fn materialize(&self) -> Result<(Scenario<f64>, EngineConfig<f64>), HarnessError> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(HarnessError::Semantic(format!(
                "unsupported schema `{}` (expected `{SCENARIO_SCHEMA}`)",
                self.schema
            )));
        }
        let scenario = Scenario::new(
            self.placement.positions(&self.area),
            self.area,
            self.r_max,
            self.r_t,
            self.dist_conn,
            self.path_loss_exponent,
        )
        .map_err(|e| HarnessError::Semantic(e.to_string()))?;
        let config = EngineConfig {
            algorithm: Algorithm::Qiga2,
            generations_max: self.engine.generations_max,
            observations_per_generation: self.engine.observations_per_generation,
            theta: self.engine.theta,
            delta: self.engine.delta,
            mode: self.engine.mode,
            weights: self.fitness_weights,
            seed: 0,
            feasibility: self.engine.feasibility,
        };
        config
            .validate()
            .map_err(|e| HarnessError::Semantic(e.to_string()))?;
        Ok((scenario, config))
    }

    /// File describing `scenario` with explicit coordinates.
    pub fn from_parts(
        name: Option<String>,
        scenario: &Scenario<f64>,
        config: &EngineConfig<f64>,
    ) -> Self {
        Self {
            schema: SCENARIO_SCHEMA.to_owned(),
            name,
            area: scenario.area(),
            placement: Placement::Explicit(scenario.positions().to_vec()),
            r_max: scenario.r_max(),
            r_t: scenario.r_t(),
            dist_conn: scenario.dist_conn(),
            path_loss_exponent: scenario.path_loss_exponent(),
            fitness_weights: config.weights,
            engine: EngineSection {
                theta: config.theta,
                delta: config.delta,
                mode: config.mode,
                generations_max: config.generations_max,
                observations_per_generation: config.observations_per_generation,
                feasibility: config.feasibility,
            },
        }
    }
}

/// Reads and schema-checks a scenario file without materializing it.
pub fn read_scenario_file(path: impl AsRef<Path>) -> Result<ScenarioFile, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => HarnessError::NotFound {
            path: path.to_path_buf(),
        },
        _ => HarnessError::io(path, e),
    })?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let file: ScenarioFile = serde_json::from_value(value).map_err(|e| HarnessError::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if file.schema != SCENARIO_SCHEMA {
        return Err(HarnessError::Schema {
            path: path.to_path_buf(),
            message: format!(
                "unsupported schema `{}` (expected `{SCENARIO_SCHEMA}`)",
                file.schema
            ),
        });
    }
    Ok(file)
}

pub fn load_scenario(
    path: impl AsRef<Path>,
) -> Result<(Scenario<f64>, EngineConfig<f64>), HarnessError> {
    read_scenario_file(path)?.materialize()
}

pub fn save_scenario(file: &ScenarioFile, path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(file).expect("scenario files always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}
