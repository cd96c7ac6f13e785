mod common;

use std::fs;

use serde_json::Value;

use lqr_topology::engine::{self, Feasibility, FitnessWeights};
use lqr_topology::harness::{
    self, AlgorithmRuns, EngineSection, Execution, HarnessError, Placement, Report, ScenarioFile,
    SCENARIO_SCHEMA,
};
use lqr_topology::wsn::{Area, Point};
use lqr_topology::{
    ActivationVector, AdjustmentMode, Algorithm, EngineConfig, RunResult, Scenario,
};

use common::{benchmark_path, oracle_metrics};

fn small_file() -> ScenarioFile {
    ScenarioFile {
        schema: SCENARIO_SCHEMA.into(),
        name: None,
        area: Area {
            width: 60.0,
            height: 60.0,
        },
        placement: Placement::Uniform { count: 8, seed: 3 },
        r_max: 30.0,
        r_t: 12.0,
        dist_conn: 5.0,
        path_loss_exponent: 2.0,
        fitness_weights: FitnessWeights::default(),
        engine: EngineSection {
            theta: 0.03,
            delta: 2.0,
            mode: AdjustmentMode::Bidirectional,
            generations_max: 30,
            observations_per_generation: 10,
            feasibility: Feasibility {
                min_connectivity_ratio: 0.5,
                max_violations: 0,
            },
        },
    }
}

fn write_text(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn load_errors_are_classified() {
    let dir = tempfile::tempdir().unwrap();
    let missing = harness::load_scenario(dir.path().join("absent.json")).unwrap_err();
    assert!(matches!(missing, HarnessError::NotFound { .. }));

    let broken = write_text(&dir, "broken.json", "{ \"schema\": ");
    assert!(matches!(
        harness::load_scenario(&broken),
        Err(HarnessError::Parse { .. })
    ));

    let mut v = serde_json::to_value(small_file()).unwrap();
    v["colour"] = Value::from("blue");
    let unknown = write_text(&dir, "unknown.json", &v.to_string());
    assert!(matches!(
        harness::load_scenario(&unknown),
        Err(HarnessError::Schema { .. })
    ));

    let mut v = serde_json::to_value(small_file()).unwrap();
    v["schema"] = Value::from("lqr-topology/scenario/99");
    let version = write_text(&dir, "version.json", &v.to_string());
    assert!(matches!(
        harness::load_scenario(&version),
        Err(HarnessError::Schema { .. })
    ));

    let mut v = serde_json::to_value(small_file()).unwrap();
    v["r_t"] = Value::from(31.0);
    let semantic = write_text(&dir, "rt.json", &v.to_string());
    assert!(matches!(
        harness::load_scenario(&semantic),
        Err(HarnessError::Semantic(_))
    ));

    let mut v = serde_json::to_value(small_file()).unwrap();
    v["placement"]["uniform"]["count"] = Value::from(7);
    let odd = write_text(&dir, "odd.json", &v.to_string());
    assert!(matches!(
        harness::load_scenario(&odd),
        Err(HarnessError::Semantic(_))
    ));

    let codes = [
        missing.exit_code(),
        harness::load_scenario(&broken).unwrap_err().exit_code(),
        harness::load_scenario(&unknown).unwrap_err().exit_code(),
        harness::load_scenario(&semantic).unwrap_err().exit_code(),
    ];
    let mut distinct = codes.to_vec();
    distinct.dedup();
    assert_eq!(distinct.len(), codes.len());
    assert!(codes.iter().all(|&c| c != 0));
}

#[test]
fn benchmark_file_loads() {
    let (s, config) = harness::load_scenario(benchmark_path()).unwrap();
    assert_eq!(s.len(), 16);
    assert!(s.positions().iter().all(|p| s.area().contains(p)));
    assert_eq!(config.generations_max, 200);
}

#[test]
fn scenario_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (s, config) = small_file().materialize().unwrap();
    let file = ScenarioFile::from_parts(Some("copy".into()), &s, &config);
    let path = dir.path().join("copy.json");
    harness::save_scenario(&file, &path).unwrap();
    let (again, config_again) = harness::load_scenario(&path).unwrap();
    assert_eq!(again, s);
    assert_eq!(config_again, config);
}

#[test]
fn experiments_are_order_independent() {
    let (s, template) = small_file().materialize().unwrap();
    let config = EngineConfig {
        algorithm: Algorithm::Qiga2,
        ..template
    };
    let one = harness::run_experiment(&s, &config, &[5], Execution::Parallel).unwrap();
    let direct = engine::run(
        &s,
        &EngineConfig {
            seed: 5,
            ..config.clone()
        },
    )
    .unwrap();
    assert_eq!(one, vec![direct]);

    let par = harness::run_experiment(&s, &config, &[9, 2, 7, 4], Execution::Parallel).unwrap();
    let seq = harness::run_experiment(&s, &config, &[4, 7, 2, 9], Execution::Sequential).unwrap();
    assert_eq!(par, seq);
    assert_eq!(
        par.iter().map(|r| r.seed).collect::<Vec<_>>(),
        vec![2, 4, 7, 9]
    );

    assert!(matches!(
        harness::run_experiment(&s, &config, &[1, 1], Execution::Parallel),
        Err(HarnessError::Experiment(_))
    ));
    assert!(harness::run_experiment(&s, &config, &[], Execution::Parallel).is_err());
}

#[test]
fn failing_seed_is_identified() {
    // a pair that must sit 50 apart inside a 10 x 10 box cannot converge
    let s = Scenario::new(
        vec![Point::new(1.0, 1.0), Point::new(2.0, 2.0)],
        Area {
            width: 10.0,
            height: 10.0,
        },
        10.0,
        5.0,
        50.0,
        2.0,
    )
    .unwrap();
    // with a flat fitness the first exemplar stays best forever, so seeds
    // whose first exemplar wakes the pair keep pushing it into the wall
    let config = EngineConfig {
        weights: FitnessWeights::new(1.0, 0.0, 0.0).unwrap(),
        ..EngineConfig::new(Algorithm::Qiga2, 0)
    };
    let seeds: Vec<u64> = (1..=20).rev().collect();
    let first_bad = (1..=20)
        .find(|&seed| {
            engine::run(
                &s,
                &EngineConfig {
                    seed,
                    ..config.clone()
                },
            )
            .is_err()
        })
        .expect("some seed stalls");
    match harness::run_experiment(&s, &config, &seeds, Execution::Parallel) {
        Err(HarnessError::Run {
            seed,
            algorithm,
            source,
        }) => {
            assert_eq!(seed, first_bad);
            assert_eq!(algorithm, Algorithm::Qiga2);
            assert!(source.to_string().contains("no progress"), "{source}");
        }
        other => panic!("expected a run error, got {other:?}"),
    }
}

fn battery(file: &ScenarioFile, seeds: &[u64]) -> (Scenario, Vec<(Algorithm, Vec<RunResult>)>) {
    let (s, template) = file.materialize().unwrap();
    let runs = [Algorithm::Qga, Algorithm::Qiga2]
        .into_iter()
        .map(|algorithm| {
            let config = EngineConfig {
                algorithm,
                ..template.clone()
            };
            (
                algorithm,
                harness::run_experiment(&s, &config, seeds, Execution::Parallel).unwrap(),
            )
        })
        .collect();
    (s, runs)
}

fn lower_quantile(mut v: Vec<f64>, p: f64) -> Option<f64> {
    v.sort_by(f64::total_cmp);
    let x = v[(p * (v.len() - 1) as f64).floor() as usize];
    x.is_finite().then_some(x)
}

#[test]
fn report_aggregates_recompute_from_rows() {
    let file = small_file();
    let (s, runs) = battery(&file, &[1, 2, 3, 4, 5, 6]);
    let batteries = runs
        .iter()
        .map(|(a, r)| AlgorithmRuns::from_results(&s, *a, r))
        .collect();
    let report = Report::new(file, batteries).unwrap();
    let text = harness::render_report(&report);
    assert_eq!(text, harness::render_report(&report));

    let back: Report = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);

    // independent pass over the JSON rows only
    let v: Value = serde_json::from_str(&text).unwrap();
    let columns = [
        "first_feasible_generation",
        "best_found_generation",
        "final_total_power",
        "final_violations",
    ];
    for algo in ["qga", "qiga2"] {
        let rows = v["runs"][algo]["runs"].as_array().unwrap();
        assert_eq!(rows.len(), 6);
        for col in columns {
            let vals: Vec<f64> = rows
                .iter()
                .map(|r| r[col].as_f64().unwrap_or(f64::INFINITY))
                .collect();
            let agg = &v["aggregates"][algo][col];
            for (key, p) in [("median", 0.5), ("q1", 0.25), ("q3", 0.75)] {
                assert_eq!(
                    agg[key].as_f64(),
                    lower_quantile(vals.clone(), p),
                    "{algo} {col} {key}"
                );
            }
            let cmp = &v["comparison"][col];
            assert_eq!(cmp[format!("{algo}_median")], agg["median"]);
        }
    }
    for col in columns {
        let q = v["comparison"][col]["qga_median"]
            .as_f64()
            .unwrap_or(f64::INFINITY);
        let r = v["comparison"][col]["qiga2_median"]
            .as_f64()
            .unwrap_or(f64::INFINITY);
        let expected = if r < q {
            "qiga2"
        } else if q < r {
            "qga"
        } else {
            "tie"
        };
        assert_eq!(v["comparison"][col]["winner"], expected);
    }
}

#[test]
fn single_seed_report_round_trips() {
    let file = small_file();
    let (s, runs) = battery(&file, &[11]);
    let (a, r) = &runs[1];
    let report = Report::new(file, vec![AlgorithmRuns::from_results(&s, *a, r)]).unwrap();
    assert!(report.comparison.is_none());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    harness::emit_report(&report, &path).unwrap();
    let back: Report = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn csv_has_one_row_per_generation() {
    let mut file = small_file();
    file.engine.generations_max = 5;
    let (s, runs) = battery(&file, &[1]);
    let results = &runs[0].1;
    let text = harness::render_csv(results);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], harness::CSV_HEADER);
    assert!(text.ends_with('\n'));
    for (line, h) in lines[1..].iter().zip(&results[0].history) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 7);
        assert_eq!(fields[2].parse::<f64>().unwrap(), h.best_fitness);
        assert_eq!(fields[3].parse::<f64>().unwrap(), h.total_power);
        assert_eq!(fields[6], if h.feasible { "1" } else { "0" });
    }

    let mut empty = results[0].clone();
    empty.history.clear();
    assert_eq!(
        harness::render_csv(&[empty]),
        format!("{}\n", harness::CSV_HEADER)
    );

    let dir = tempfile::tempdir().unwrap();
    harness::emit_csv(results, dir.path().join("a.csv")).unwrap();
    harness::emit_csv(results, dir.path().join("b.csv")).unwrap();
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
    let _ = s;
}

fn count(svg: &str, tag: &str) -> usize {
    svg.matches(&format!("<{tag} ")).count()
}

fn fake_result(bits: Vec<bool>, positions: Vec<Point<f64>>) -> RunResult {
    RunResult {
        algorithm: Algorithm::Qga,
        seed: 1,
        history: Vec::new(),
        first_feasible_generation: None,
        best: Some(engine::BestStore {
            best_bits: ActivationVector::new(bits),
            best_fitness: 0.5,
            found_at_generation: 1,
        }),
        best_feasible: None,
        final_positions: positions,
    }
}

#[test]
fn svg_element_counts() {
    let s = Scenario::new(
        vec![
            Point::new(10.0, 10.0),
            Point::new(15.0, 10.0),
            Point::new(40.0, 40.0),
            Point::new(80.0, 80.0),
        ],
        Area {
            width: 100.0,
            height: 100.0,
        },
        30.0,
        10.0,
        5.0,
        2.0,
    )
    .unwrap();
    let dark = harness::render_svg(&s, &fake_result(vec![false; 4], s.positions().to_vec()));
    assert_eq!(count(&dark, "line"), 0);
    assert_eq!(count(&dark, "circle"), 4);
    assert_eq!(count(&dark, "rect"), 1);

    let pair = harness::render_svg(
        &s,
        &fake_result(vec![true, true, false, false], s.positions().to_vec()),
    );
    assert_eq!(count(&pair, "line"), 1);
    // four nodes plus two radius circles
    assert_eq!(count(&pair, "circle"), 6);
    assert!(pair.starts_with("<svg ") && pair.ends_with("</svg>\n"));
}

#[test]
fn svg_links_match_adjacency_on_benchmark() {
    let (s, template) = harness::load_scenario(benchmark_path()).unwrap();
    let config = EngineConfig {
        algorithm: Algorithm::Qiga2,
        seed: 4,
        ..template
    };
    let result = engine::run(&s, &config).unwrap();
    let (bits, positions) = result.snapshot().unwrap();
    let mut moved = s.clone();
    moved.positions_mut().copy_from_slice(positions);
    let oracle = oracle_metrics(&moved, bits.bits());
    let svg = harness::render_svg(&s, &result);
    assert_eq!(count(&svg, "line"), oracle.links.len());
    let radii = bits
        .active_indices()
        .filter(|&i| oracle.radii[i] > 0.0)
        .count();
    assert_eq!(count(&svg, "circle"), s.len() + radii);
    assert_eq!(svg, harness::render_svg(&s, &result));
}
