use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lqr_topology::harness::{
    self, AlgorithmRuns, ColumnComparison, ColumnStats, ComparisonSummary, Execution, HarnessError,
    Report,
};
use lqr_topology::{Algorithm, EngineConfig, RunResult, Scenario};

#[derive(Parser)]
#[command(
    name = "lqr-topo",
    version,
    about = "Quantum-inspired topology search for sensor networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm over a seed battery.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_algo, default_value = "qiga2")]
        algo: Algorithm,
    },
    /// Run qga and qiga2 over the same seeds and compare them.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Seed count `N` (seeds 1..=N), range `a..b`, or list `3,7,11`.
    #[arg(long, default_value = "31", value_parser = parse_seeds)]
    seeds: Seeds,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Artifacts to write.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "csv,svg,report"
    )]
    emit: Vec<Artifact>,
    /// Run seeds one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Artifact {
    Csv,
    Svg,
    Report,
}

#[derive(Clone)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    harness::parse_seeds(s).map(Seeds)
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    let (common, algorithms) = match command {
        Command::Run { common, algo } => (common, vec![algo]),
        Command::Compare { common } => (common, vec![Algorithm::Qga, Algorithm::Qiga2]),
    };
    let file = harness::read_scenario_file(&common.scenario)?;
    let (scenario, template) = file.materialize()?;
    let execution = if common.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };

    let mut batteries = Vec::new();
    let mut all_results = Vec::new();
    for algorithm in algorithms {
        let config = EngineConfig {
            algorithm,
            ..template.clone()
        };
        let results = harness::run_experiment(&scenario, &config, &common.seeds.0, execution)?;
        batteries.push(AlgorithmRuns::from_results(&scenario, algorithm, &results));
        all_results.push((algorithm, results));
    }

    fs::create_dir_all(&common.out).map_err(|e| HarnessError::Io {
        path: common.out.clone(),
        source: e,
    })?;
    for (algorithm, results) in &all_results {
        write_artifacts(&common.out, &common.emit, &scenario, *algorithm, results)?;
    }
    let report = Report::new(file, batteries)?;
    if common.emit.contains(&Artifact::Report) {
        harness::emit_report(&report, common.out.join("report.json"))?;
    }
    print_summary(&report);
    Ok(())
}

fn write_artifacts(
    out: &Path,
    emit: &[Artifact],
    scenario: &Scenario,
    algorithm: Algorithm,
    results: &[RunResult],
) -> Result<(), HarnessError> {
    if emit.contains(&Artifact::Csv) {
        harness::emit_csv(results, out.join(format!("{algorithm}.csv")))?;
    }
    if emit.contains(&Artifact::Svg) {
        for r in results {
            harness::emit_svg(
                scenario,
                r,
                out.join(format!("{algorithm}-seed{}.svg", r.seed)),
            )?;
        }
    }
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}"))
}

fn stats_row(label: &str, s: &ColumnStats) {
    println!(
        "  {label:<28} median {:>10}  IQR [{}, {}]",
        cell(s.median),
        cell(s.q1),
        cell(s.q3)
    );
}

fn comparison_row(label: &str, c: &ColumnComparison) {
    println!(
        "  {label:<28} {:>10} {:>10}   {:?}",
        cell(c.qga_median),
        cell(c.qiga2_median),
        c.winner
    );
}

fn print_summary(report: &Report) {
    println!(
        "scenario {} ({} seeds)",
        &report.scenario_digest[..12],
        report.seeds.len()
    );
    if let Some(ComparisonSummary {
        first_feasible_generation,
        best_found_generation,
        final_total_power,
        final_violations,
        qga,
        qiga2,
        ..
    }) = &report.comparison
    {
        println!("  {:<28} {:>10} {:>10}   winner", "median", "qga", "qiga2");
        comparison_row("first feasible generation", first_feasible_generation);
        comparison_row("solution found at generation", best_found_generation);
        comparison_row("total power", final_total_power);
        comparison_row("threshold violations", final_violations);
        println!(
            "  feasible runs: qga {}/{}, qiga2 {}/{}",
            qga.feasible_runs, qga.runs, qiga2.feasible_runs, qiga2.runs
        );
        return;
    }
    for (algorithm, agg) in &report.aggregates {
        println!(
            "{algorithm}: {}/{} runs feasible",
            agg.feasible_runs, agg.runs
        );
        stats_row("first feasible generation", &agg.first_feasible_generation);
        stats_row("solution found at generation", &agg.best_found_generation);
        stats_row("total power", &agg.final_total_power);
        stats_row("threshold violations", &agg.final_violations);
    }
}
