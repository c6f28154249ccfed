//! `yoyosim` — run autoscaling-abuse scenarios, quantify the damage, and
//! train/evaluate the burst-attack detector. All artifact writes are
//! atomic (temp file + rename), so interrupted runs never leave partial
//! files behind.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use yoyosim::config::{parse_duration_str, DurationSecs};
use yoyosim::damage::evaluate_attack;
use yoyosim::detector::{
    generate_dataset, train_test_split, Dataset, DatasetSpec, EvalMetrics, GbtModel, GbtParams,
};
use yoyosim::detector::metrics::evaluate_predictions;
use yoyosim::engine::{run_simulation_opts, SimOptions};
use yoyosim::error::Error;
use yoyosim::scenario::{self, Scenario};
use yoyosim::workload::{optimal_t_off, optimal_t_on, parse_attack_shorthand};

#[derive(Parser)]
#[command(
    name = "yoyosim",
    about = "Simulate two-tier autoscaling under burst attacks, measure the damage, detect the pattern",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trace artifacts
    Simulate(SimulateArgs),
    /// Run a scenario plus its steady and power-1 companions; write the damage report
    Compare(CompareArgs),
    /// Simulate the detection grid and write the labeled feature CSV
    Dataset(DatasetArgs),
    /// Train the boosted-tree detector from a dataset CSV
    Train(TrainArgs),
    /// Score a trained model against a labeled dataset CSV
    Eval(EvalArgs),
    /// Print the burst timing that tracks a cluster's scaling windows
    Optimal(OptimalArgs),
    /// List builtin scenarios, or export them as TOML files
    Scenarios(ScenariosArgs),
}

/// Where a scenario comes from: a file, a builtin, or attack shorthand.
#[derive(Args)]
struct SourceArgs {
    /// Path to a scenario TOML file
    #[arg(long, value_name = "PATH", conflicts_with_all = ["builtin", "attack"])]
    scenario: Option<PathBuf>,
    /// Name of a builtin scenario (see `yoyosim scenarios`)
    #[arg(long, value_name = "NAME", conflicts_with = "attack")]
    builtin: Option<String>,
    /// Burst shorthand, e.g. "k=20 on=10m off=20m n=3"
    #[arg(long, value_name = "SPEC")]
    attack: Option<String>,
    /// Legitimate base rate (requests/second) for --attack
    #[arg(long, value_name = "RPS", default_value_t = 30.0)]
    rate: f64,
    /// Override the run length (seconds, or "90m"/"2h")
    #[arg(long, value_name = "DURATION")]
    duration: Option<String>,
    /// Override the random seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

impl SourceArgs {
    fn resolve(&self) -> yoyosim::Result<Scenario> {
        let mut scenario = if let Some(path) = &self.scenario {
            Scenario::load(path)?
        } else if let Some(name) = &self.builtin {
            scenario::builtin(name).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown builtin {:?}; available: {}",
                    name,
                    scenario::builtin_names().join(", ")
                ))
            })?
        } else if let Some(spec) = &self.attack {
            let workload = parse_attack_shorthand(spec, self.rate)?;
            let duration = workload
                .attack_span()
                .expect("shorthand always builds a burst schedule");
            Scenario {
                schema_version: scenario::SCHEMA_VERSION,
                name: "attack".to_string(),
                duration: DurationSecs(duration),
                seed: 7,
                cluster: Default::default(),
                service: Default::default(),
                pricing: Default::default(),
                workload,
            }
        } else {
            return Err(Error::InvalidConfig(
                "pass one of --scenario <path>, --builtin <name>, or --attack <spec>".into(),
            ));
        };
        if let Some(d) = &self.duration {
            scenario.duration = DurationSecs(parse_duration_str(d).map_err(Error::Parse)?);
        }
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Seconds per simulation tick (timer windows must be multiples)
    #[arg(long, value_name = "SECS", default_value_t = 1)]
    tick: u64,
    /// Directory artifacts are written into
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Directory artifacts are written into
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DatasetArgs {
    /// Output CSV path
    #[arg(long, value_name = "FILE", default_value = "dataset.csv")]
    out: PathBuf,
    /// Simulated runs per grid cell
    #[arg(long, value_name = "N", default_value_t = 3)]
    runs_per_cell: usize,
    /// Legitimate base rate (requests/second)
    #[arg(long, value_name = "RPS", default_value_t = 30.0)]
    rate: f64,
    /// Master seed; per-run seeds are derived from it
    #[arg(long, value_name = "N", default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled dataset CSV (from `yoyosim dataset`)
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Where the trained model JSON goes
    #[arg(long, value_name = "FILE", default_value = "model.json")]
    model_out: PathBuf,
    /// Where the metrics JSON goes
    #[arg(long, value_name = "FILE", default_value = "metrics.json")]
    metrics_out: PathBuf,
    /// Fraction of samples used for training (rest is held out)
    #[arg(long, value_name = "F", default_value_t = 0.7)]
    train_fraction: f64,
    /// Seed for the train/test shuffle
    #[arg(long, value_name = "N", default_value_t = 7)]
    seed: u64,
    /// Boosting rounds
    #[arg(long, value_name = "N", default_value_t = 10)]
    trees: usize,
    /// Tree depth (1 = stumps)
    #[arg(long, value_name = "N", default_value_t = 1)]
    depth: usize,
    /// Shrinkage per round
    #[arg(long, value_name = "F", default_value_t = 0.3)]
    learning_rate: f64,
    /// Disable class reweighting
    #[arg(long)]
    no_balance: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Labeled dataset CSV
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// Trained model JSON
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Optional metrics JSON output
    #[arg(long, value_name = "FILE")]
    metrics_out: Option<PathBuf>,
}

#[derive(Args)]
struct OptimalArgs {
    /// Read the cluster from this scenario TOML instead of defaults
    #[arg(long, value_name = "PATH", conflicts_with = "builtin")]
    scenario: Option<PathBuf>,
    /// Read the cluster from this builtin scenario
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Also print the attacker cost of the optimal cycle at this power
    #[arg(long, value_name = "K")]
    power: Option<f64>,
    /// Emit JSON instead of key = value lines
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScenariosArgs {
    /// Write every builtin as <name>.toml into this directory
    #[arg(long, value_name = "DIR")]
    export: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Dataset(args) => cmd_dataset(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Optimal(args) => cmd_optimal(args),
        Command::Scenarios(args) => cmd_scenarios(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Writes via a hidden temp file in the same directory, then renames.
fn write_atomic(path: &Path, content: &str) -> yoyosim::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, content).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn pretty_json<T: Serialize>(value: &T) -> yoyosim::Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("JSON encode: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn cmd_simulate(args: SimulateArgs) -> yoyosim::Result<()> {
    let scenario = args.source.resolve()?;
    let options = SimOptions {
        tick_secs: args.tick,
        check_invariants: false,
    };
    let result = run_simulation_opts(
        &scenario.cluster,
        &scenario.service,
        &scenario.workload,
        scenario.duration.secs(),
        scenario.seed,
        &options,
    )?;

    let base = args.out.join(&scenario.name);
    let csv_path = with_suffix(&base, "_trace.csv");
    let jsonl_path = with_suffix(&base, "_trace.jsonl");
    let plot_path = with_suffix(&base, "_plot.csv");
    write_atomic(&csv_path, &result.trace.to_csv()?)?;
    write_atomic(&jsonl_path, &result.trace.to_jsonl()?)?;
    write_atomic(&plot_path, &result.trace.to_plot_csv()?)?;

    let rows = &result.trace.rows;
    let peak_pods = rows.iter().map(|r| r.total_pods).max().unwrap_or(0);
    let peak_nodes = rows.iter().map(|r| r.total_nodes).max().unwrap_or(0);
    let mean_response = result
        .trace
        .mean_over(0, scenario.duration.secs(), |r| r.response_time)?;
    let total_errors: u64 = rows.iter().map(|r| r.errors).sum();
    println!(
        "{}: {} rows, seed {}, peak pods {}, peak nodes {}, mean response {:.1} ms, {} failed requests",
        scenario.name,
        rows.len(),
        scenario.seed,
        peak_pods,
        peak_nodes,
        mean_response,
        total_errors
    );
    for p in [&csv_path, &jsonl_path, &plot_path] {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> yoyosim::Result<()> {
    let scenario = args.source.resolve()?;
    let assessment = evaluate_attack(
        &scenario.cluster,
        &scenario.service,
        &scenario.pricing,
        &scenario.workload,
        scenario.duration.secs(),
        scenario.seed,
    )?;

    let base = args.out.join(&scenario.name);
    let report_path = with_suffix(&base, "_damage.json");
    write_atomic(&report_path, &pretty_json(&assessment.report)?)?;
    for (tag, run) in [
        ("baseline", &assessment.baseline),
        ("unit", &assessment.unit),
        ("attack", &assessment.attack),
    ] {
        let path = with_suffix(&base, &format!("_{tag}_trace.csv"));
        write_atomic(&path, &run.trace.to_csv()?)?;
        println!("wrote {}", path.display());
    }
    println!("wrote {}", report_path.display());

    let r = &assessment.report;
    println!(
        "{}: window {}s, response {:.1} -> {:.1} ms, nodes {:.2} -> {:.2}",
        scenario.name,
        r.window_secs,
        r.baseline_mean_response_ms,
        r.attack_mean_response_ms,
        r.baseline_mean_nodes,
        r.attack_mean_nodes
    );
    println!(
        "performance damage {:.3} ms (relative {}), economic damage {:.3} nodes (relative {})",
        r.performance_damage,
        fmt_opt(r.relative_performance_damage),
        r.economic_damage,
        fmt_opt(r.relative_economic_damage)
    );
    println!(
        "attack cost {}, potency {}, billed {:.4} -> {:.4} (overhead {:.4})",
        fmt_opt(r.attack_cost),
        fmt_opt(r.potency),
        r.baseline_billed,
        r.attack_billed,
        r.billed_overhead
    );
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.3}"),
        None => "undefined".to_string(),
    }
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.push_str(suffix);
    base.with_file_name(name)
}

fn cmd_dataset(args: DatasetArgs) -> yoyosim::Result<()> {
    let spec = DatasetSpec {
        runs_per_cell: args.runs_per_cell,
        base_rate: args.rate,
        seed: args.seed,
    };
    let started = Instant::now();
    let dataset = generate_dataset(&spec, &Default::default(), &Default::default())?;
    write_atomic(&args.out, &dataset.to_csv()?)?;
    let attacks = dataset.labels.iter().filter(|&&l| l).count();
    println!(
        "wrote {}: {} samples ({} attack, {} regular), {} features, {:.1}s",
        args.out.display(),
        dataset.len(),
        attacks,
        dataset.len() - attacks,
        dataset.feature_names.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

/// Everything `train` learns about its model, written next to it.
#[derive(Serialize)]
struct TrainReport {
    train_samples: usize,
    test_samples: usize,
    train_metrics: EvalMetrics,
    test_metrics: EvalMetrics,
    train_log_loss: Vec<f64>,
    feature_importance: Vec<(String, f64)>,
}

fn cmd_train(args: TrainArgs) -> yoyosim::Result<()> {
    let text = fs::read_to_string(&args.data).map_err(|e| Error::io(&args.data, e))?;
    let dataset = Dataset::from_csv(&text)?;
    let (train, test) = train_test_split(&dataset, args.train_fraction, args.seed)?;
    // On the canonical telemetry features, settle exact gain ties in favor
    // of the scaling series (pods, nodes) rather than service measurements.
    let feature_priority = if dataset.feature_names == yoyosim::detector::feature_names() {
        Some(yoyosim::detector::detection_priority())
    } else {
        None
    };
    let params = GbtParams {
        n_trees: args.trees,
        max_depth: args.depth,
        learning_rate: args.learning_rate,
        balance_classes: !args.no_balance,
        feature_priority,
        ..GbtParams::default()
    };
    let started = Instant::now();
    let model = GbtModel::train(
        &train.features,
        &train.labels,
        train.feature_names.clone(),
        params,
    )?;
    let train_time = started.elapsed();

    let score = |ds: &Dataset| -> yoyosim::Result<EvalMetrics> {
        let preds = ds
            .features
            .iter()
            .map(|row| model.predict(row))
            .collect::<yoyosim::Result<Vec<bool>>>()?;
        evaluate_predictions(&ds.labels, &preds)
    };
    let train_metrics = score(&train)?;
    let test_metrics = score(&test)?;
    let report = TrainReport {
        train_samples: train.len(),
        test_samples: test.len(),
        train_metrics,
        test_metrics,
        train_log_loss: model.train_log_loss.clone(),
        feature_importance: model.feature_importance(),
    };

    write_atomic(&args.model_out, &model.to_json()?)?;
    write_atomic(&args.metrics_out, &pretty_json(&report)?)?;
    println!(
        "trained {} trees in {:.2}s on {} samples; held-out: accuracy {:.3}, precision {:.3}, recall {:.3}, f1 {:.3}",
        model.trees.len(),
        train_time.as_secs_f64(),
        train.len(),
        test_metrics.accuracy,
        test_metrics.precision,
        test_metrics.recall,
        test_metrics.f1
    );
    let top = report
        .feature_importance
        .first()
        .map(|(name, gain)| format!("{name} ({gain:.1})"))
        .unwrap_or_default();
    println!(
        "wrote {} and {}; top feature: {top}",
        args.model_out.display(),
        args.metrics_out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> yoyosim::Result<()> {
    let data_text = fs::read_to_string(&args.data).map_err(|e| Error::io(&args.data, e))?;
    let dataset = Dataset::from_csv(&data_text)?;
    let model_text = fs::read_to_string(&args.model).map_err(|e| Error::io(&args.model, e))?;
    let model = GbtModel::from_json(&model_text)?;
    if model.feature_names != dataset.feature_names {
        return Err(Error::InvalidConfig(format!(
            "model features {:?} do not match dataset features {:?}",
            model.feature_names, dataset.feature_names
        )));
    }
    let preds = dataset
        .features
        .iter()
        .map(|row| model.predict(row))
        .collect::<yoyosim::Result<Vec<bool>>>()?;
    let metrics = evaluate_predictions(&dataset.labels, &preds)?;
    if let Some(path) = &args.metrics_out {
        write_atomic(path, &pretty_json(&metrics)?)?;
        println!("wrote {}", path.display());
    }
    println!(
        "{} samples: accuracy {:.3}, precision {:.3}, recall {:.3}, f1 {:.3} (tp {} tn {} fp {} fn {})",
        dataset.len(),
        metrics.accuracy,
        metrics.precision,
        metrics.recall,
        metrics.f1,
        metrics.true_positives,
        metrics.true_negatives,
        metrics.false_positives,
        metrics.false_negatives
    );
    Ok(())
}

#[derive(Serialize)]
struct OptimalReport {
    burst_on_secs: u64,
    burst_off_secs: u64,
    cycle_secs: u64,
    duty_cycle: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attack_cost: Option<f64>,
}

fn cmd_optimal(args: OptimalArgs) -> yoyosim::Result<()> {
    let cluster = if let Some(path) = &args.scenario {
        Scenario::load(path)?.cluster
    } else if let Some(name) = &args.builtin {
        scenario::builtin(name)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown builtin {:?}; available: {}",
                    name,
                    scenario::builtin_names().join(", ")
                ))
            })?
            .cluster
    } else {
        Default::default()
    };
    let on = optimal_t_on(&cluster);
    let off = optimal_t_off(&cluster);
    let cycle = on + off;
    let report = OptimalReport {
        burst_on_secs: on,
        burst_off_secs: off,
        cycle_secs: cycle,
        duty_cycle: on as f64 / cycle as f64,
        power: args.power,
        attack_cost: match args.power {
            Some(k) => Some(yoyosim::damage::attack_cost(k, on, cycle)?),
            None => None,
        },
    };
    if args.json {
        print!("{}", pretty_json(&report)?);
    } else {
        println!("burst_on_secs = {}", report.burst_on_secs);
        println!("burst_off_secs = {}", report.burst_off_secs);
        println!("cycle_secs = {}", report.cycle_secs);
        println!("duty_cycle = {:.6}", report.duty_cycle);
        if let (Some(k), Some(cost)) = (report.power, report.attack_cost) {
            println!("attack_cost_at_power_{k} = {cost:.6}");
        }
    }
    Ok(())
}

fn cmd_scenarios(args: ScenariosArgs) -> yoyosim::Result<()> {
    if let Some(dir) = &args.export {
        for name in scenario::builtin_names() {
            let s = scenario::builtin(name).expect("builtin list is consistent");
            let path = dir.join(format!("{name}.toml"));
            write_atomic(&path, &s.to_toml_string()?)?;
            println!("wrote {}", path.display());
        }
        return Ok(());
    }
    for name in scenario::builtin_names() {
        let s = scenario::builtin(name).expect("builtin list is consistent");
        println!(
            "{name:20} {:9} {:>6}s  rate {:>5.1} rps  k {:>4.1}",
            format!("{:?}", s.workload.kind).to_lowercase(),
            s.duration.secs(),
            s.workload.base_rate,
            s.workload.power_k,
        );
    }
    Ok(())
}
