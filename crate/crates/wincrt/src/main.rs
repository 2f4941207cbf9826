//! Command-line front end: analyze observed data, evaluate exact estimands,
//! compute quadrature truths, and run simulation studies.

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::Serialize;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use wincrt::data_model::RatioValue;
use wincrt::dgp::{DgpConfig, GammaLink};
use wincrt::error::Error;
use wincrt::estimand_oracle::{collapse_check, estimands, SuperpopulationSpec};
use wincrt::jackknife::{jackknife_all, CiScale, DfRule};
use wincrt::numeric::WinScalar;
use wincrt::study::{run_consistency, run_study, StudyOptions};
use wincrt::truth_quadrature::{true_estimands, DEFAULT_NODES};
use wincrt::win_estimators::estimate_triple;
use wincrt::{summarize, Measure, TrialDataset, WeightScheme};

#[derive(Parser)]
#[command(
    name = "wincrt",
    version,
    about = "Win ratio / win odds / win difference analysis for cluster randomized trials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap the worker thread count (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output format.
    #[arg(long, global = true, value_parser = ["table", "records"], default_value = "table")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate win statistics from an observed dataset with jackknife CIs.
    Analyze(AnalyzeArgs),
    /// Evaluate exact estimands for a superpopulation spec.
    Estimand(EstimandArgs),
    /// Compute true estimand values for a simulation config by quadrature.
    Truth(TruthArgs),
    /// Run a Monte Carlo study (or a single large-M consistency check).
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV file with header cluster_id,arm,outcome (one row per individual).
    data: PathBuf,
    /// Pair weighting: individual-pair, cluster-pair, or custom:<expr in ni, nj>.
    #[arg(long, default_value = "individual-pair")]
    scheme: String,
    /// Comma-separated outcome levels, worst first (default: inferred).
    #[arg(long)]
    levels: Option<String>,
    /// Degrees-of-freedom rule for the t interval.
    #[arg(long, value_parser = ["m-2", "m-1"], default_value = "m-2")]
    df: String,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Build WR/WO intervals on the log scale.
    #[arg(long)]
    log_scale: bool,
    /// Report exact rational win/loss/tie probabilities and point estimates.
    #[arg(long)]
    rational: bool,
}

#[derive(Args)]
struct EstimandArgs {
    /// TOML superpopulation spec (levels + cluster_type tables).
    spec: PathBuf,
    /// Pair weighting: individual-pair, cluster-pair, or custom:<expr in ni, nj>.
    #[arg(long)]
    scheme: Option<String>,
    /// Print exact fractions instead of decimals.
    #[arg(long)]
    rational: bool,
}

#[derive(Args)]
struct TruthArgs {
    /// TOML simulation config.
    config: PathBuf,
    /// Gauss-Hermite node count.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    /// Override the size link declared in the config.
    #[arg(long)]
    gamma_link: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML simulation config.
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config replicate count.
    #[arg(long)]
    replicates: Option<usize>,
    /// Override the size link declared in the config.
    #[arg(long)]
    gamma_link: Option<String>,
    /// Degrees-of-freedom rule for the t interval.
    #[arg(long, value_parser = ["m-2", "m-1"], default_value = "m-2")]
    df: String,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Build WR/WO intervals on the log scale.
    #[arg(long)]
    log_scale: bool,
    /// Gauss-Hermite node count for the truths.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    /// Run a single-replicate consistency check instead of the full study.
    #[arg(long)]
    consistency: bool,
    /// Cluster count for the consistency check.
    #[arg(long, default_value_t = 5000)]
    clusters: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    wincrt::parallel::limit_threads(cli.threads);
    let records = cli.format == "records";
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(args, records),
        Command::Estimand(args) => cmd_estimand(args, records),
        Command::Truth(args) => cmd_truth(args, records),
        Command::Simulate(args) => cmd_simulate(args, records),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 = parse, 3 = validation, 4 = inference degeneracy.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Io(_) => 2,
        Error::UndefinedRatio
        | Error::DegenerateDeletion { .. }
        | Error::InsufficientClusters { .. } => 4,
        _ => 3,
    }
}

fn df_rule(flag: &str) -> DfRule {
    match flag {
        "m-1" => DfRule::MMinus1,
        _ => DfRule::MMinus2,
    }
}

fn ratio_string(value: &RatioValue<BigRational>) -> String {
    match value {
        RatioValue::Finite(v) => v.to_string(),
        RatioValue::PositiveInfinity => "inf".into(),
    }
}

fn emit<T: Serialize>(record: &T) -> wincrt::Result<()> {
    let line = serde_json::to_string(record)
        .map_err(|e| Error::InvalidConfig(format!("serialization: {e}")))?;
    println!("{line}");
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeRecord {
    estimand: &'static str,
    scheme: String,
    estimate: f64,
    std_error: f64,
    ci_lower: f64,
    ci_upper: f64,
    confidence_level: f64,
    df_rule: &'static str,
    ci_scale: &'static str,
    clusters: usize,
    treated_clusters: usize,
    control_clusters: usize,
    win: f64,
    loss: f64,
    tie: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_estimate: Option<String>,
}

fn cmd_analyze(args: AnalyzeArgs, records: bool) -> wincrt::Result<()> {
    let scheme = WeightScheme::parse(&args.scheme)?;
    let levels: Option<Vec<String>> = args
        .levels
        .map(|s| s.split(',').map(|l| l.trim().to_string()).collect());
    let file = fs::File::open(&args.data)?;
    let dataset = TrialDataset::from_csv(file, levels.as_deref())?;

    let scale = if args.log_scale {
        CiScale::LogForRatios
    } else {
        CiScale::Natural
    };
    let rule = df_rule(&args.df);
    let table = estimate_triple::<f64>(&dataset, &scheme)?;
    let results = jackknife_all(&dataset, &table, args.level, rule, scale)?;

    let exact = if args.rational {
        let exact_table = estimate_triple::<BigRational>(&dataset, &scheme)?;
        let summary = summarize(&exact_table.triple)?;
        Some((exact_table.triple, summary))
    } else {
        None
    };

    let mut rows = Vec::new();
    for (i, measure) in Measure::ALL.iter().enumerate() {
        let r = &results[i];
        let exact_estimate = exact.as_ref().map(|(_, summary)| match measure {
            Measure::WinRatio => ratio_string(&summary.win_ratio),
            Measure::WinOdds => ratio_string(&summary.win_odds),
            Measure::WinDifference => summary.win_difference.to_string(),
        });
        rows.push(AnalyzeRecord {
            estimand: measure.name(),
            scheme: scheme.name(),
            estimate: r.point_estimate,
            std_error: r.std_error,
            ci_lower: r.confidence_interval.0,
            ci_upper: r.confidence_interval.1,
            confidence_level: args.level,
            df_rule: rule.name(),
            ci_scale: r.scale.name(),
            clusters: dataset.num_clusters(),
            treated_clusters: dataset.treated_indices().len(),
            control_clusters: dataset.control_indices().len(),
            win: table.triple.win,
            loss: table.triple.loss,
            tie: table.triple.tie,
            exact_estimate,
        });
    }

    if records {
        for row in &rows {
            emit(row)?;
        }
        return Ok(());
    }

    println!(
        "scheme {}   clusters {} ({} treated, {} control)",
        scheme.name(),
        dataset.num_clusters(),
        dataset.treated_indices().len(),
        dataset.control_indices().len()
    );
    if let Some((triple, _)) = &exact {
        println!(
            "win {}   loss {}   tie {}",
            triple.win, triple.loss, triple.tie
        );
    } else {
        println!(
            "win {:.6}   loss {:.6}   tie {:.6}",
            table.triple.win, table.triple.loss, table.triple.tie
        );
    }
    println!(
        "{:<4} {:>10} {:>10} {:>22}   df rule {} (df {}), {}% CI, {} scale",
        "",
        "estimate",
        "SE",
        "CI",
        rule.name(),
        rule.degrees_of_freedom(dataset.num_clusters()),
        args.level * 100.0,
        scale.name()
    );
    for row in &rows {
        let ci = format!("[{:.4}, {:.4}]", row.ci_lower, row.ci_upper);
        print!(
            "{:<4} {:>10.4} {:>10.4} {:>22}",
            row.estimand, row.estimate, row.std_error, ci
        );
        match &row.exact_estimate {
            Some(exact) => println!("   = {exact}"),
            None => println!(),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EstimandRecord {
    estimand: &'static str,
    scheme: String,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    win: f64,
    loss: f64,
    tie: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_win: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_loss: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_tie: Option<String>,
    ics_class: &'static str,
}

fn cmd_estimand(args: EstimandArgs, records: bool) -> wincrt::Result<()> {
    let text = fs::read_to_string(&args.spec)?;
    let spec = SuperpopulationSpec::from_toml_str(&text)?;
    let ics = collapse_check(&spec)?;
    let schemes: Vec<WeightScheme> = match &args.scheme {
        Some(flag) => vec![WeightScheme::parse(flag)?],
        None => vec![WeightScheme::IndividualPair, WeightScheme::ClusterPair],
    };

    for scheme in &schemes {
        let estimate = estimands(&spec, scheme)?;
        let summary = estimate.summary_f64();
        if !records {
            println!(
                "scheme {}   ics {}",
                scheme.name(),
                ics.ics_class.describe()
            );
            if args.rational {
                println!(
                    "win {}   loss {}   tie {}",
                    estimate.triple.win, estimate.triple.loss, estimate.triple.tie
                );
            } else {
                println!(
                    "win {:.6}   loss {:.6}   tie {:.6}",
                    estimate.triple.win.to_f64(),
                    estimate.triple.loss.to_f64(),
                    estimate.triple.tie.to_f64()
                );
            }
        }
        for measure in Measure::ALL {
            let value = measure.of(&summary);
            let exact = args.rational.then(|| match measure {
                Measure::WinRatio => ratio_string(&estimate.summary.win_ratio),
                Measure::WinOdds => ratio_string(&estimate.summary.win_odds),
                Measure::WinDifference => estimate.summary.win_difference.to_string(),
            });
            if records {
                emit(&EstimandRecord {
                    estimand: measure.name(),
                    scheme: scheme.name(),
                    value,
                    exact,
                    win: estimate.triple.win.to_f64(),
                    loss: estimate.triple.loss.to_f64(),
                    tie: estimate.triple.tie.to_f64(),
                    exact_win: args.rational.then(|| estimate.triple.win.to_string()),
                    exact_loss: args.rational.then(|| estimate.triple.loss.to_string()),
                    exact_tie: args.rational.then(|| estimate.triple.tie.to_string()),
                    ics_class: ics.ics_class.describe(),
                })?;
            } else {
                match exact {
                    Some(exact) => println!("{:<4} {:>10.4}   = {}", measure.name(), value, exact),
                    None => println!("{:<4} {:>10.4}", measure.name(), value),
                }
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TruthRecord {
    estimand: &'static str,
    level: &'static str,
    value: f64,
    win: f64,
    loss: f64,
    tie: f64,
    nodes: usize,
    gamma: f64,
    gamma_link: &'static str,
    config_hash: String,
}

fn load_config(path: &PathBuf, gamma_link: &Option<String>) -> wincrt::Result<DgpConfig> {
    let text = fs::read_to_string(path)?;
    let mut config = DgpConfig::from_toml_str(&text)?;
    if let Some(link) = gamma_link {
        config.gamma_link = GammaLink::parse(link)?;
    }
    Ok(config)
}

fn cmd_truth(args: TruthArgs, records: bool) -> wincrt::Result<()> {
    let config = load_config(&args.config, &args.gamma_link)?;
    let report = true_estimands(&config, args.nodes)?;
    let hash = config.content_hash();
    for (level, value) in [
        ("individual", &report.individual),
        ("cluster", &report.cluster),
    ] {
        if !records {
            println!(
                "{level}: win {:.6}  loss {:.6}  tie {:.6}  (nodes {}, gamma {}, link {})",
                value.triple.win,
                value.triple.loss,
                value.triple.tie,
                report.nodes,
                report.gamma,
                report.gamma_link
            );
        }
        for measure in Measure::ALL {
            let v = measure.of(&value.summary);
            if records {
                emit(&TruthRecord {
                    estimand: measure.name(),
                    level,
                    value: v,
                    win: value.triple.win,
                    loss: value.triple.loss,
                    tie: value.triple.tie,
                    nodes: report.nodes,
                    gamma: report.gamma,
                    gamma_link: report.gamma_link,
                    config_hash: hash.clone(),
                })?;
            } else {
                println!("  {:<4} {:>10.4}", measure.name(), v);
            }
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, records: bool) -> wincrt::Result<()> {
    let mut config = load_config(&args.config, &args.gamma_link)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(replicates) = args.replicates {
        config.replicates = replicates;
    }
    let truth = true_estimands(&config, args.nodes)?;

    if args.consistency {
        let report = run_consistency(&config, args.clusters, &truth)?;
        if records {
            for row in &report.rows {
                emit(row)?;
            }
            emit(&report.meta)?;
            return Ok(());
        }
        println!(
            "consistency check: M = {}, seed {}, gamma {} ({}), config {}",
            report.meta.clusters,
            report.meta.seed,
            report.meta.gamma,
            report.meta.gamma_link,
            &report.meta.config_hash[..12]
        );
        println!(
            "{:<12} {:<4} {:>10} {:>10} {:>10}",
            "level", "", "truth", "estimate", "rel bias %"
        );
        for row in &report.rows {
            println!(
                "{:<12} {:<4} {:>10.4} {:>10.4} {:>10.3}",
                row.level.name(),
                row.estimand,
                row.truth,
                row.estimate,
                row.relative_bias_pct
            );
        }
        return Ok(());
    }

    let options = StudyOptions {
        level: args.level,
        df_rule: df_rule(&args.df),
        ci_scale: if args.log_scale {
            CiScale::LogForRatios
        } else {
            CiScale::Natural
        },
    };
    let report = run_study(&config, &truth, options)?;
    if records {
        for row in &report.rows {
            emit(row)?;
        }
        emit(&report.meta)?;
        return Ok(());
    }
    println!(
        "simulation: {} replicates, M = {}, seed {}, gamma {} ({}), {}% CI ({} df, {} scale), config {}",
        report.meta.replicates,
        report.meta.clusters,
        report.meta.seed,
        report.meta.gamma,
        report.meta.gamma_link,
        report.meta.confidence_level * 100.0,
        report.meta.df_rule,
        report.meta.ci_scale,
        &report.meta.config_hash[..12]
    );
    println!(
        "{:<12} {:<4} {:>9} {:>9} {:>10} {:>9} {:>9} {:>9} {:>6} {:>5}",
        "level", "", "truth", "mean", "rel bias %", "emp SE", "jk SE", "coverage", "used", "excl"
    );
    for row in &report.rows {
        println!(
            "{:<12} {:<4} {:>9.4} {:>9.4} {:>10.3} {:>9.4} {:>9.4} {:>9.3} {:>6} {:>5}",
            row.level.name(),
            row.estimand,
            row.truth,
            row.mean_estimate,
            row.relative_bias_pct,
            row.empirical_se,
            row.mean_jackknife_se,
            row.coverage,
            row.replicates_used,
            row.excluded
        );
    }
    Ok(())
}
