//! Monte Carlo simulation harness: repeated trial generation, estimation,
//! and jackknife inference, aggregated into relative-bias and coverage
//! summaries against quadrature truths. Replicates run concurrently;
//! aggregation order is fixed so reports are identical across thread counts.

use crate::data_model::{Measure, WeightScheme};
use crate::dgp::{generate_trial, DgpConfig};
use crate::error::Result;
use crate::jackknife::{jackknife_all, CiScale, DfRule};
use crate::truth_quadrature::{TruthReport, TruthValue};
use crate::win_estimators::{estimate_triple, estimate_triple_streaming};
use serde::Serialize;

/// Which weighting level a result row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SchemeLevel {
    #[serde(rename = "individual")]
    Individual,
    #[serde(rename = "cluster")]
    Cluster,
}

impl SchemeLevel {
    pub const BOTH: [SchemeLevel; 2] = [SchemeLevel::Individual, SchemeLevel::Cluster];

    pub fn name(self) -> &'static str {
        match self {
            SchemeLevel::Individual => "individual",
            SchemeLevel::Cluster => "cluster",
        }
    }

    pub fn scheme(self) -> WeightScheme {
        match self {
            SchemeLevel::Individual => WeightScheme::IndividualPair,
            SchemeLevel::Cluster => WeightScheme::ClusterPair,
        }
    }

    pub fn truth_value(self, report: &TruthReport) -> &TruthValue {
        match self {
            SchemeLevel::Individual => &report.individual,
            SchemeLevel::Cluster => &report.cluster,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StudyOptions {
    pub level: f64,
    pub df_rule: DfRule,
    pub ci_scale: CiScale,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            level: 0.95,
            df_rule: DfRule::MMinus2,
            ci_scale: CiScale::Natural,
        }
    }
}

/// Aggregate over replicates for one estimand at one level.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioRow {
    pub estimand: &'static str,
    pub level: SchemeLevel,
    pub truth: f64,
    pub mean_estimate: f64,
    pub relative_bias_pct: f64,
    pub empirical_se: f64,
    pub mean_jackknife_se: f64,
    pub coverage: f64,
    /// Binomial Monte Carlo standard error of the coverage estimate.
    pub coverage_mc_se: f64,
    pub replicates_used: usize,
    pub excluded: usize,
}

/// Reproducibility metadata embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub replicates: usize,
    pub clusters: usize,
    pub gamma: f64,
    pub gamma_link: &'static str,
    pub confidence_level: f64,
    pub df_rule: &'static str,
    pub ci_scale: &'static str,
    pub config_hash: String,
    pub software_version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub meta: ReportMeta,
    pub rows: Vec<ScenarioRow>,
}

/// Per-replicate raw outcome for one (level, measure) cell.
#[derive(Debug, Clone, Copy)]
struct CellOutcome {
    estimate: f64,
    jackknife_se: f64,
    covered: bool,
}

pub fn run_study(
    config: &DgpConfig,
    truth: &TruthReport,
    options: StudyOptions,
) -> Result<SimReport> {
    config.validate()?;
    let replicates = config.replicates;

    // 2 levels x 3 measures per replicate; None marks an excluded cell.
    type ReplicateCells = [[Option<CellOutcome>; 3]; 2];
    let per_replicate: Vec<ReplicateCells> = crate::parallel::map_indexed(replicates, |rep| {
        let mut cells: ReplicateCells = [[None; 3]; 2];
        let trial = match generate_trial(config, rep as u64) {
            Ok(trial) => trial,
            Err(_) => return cells, // single-arm draw: replicate excluded
        };
        for (level_idx, level) in SchemeLevel::BOTH.iter().enumerate() {
            let table = match estimate_triple::<f64>(&trial.dataset, &level.scheme()) {
                Ok(table) => table,
                Err(_) => continue,
            };
            let results = match jackknife_all(
                &trial.dataset,
                &table,
                options.level,
                options.df_rule,
                options.ci_scale,
            ) {
                Ok(results) => results,
                Err(_) => continue,
            };
            let truths = level.truth_value(truth);
            for (measure_idx, result) in results.iter().enumerate() {
                let true_value = match measure_idx {
                    0 => truths.summary.win_ratio.to_f64(),
                    1 => truths.summary.win_odds.to_f64(),
                    _ => truths.summary.win_difference,
                };
                let usable = result.point_estimate.is_finite()
                    && result.non_finite_replicates == 0
                    && result.std_error.is_finite();
                if usable {
                    cells[level_idx][measure_idx] = Some(CellOutcome {
                        estimate: result.point_estimate,
                        jackknife_se: result.std_error,
                        covered: result.confidence_interval.0 <= true_value
                            && true_value <= result.confidence_interval.1,
                    });
                }
            }
        }
        cells
    });

    let mut rows = Vec::with_capacity(6);
    for (level_idx, level) in SchemeLevel::BOTH.iter().enumerate() {
        let truths = level.truth_value(truth);
        for (measure_idx, measure) in Measure::ALL.iter().enumerate() {
            let truth_value = match measure_idx {
                0 => truths.summary.win_ratio.to_f64(),
                1 => truths.summary.win_odds.to_f64(),
                _ => truths.summary.win_difference,
            };
            let outcomes: Vec<CellOutcome> = per_replicate
                .iter()
                .filter_map(|cells| cells[level_idx][measure_idx])
                .collect();
            let used = outcomes.len();
            let n = used as f64;
            let mean = outcomes.iter().map(|o| o.estimate).sum::<f64>() / n;
            let empirical_se = if used > 1 {
                (outcomes
                    .iter()
                    .map(|o| (o.estimate - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0))
                    .sqrt()
            } else {
                f64::NAN
            };
            let coverage = outcomes.iter().filter(|o| o.covered).count() as f64 / n;
            rows.push(ScenarioRow {
                estimand: measure.name(),
                level: *level,
                truth: truth_value,
                mean_estimate: mean,
                relative_bias_pct: 100.0 * (mean - truth_value) / truth_value,
                empirical_se,
                mean_jackknife_se: outcomes.iter().map(|o| o.jackknife_se).sum::<f64>() / n,
                coverage,
                coverage_mc_se: (coverage * (1.0 - coverage) / n).sqrt(),
                replicates_used: used,
                excluded: replicates - used,
            });
        }
    }

    Ok(SimReport {
        meta: ReportMeta {
            seed: config.seed,
            replicates,
            clusters: config.clusters,
            gamma: config.gamma,
            gamma_link: config.gamma_link.name(),
            confidence_level: options.level,
            df_rule: options.df_rule.name(),
            ci_scale: options.ci_scale.name(),
            config_hash: config.content_hash(),
            software_version: env!("CARGO_PKG_VERSION"),
        },
        rows,
    })
}

/// Single-replicate relative-bias table at a (usually large) cluster count,
/// without jackknife inference.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyRow {
    pub estimand: &'static str,
    pub level: SchemeLevel,
    pub truth: f64,
    pub estimate: f64,
    pub relative_bias_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub meta: ReportMeta,
    pub rows: Vec<ConsistencyRow>,
}

pub fn run_consistency(
    config: &DgpConfig,
    clusters: usize,
    truth: &TruthReport,
) -> Result<ConsistencyReport> {
    let mut config = config.clone();
    config.clusters = clusters;
    config.validate()?;
    let trial = generate_trial(&config, 0)?;

    let mut rows = Vec::with_capacity(6);
    for level in SchemeLevel::BOTH {
        let triple = estimate_triple_streaming(&trial.dataset, &level.scheme())?;
        let summary = crate::data_model::summarize(&triple)?;
        let truths = level.truth_value(truth);
        for measure in Measure::ALL {
            let estimate = measure.of(&summary);
            let truth_value = measure.of(&truths.summary);
            rows.push(ConsistencyRow {
                estimand: measure.name(),
                level,
                truth: truth_value,
                estimate,
                relative_bias_pct: 100.0 * (estimate - truth_value) / truth_value,
            });
        }
    }
    Ok(ConsistencyReport {
        meta: ReportMeta {
            seed: config.seed,
            replicates: 1,
            clusters,
            gamma: config.gamma,
            gamma_link: config.gamma_link.name(),
            confidence_level: f64::NAN,
            df_rule: "-",
            ci_scale: "-",
            config_hash: config.content_hash(),
            software_version: env!("CARGO_PKG_VERSION"),
        },
        rows,
    })
}
