//! Leave-one-cluster-out jackknife variance estimation with t-based
//! confidence intervals. Deleting cluster i removes every treated-control
//! pair contribution touching i; per-cluster partial sums make each deletion
//! O(1) after one pass over the contribution table.

use crate::data_model::{summarize, Measure, TrialDataset, WeightScheme, WinTriple};
use crate::error::{Error, Result};
use crate::numeric::WinScalar;
use crate::win_estimators::{estimate_triple, EstimateTable, PairContribution};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::HashMap;

/// Degrees-of-freedom rule for the t reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfRule {
    /// M − 2: more conservative with few clusters. The default.
    MMinus2,
    /// M − 1: suggested by related weighted-estimand work.
    MMinus1,
}

impl DfRule {
    pub fn name(self) -> &'static str {
        match self {
            DfRule::MMinus2 => "m-2",
            DfRule::MMinus1 => "m-1",
        }
    }

    pub fn degrees_of_freedom(self, num_clusters: usize) -> f64 {
        match self {
            DfRule::MMinus2 => num_clusters as f64 - 2.0,
            DfRule::MMinus1 => num_clusters as f64 - 1.0,
        }
    }

    fn min_clusters(self) -> usize {
        match self {
            DfRule::MMinus2 => 3,
            DfRule::MMinus1 => 2,
        }
    }
}

/// Scale on which the confidence interval is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiScale {
    /// Jackknife the estimate itself (the displayed-formula default).
    Natural,
    /// Jackknife log(WE) for WR/WO and back-transform the interval bounds.
    LogForRatios,
}

impl CiScale {
    pub fn name(self) -> &'static str {
        match self {
            CiScale::Natural => "natural",
            CiScale::LogForRatios => "log",
        }
    }
}

#[derive(Debug, Clone)]
pub struct JackknifeResult {
    pub point_estimate: f64,
    pub leave_one_out: Vec<f64>,
    pub variance: f64,
    pub std_error: f64,
    pub df_rule: DfRule,
    pub degrees_of_freedom: f64,
    pub level: f64,
    pub confidence_interval: (f64, f64),
    pub scale: CiScale,
    /// Count of leave-one-out replicates with an infinite or undefined
    /// estimate. When nonzero, variance and interval are NaN and callers
    /// should switch to the log-free WO path or exclude the replicate.
    pub non_finite_replicates: usize,
}

/// Per-cluster partial sums of the weighted contribution table, enabling
/// O(1) single-cluster deletion.
#[derive(Debug, Clone)]
pub struct DeletionIndex<S: WinScalar> {
    total: [S; 4], // weighted win, loss, tie, weight sum
    per_cluster: HashMap<usize, [S; 4]>,
    treated: Vec<usize>,
    control: Vec<usize>,
}

impl<S: WinScalar> DeletionIndex<S> {
    pub fn build(contributions: &[PairContribution<S>]) -> Self {
        let mut per_cluster: HashMap<usize, [S; 4]> = HashMap::new();
        let mut treated: Vec<usize> = Vec::new();
        let mut control: Vec<usize> = Vec::new();
        let zero = || [S::zero(), S::zero(), S::zero(), S::zero()];
        let mut total = zero();
        for contribution in contributions {
            let parts = [
                contribution.weight.clone() * contribution.fractions.win.clone(),
                contribution.weight.clone() * contribution.fractions.loss.clone(),
                contribution.weight.clone() * contribution.fractions.tie.clone(),
                contribution.weight.clone(),
            ];
            for (t, p) in total.iter_mut().zip(parts.iter()) {
                *t = t.clone() + p.clone();
            }
            for (role, idx) in [
                (&mut treated, contribution.treated_idx),
                (&mut control, contribution.control_idx),
            ] {
                if !role.contains(&idx) {
                    role.push(idx);
                }
                let entry = per_cluster.entry(idx).or_insert_with(zero);
                for (e, p) in entry.iter_mut().zip(parts.iter()) {
                    *e = e.clone() + p.clone();
                }
            }
        }
        Self {
            total,
            per_cluster,
            treated,
            control,
        }
    }

    /// Triple after removing every contribution touching `cluster_idx`.
    /// Exact in rational mode; within float rounding otherwise.
    pub fn delete(&self, cluster_idx: usize) -> Result<WinTriple<S>> {
        let row = self
            .per_cluster
            .get(&cluster_idx)
            .ok_or_else(|| Error::UnknownCluster(format!("index {cluster_idx}")))?;
        let arm_members = if self.treated.contains(&cluster_idx) {
            (&self.treated, "treated")
        } else {
            (&self.control, "control")
        };
        if arm_members.0.len() == 1 {
            return Err(Error::DegenerateDeletion {
                cluster_id: format!("index {cluster_idx}"),
                arm: arm_members.1,
            });
        }
        let weight = self.total[3].clone() - row[3].clone();
        Ok(WinTriple::new(
            (self.total[0].clone() - row[0].clone()) / weight.clone(),
            (self.total[1].clone() - row[1].clone()) / weight.clone(),
            (self.total[2].clone() - row[2].clone()) / weight,
        ))
    }
}

/// Re-aggregate a contribution table with one cluster deleted. Equivalent to
/// rebuilding the estimator on the reduced dataset.
pub fn incremental_delete<S: WinScalar>(
    contributions: &[PairContribution<S>],
    cluster_idx: usize,
) -> Result<WinTriple<S>> {
    DeletionIndex::build(contributions).delete(cluster_idx)
}

/// Full jackknife for one summary measure under one weight scheme.
pub fn jackknife<S: WinScalar>(
    dataset: &TrialDataset,
    scheme: &WeightScheme,
    measure: Measure,
    level: f64,
    df_rule: DfRule,
    scale: CiScale,
) -> Result<JackknifeResult> {
    let table = estimate_triple::<S>(dataset, scheme)?;
    jackknife_from_table(dataset, &table, measure, level, df_rule, scale)
}

/// Jackknife reusing an existing contribution table (for callers computing
/// several measures from one estimation pass).
pub fn jackknife_from_table<S: WinScalar>(
    dataset: &TrialDataset,
    table: &EstimateTable<S>,
    measure: Measure,
    level: f64,
    df_rule: DfRule,
    scale: CiScale,
) -> Result<JackknifeResult> {
    let index = DeletionIndex::build(&table.contributions);
    jackknife_with_index(dataset, table, &index, measure, level, df_rule, scale)
}

#[allow(clippy::too_many_arguments)]
fn jackknife_with_index<S: WinScalar>(
    dataset: &TrialDataset,
    table: &EstimateTable<S>,
    index: &DeletionIndex<S>,
    measure: Measure,
    level: f64,
    df_rule: DfRule,
    scale: CiScale,
) -> Result<JackknifeResult> {
    let m = dataset.num_clusters();
    if m < df_rule.min_clusters() {
        return Err(Error::InsufficientClusters {
            required: df_rule.min_clusters(),
            got: m,
            df_rule: df_rule.name(),
        });
    }
    if dataset.treated_indices().len() < 2 {
        return Err(Error::DegenerateDeletion {
            cluster_id: dataset.clusters()[dataset.treated_indices()[0]].id.clone(),
            arm: "treated",
        });
    }
    if dataset.control_indices().len() < 2 {
        return Err(Error::DegenerateDeletion {
            cluster_id: dataset.clusters()[dataset.control_indices()[0]].id.clone(),
            arm: "control",
        });
    }
    if scale == CiScale::LogForRatios && measure == Measure::WinDifference {
        return Err(Error::InvalidConfig(
            "log-scale intervals apply to WR and WO only".into(),
        ));
    }

    let point = measure.of(&summarize(&table.triple)?);
    let leave_one_out: Vec<f64> = crate::parallel::map_indexed(m, |i| {
        let triple = index.delete(i).expect("arms stay nonempty after deletion");
        match summarize(&triple) {
            Ok(summary) => measure.of(&summary),
            Err(_) => f64::NAN, // all-tie replicate: WR undefined
        }
    });

    let transform = |v: f64| -> f64 {
        match scale {
            CiScale::Natural => v,
            CiScale::LogForRatios => v.ln(),
        }
    };
    let point_scaled = transform(point);
    let replicates_scaled: Vec<f64> = leave_one_out.iter().map(|&v| transform(v)).collect();
    let non_finite = replicates_scaled.iter().filter(|v| !v.is_finite()).count()
        + usize::from(!point_scaled.is_finite());

    let (variance, std_error, ci) = if non_finite > 0 {
        (f64::NAN, f64::NAN, (f64::NAN, f64::NAN))
    } else {
        let m_f = m as f64;
        let ss: f64 = replicates_scaled
            .iter()
            .map(|v| (v - point_scaled).powi(2))
            .sum();
        let variance = (m_f - 1.0) / m_f * ss;
        let std_error = variance.sqrt();
        let df = df_rule.degrees_of_freedom(m);
        let t = StudentsT::new(0.0, 1.0, df)
            .expect("valid t distribution")
            .inverse_cdf(1.0 - (1.0 - level) / 2.0);
        let (lo, hi) = (point_scaled - t * std_error, point_scaled + t * std_error);
        let ci = match scale {
            CiScale::Natural => (lo, hi),
            CiScale::LogForRatios => (lo.exp(), hi.exp()),
        };
        (variance, std_error, ci)
    };

    Ok(JackknifeResult {
        point_estimate: point,
        leave_one_out,
        variance,
        std_error,
        df_rule,
        degrees_of_freedom: df_rule.degrees_of_freedom(m),
        level,
        confidence_interval: ci,
        scale,
        non_finite_replicates: non_finite,
    })
}

/// Jackknife all three summary measures from one contribution table,
/// sharing the deletion pass. WD always uses the natural scale; `scale`
/// applies to WR and WO.
pub fn jackknife_all<S: WinScalar>(
    dataset: &TrialDataset,
    table: &EstimateTable<S>,
    level: f64,
    df_rule: DfRule,
    scale: CiScale,
) -> Result<[JackknifeResult; 3]> {
    let index = DeletionIndex::build(&table.contributions);
    Ok([
        jackknife_with_index(
            dataset,
            table,
            &index,
            Measure::WinRatio,
            level,
            df_rule,
            scale,
        )?,
        jackknife_with_index(
            dataset,
            table,
            &index,
            Measure::WinOdds,
            level,
            df_rule,
            scale,
        )?,
        jackknife_with_index(
            dataset,
            table,
            &index,
            Measure::WinDifference,
            level,
            df_rule,
            CiScale::Natural,
        )?,
    ])
}

/// Two-sided t quantile used for the interval half-width.
pub fn t_quantile(df: f64, level: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .expect("valid t distribution")
        .inverse_cdf(1.0 - (1.0 - level) / 2.0)
}
