//! Weighted aggregation of per-cluster-pair win fractions into the
//! individual-pair, cluster-pair, and general weighted win probability
//! estimators, plus their WR/WO/WD summaries.

use crate::data_model::{Measure, TrialDataset, WeightScheme, WinSummary, WinTriple};
use crate::error::{Error, Result};
use crate::numeric::WinScalar;
use crate::pair_engine::{fast_counts, pair_fractions};
use crate::parallel::map_indexed;

/// One treated-control cluster pair's weight and win fractions. Retained so
/// the jackknife can delete a cluster without re-scanning outcome vectors.
#[derive(Debug, Clone)]
pub struct PairContribution<S: WinScalar> {
    /// Index of the treated cluster in the dataset's cluster list.
    pub treated_idx: usize,
    /// Index of the control cluster in the dataset's cluster list.
    pub control_idx: usize,
    pub weight: S,
    pub fractions: WinTriple<S>,
    pub treated_size: u64,
    pub control_size: u64,
}

/// Aggregated estimate plus the contribution table it was built from.
#[derive(Debug, Clone)]
pub struct EstimateTable<S: WinScalar> {
    pub triple: WinTriple<S>,
    pub contributions: Vec<PairContribution<S>>,
    /// Number of clusters M in the source dataset.
    pub num_clusters: usize,
}

/// Compute τ̂_{win,ω} = Σ ω_ij·frac_win(i,j) / Σ ω_ij (and loss/tie
/// analogues) over all treated × control cluster pairs.
///
/// Pairs are evaluated concurrently; the reduction runs in a fixed
/// treated-major order so float results are identical across thread counts.
pub fn estimate_triple<S: WinScalar>(
    dataset: &TrialDataset,
    scheme: &WeightScheme,
) -> Result<EstimateTable<S>> {
    let treated = dataset.treated_indices();
    let control = dataset.control_indices();
    let num_levels = dataset.scale().num_levels();
    let n_pairs = treated.len() * control.len();

    let contributions: Vec<Result<PairContribution<S>>> = map_indexed(n_pairs, |flat| {
        let ti = treated[flat / control.len()];
        let cj = control[flat % control.len()];
        pair_contribution(dataset, scheme, ti, cj, num_levels)
    });
    let contributions: Vec<PairContribution<S>> =
        contributions.into_iter().collect::<Result<_>>()?;

    let triple = aggregate(&contributions)?;
    Ok(EstimateTable {
        triple,
        contributions,
        num_clusters: dataset.num_clusters(),
    })
}

fn pair_contribution<S: WinScalar>(
    dataset: &TrialDataset,
    scheme: &WeightScheme,
    treated_idx: usize,
    control_idx: usize,
    num_levels: usize,
) -> Result<PairContribution<S>> {
    let t = &dataset.clusters()[treated_idx];
    let c = &dataset.clusters()[control_idx];
    let counts = fast_counts(&t.outcomes, &c.outcomes, num_levels);
    let weight = S::from_big_rational(&scheme.weight(t.size(), c.size())?);
    Ok(PairContribution {
        treated_idx,
        control_idx,
        weight,
        fractions: pair_fractions(&counts),
        treated_size: t.size(),
        control_size: c.size(),
    })
}

/// Weighted mean of the contribution fractions, in contribution order.
pub fn aggregate<S: WinScalar>(contributions: &[PairContribution<S>]) -> Result<WinTriple<S>> {
    if contributions.is_empty() {
        return Err(Error::EmptyArm("treated or control"));
    }
    let weight_sum = S::sum(contributions.iter().map(|c| c.weight.clone()));
    let win = S::sum(
        contributions
            .iter()
            .map(|c| c.weight.clone() * c.fractions.win.clone()),
    );
    let loss = S::sum(
        contributions
            .iter()
            .map(|c| c.weight.clone() * c.fractions.loss.clone()),
    );
    let tie = S::sum(
        contributions
            .iter()
            .map(|c| c.weight.clone() * c.fractions.tie.clone()),
    );
    Ok(WinTriple::new(
        win / weight_sum.clone(),
        loss / weight_sum.clone(),
        tie / weight_sum,
    ))
}

/// Estimate and summarize in one step.
pub fn estimate_summary<S: WinScalar>(
    dataset: &TrialDataset,
    scheme: &WeightScheme,
) -> Result<(WinSummary<S>, WinTriple<S>)> {
    let table = estimate_triple::<S>(dataset, scheme)?;
    let summary = crate::data_model::summarize(&table.triple)?;
    Ok((summary, table.triple))
}

/// Streaming variant that never materializes the contribution table. Used
/// for very large M where only the point estimate is needed.
pub fn estimate_triple_streaming(
    dataset: &TrialDataset,
    scheme: &WeightScheme,
) -> Result<WinTriple<f64>> {
    let treated = dataset.treated_indices();
    let control = dataset.control_indices();
    let num_levels = dataset.scale().num_levels();

    // One partial reduction per treated cluster, merged in fixed order.
    let partials: Vec<Result<[f64; 4]>> = map_indexed(treated.len(), |i| {
        let t = &dataset.clusters()[treated[i]];
        let mut acc = [0.0f64; 4]; // w*win, w*loss, w*tie, w
        for &cj in control {
            let c = &dataset.clusters()[cj];
            let counts = fast_counts(&t.outcomes, &c.outcomes, num_levels);
            let w = crate::numeric::big_rational_to_f64(&scheme.weight(t.size(), c.size())?);
            let n = counts.n_pairs() as f64;
            acc[0] += w * counts.wins as f64 / n;
            acc[1] += w * counts.losses as f64 / n;
            acc[2] += w * counts.ties as f64 / n;
            acc[3] += w;
        }
        Ok(acc)
    });
    let mut total = [0.0f64; 4];
    for partial in partials {
        let partial = partial?;
        for (t, p) in total.iter_mut().zip(partial) {
            *t += p;
        }
    }
    Ok(WinTriple::new(
        total[0] / total[3],
        total[1] / total[3],
        total[2] / total[3],
    ))
}

/// All three summary measures as f64, with the triple.
pub fn estimate_measures(
    dataset: &TrialDataset,
    scheme: &WeightScheme,
) -> Result<[(Measure, f64); 3]> {
    let (summary, _) = estimate_summary::<f64>(dataset, scheme)?;
    Ok(Measure::ALL.map(|m| (m, m.of(&summary))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::{Arm, ClusterRecord, OrdinalScale, RatioValue};
    use approx::assert_abs_diff_eq;
    use num_rational::BigRational;

    fn dataset(clusters: Vec<(&str, Arm, Vec<u32>)>) -> TrialDataset {
        let scale = OrdinalScale::new(["C", "B", "A"]).unwrap();
        TrialDataset::new(
            scale,
            clusters
                .into_iter()
                .map(|(id, arm, outcomes)| ClusterRecord::new(id, arm, outcomes))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn equal_sizes_make_schemes_agree() {
        let ds = dataset(vec![
            ("t1", Arm::Treated, vec![2, 1]),
            ("t2", Arm::Treated, vec![0, 0]),
            ("c1", Arm::Control, vec![1, 2]),
            ("c2", Arm::Control, vec![0, 1]),
        ]);
        let ind = estimate_triple::<BigRational>(&ds, &WeightScheme::IndividualPair).unwrap();
        let clus = estimate_triple::<BigRational>(&ds, &WeightScheme::ClusterPair).unwrap();
        assert_eq!(ind.triple, clus.triple);
    }

    #[test]
    fn individual_pair_equals_pooled_counts() {
        let ds = dataset(vec![
            ("t1", Arm::Treated, vec![2, 2, 1]),
            ("t2", Arm::Treated, vec![0]),
            ("c1", Arm::Control, vec![1, 0]),
            ("c2", Arm::Control, vec![2, 1, 1, 0]),
        ]);
        let table = estimate_triple::<BigRational>(&ds, &WeightScheme::IndividualPair).unwrap();
        // Pooled double-sum form: concatenate arms and count directly.
        let t_all: Vec<u32> = vec![2, 2, 1, 0];
        let c_all: Vec<u32> = vec![1, 0, 2, 1, 1, 0];
        let counts = crate::pair_engine::brute_force_counts(&t_all, &c_all);
        let pooled: WinTriple<BigRational> = crate::pair_engine::pair_fractions(&counts);
        assert_eq!(table.triple, pooled);
    }

    #[test]
    fn custom_product_weights_match_individual_pair_exactly() {
        let ds = dataset(vec![
            ("t1", Arm::Treated, vec![2, 1, 1]),
            ("c1", Arm::Control, vec![0]),
            ("c2", Arm::Control, vec![2, 1]),
        ]);
        let ind = estimate_triple::<BigRational>(&ds, &WeightScheme::IndividualPair).unwrap();
        let custom =
            estimate_triple::<BigRational>(&ds, &WeightScheme::parse("custom:ni*nj").unwrap())
                .unwrap();
        assert_eq!(ind.triple, custom.triple);
    }

    #[test]
    fn arm_swap_antisymmetry() {
        let ds = dataset(vec![
            ("t1", Arm::Treated, vec![2, 1]),
            ("t2", Arm::Treated, vec![0, 2]),
            ("c1", Arm::Control, vec![1]),
            ("c2", Arm::Control, vec![0, 1, 2]),
        ]);
        for scheme in [WeightScheme::IndividualPair, WeightScheme::ClusterPair] {
            let fwd = estimate_triple::<BigRational>(&ds, &scheme).unwrap().triple;
            let rev = estimate_triple::<BigRational>(&ds.swap_arms(), &scheme)
                .unwrap()
                .triple;
            assert_eq!(fwd.win, rev.loss);
            assert_eq!(fwd.loss, rev.win);
            assert_eq!(fwd.tie, rev.tie);
        }
    }

    #[test]
    fn dominance_singleton_gives_infinite_wr() {
        let ds = dataset(vec![
            ("t1", Arm::Treated, vec![1]),
            ("c1", Arm::Control, vec![0]),
        ]);
        let (summary, triple) =
            estimate_summary::<f64>(&ds, &WeightScheme::IndividualPair).unwrap();
        assert_abs_diff_eq!(triple.win, 1.0);
        assert!(matches!(summary.win_ratio, RatioValue::PositiveInfinity));
    }

    #[test]
    fn streaming_matches_table_path() {
        let ds = dataset(vec![
            ("t1", Arm::Treated, vec![2, 2, 1, 0]),
            ("t2", Arm::Treated, vec![1, 1]),
            ("c1", Arm::Control, vec![1, 0, 0]),
            ("c2", Arm::Control, vec![2]),
        ]);
        for scheme in [WeightScheme::IndividualPair, WeightScheme::ClusterPair] {
            let table = estimate_triple::<f64>(&ds, &scheme).unwrap().triple;
            let streamed = estimate_triple_streaming(&ds, &scheme).unwrap();
            assert_abs_diff_eq!(table.win, streamed.win, epsilon = 1e-14);
            assert_abs_diff_eq!(table.loss, streamed.loss, epsilon = 1e-14);
            assert_abs_diff_eq!(table.tie, streamed.tie, epsilon = 1e-14);
        }
    }
}
