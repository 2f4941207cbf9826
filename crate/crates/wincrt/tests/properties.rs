//! Cross-module properties that exercise estimator, jackknife, and weight
//! schemes together on randomized datasets.

use num_rational::BigRational;
use proptest::prelude::*;
use wincrt::data_model::{Arm, ClusterRecord, OrdinalScale, RatioValue, WeightExpr};
use wincrt::jackknife::{jackknife, CiScale, DfRule};
use wincrt::numeric::big_rational_to_f64;
use wincrt::win_estimators::estimate_triple;
use wincrt::{summarize, Measure, TrialDataset, WeightScheme};

fn dataset_strategy() -> impl Strategy<Value = TrialDataset> {
    (2..=4usize, 2..=4usize, 2..=4usize).prop_flat_map(|(d, treated, control)| {
        let cluster = prop::collection::vec(0..d as u32, 1..=6);
        (
            prop::collection::vec(cluster.clone(), treated),
            prop::collection::vec(cluster, control),
        )
            .prop_map(move |(t, c)| {
                let mut clusters = Vec::new();
                for (i, outcomes) in t.into_iter().enumerate() {
                    clusters.push(ClusterRecord::new(format!("t{i}"), Arm::Treated, outcomes));
                }
                for (i, outcomes) in c.into_iter().enumerate() {
                    clusters.push(ClusterRecord::new(format!("c{i}"), Arm::Control, outcomes));
                }
                TrialDataset::new(OrdinalScale::numeric(d).unwrap(), clusters).unwrap()
            })
    })
}

fn scheme_strategy() -> impl Strategy<Value = WeightScheme> {
    prop_oneof![
        Just(WeightScheme::IndividualPair),
        Just(WeightScheme::ClusterPair),
        Just(WeightScheme::Custom(
            WeightExpr::parse("(ni+nj)/2").unwrap()
        )),
        Just(WeightScheme::Custom(WeightExpr::parse("ni*nj+1").unwrap())),
    ]
}

proptest! {
    #[test]
    fn win_odds_identity_holds(ds in dataset_strategy(), scheme in scheme_strategy()) {
        let table = estimate_triple::<f64>(&ds, &scheme).unwrap();
        if let Ok(summary) = summarize(&table.triple) {
            if let RatioValue::Finite(wo) = summary.win_odds {
                let wd = summary.win_difference;
                prop_assert!((wo - (1.0 + wd) / (1.0 - wd)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cluster_order_is_irrelevant(ds in dataset_strategy(), scheme in scheme_strategy()) {
        let reversed = TrialDataset::new(
            ds.scale().clone(),
            ds.clusters().iter().rev().cloned().collect(),
        )
        .unwrap();
        let a = estimate_triple::<BigRational>(&ds, &scheme).unwrap();
        let b = estimate_triple::<BigRational>(&reversed, &scheme).unwrap();
        prop_assert_eq!(a.triple, b.triple);
    }

    #[test]
    fn weighted_estimate_is_a_convex_combination(
        ds in dataset_strategy(),
        scheme in scheme_strategy(),
    ) {
        // The weighted win probability is a weighted mean of per-pair win
        // fractions, so it must lie inside their range.
        let table = estimate_triple::<BigRational>(&ds, &scheme).unwrap();
        let fractions: Vec<f64> = table
            .contributions
            .iter()
            .map(|c| big_rational_to_f64(&c.fractions.win))
            .collect();
        let min = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = fractions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let win = big_rational_to_f64(&table.triple.win);
        prop_assert!(win >= min - 1e-12 && win <= max + 1e-12);
    }

    #[test]
    fn swap_inverts_summaries(ds in dataset_strategy(), scheme in scheme_strategy()) {
        let original = estimate_triple::<f64>(&ds, &scheme).unwrap();
        let swapped = estimate_triple::<f64>(&ds.swap_arms(), &scheme).unwrap();
        if let (Ok(a), Ok(b)) = (summarize(&original.triple), summarize(&swapped.triple)) {
            prop_assert!((a.win_difference + b.win_difference).abs() < 1e-12);
            if let (RatioValue::Finite(wr_a), RatioValue::Finite(wr_b)) =
                (&a.win_ratio, &b.win_ratio)
            {
                if *wr_a > 0.0 && *wr_b > 0.0 {
                    prop_assert!((wr_a * wr_b - 1.0).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn jackknife_variance_is_nonnegative(ds in dataset_strategy()) {
        let result = jackknife::<f64>(
            &ds,
            &WeightScheme::ClusterPair,
            Measure::WinDifference,
            0.95,
            DfRule::MMinus2,
            CiScale::Natural,
        );
        if let Ok(result) = result {
            prop_assert_eq!(result.leave_one_out.len(), ds.num_clusters());
            if result.non_finite_replicates == 0 {
                prop_assert!(result.variance >= 0.0);
                prop_assert!(result.confidence_interval.0 <= result.point_estimate + 1e-12);
                prop_assert!(result.confidence_interval.1 >= result.point_estimate - 1e-12);
            }
        }
    }
}
