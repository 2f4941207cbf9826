//! Latent proportional-odds data generator with cluster types, Normal
//! random intercepts, and type-dependent sizes. Every random draw comes
//! from a per-(replicate, cluster) counter-based stream, so generated data
//! are identical regardless of parallel scheduling.

use crate::data_model::{Arm, ClusterRecord, OrdinalScale, Rank, TrialDataset};
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// How the latent intercept feeds into cluster size when γ ≠ 0.
///
/// Only the strength parameter γ is standard; the functional form is a
/// declared, swappable mechanism recorded in every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GammaLink {
    /// Draw the base size uniformly from the type's range, then scale it by
    /// exp(γ·α) and round, flooring at 1.
    #[default]
    #[serde(rename = "mean-scaled")]
    MeanScaled,
}

impl GammaLink {
    pub fn name(self) -> &'static str {
        match self {
            GammaLink::MeanScaled => "mean-scaled",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "mean-scaled" => Ok(GammaLink::MeanScaled),
            other => Err(Error::InvalidConfig(format!(
                "unknown gamma link {other:?} (available: mean-scaled)"
            ))),
        }
    }

    /// Realized size from a base draw and the cluster's intercept.
    pub fn apply(self, base: u64, gamma: f64, alpha: f64) -> u64 {
        match self {
            GammaLink::MeanScaled => {
                let scaled = (base as f64 * (gamma * alpha).exp()).round();
                (scaled as u64).max(1)
            }
        }
    }
}

/// Parameters of one cluster type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterTypeParams {
    pub probability: f64,
    pub latent_baseline: f64,
    pub latent_effect: f64,
    pub size_min: u64,
    pub size_max: u64,
}

fn default_treatment_probability() -> f64 {
    0.5
}

/// Full data-generating-process configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DgpConfig {
    /// Number of clusters M per generated trial.
    pub clusters: usize,
    /// Ordinal category count D.
    pub categories: usize,
    /// Strictly increasing cut-points θ_1..θ_{D−1}.
    pub cut_points: Vec<f64>,
    /// Standard deviation of the Normal cluster random intercept.
    pub intercept_sd: f64,
    /// Size-informativeness coefficient.
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_link: GammaLink,
    /// Monte Carlo replicates for a simulation study.
    pub replicates: usize,
    /// Base seed; every replicate and cluster derives its own substream.
    pub seed: u64,
    #[serde(default = "default_treatment_probability")]
    pub treatment_probability: f64,
    #[serde(rename = "cluster_type")]
    pub types: Vec<ClusterTypeParams>,
}

impl DgpConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.clusters == 0 {
            return fail("clusters must be >= 1".into());
        }
        if self.categories < 2 {
            return fail(format!("categories must be >= 2, got {}", self.categories));
        }
        if self.cut_points.len() != self.categories - 1 {
            return fail(format!(
                "need {} cut-points for {} categories, got {}",
                self.categories - 1,
                self.categories,
                self.cut_points.len()
            ));
        }
        if self.cut_points.windows(2).any(|w| w[0] >= w[1]) {
            return fail("cut-points must be strictly increasing".into());
        }
        if self.intercept_sd < 0.0 || self.intercept_sd.is_nan() {
            return fail(format!(
                "intercept_sd must be >= 0, got {}",
                self.intercept_sd
            ));
        }
        if self.types.is_empty() {
            return fail("at least one cluster type required".into());
        }
        let p_sum: f64 = self.types.iter().map(|t| t.probability).sum();
        if (p_sum - 1.0).abs() > 1e-9 {
            return fail(format!("type probabilities sum to {p_sum}, expected 1"));
        }
        for (i, t) in self.types.iter().enumerate() {
            if t.probability < 0.0 || t.probability > 1.0 {
                return fail(format!("type {i}: probability out of [0, 1]"));
            }
            if t.size_min < 1 || t.size_min > t.size_max {
                return fail(format!(
                    "type {i}: size range [{}, {}] must satisfy 1 <= min <= max",
                    t.size_min, t.size_max
                ));
            }
        }
        if !(self.treatment_probability > 0.0 && self.treatment_probability < 1.0) {
            return fail("treatment_probability must lie in (0, 1)".into());
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: DgpConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("toml: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn scale(&self) -> OrdinalScale {
        OrdinalScale::numeric(self.categories).expect("categories >= 2 validated")
    }

    /// Hex SHA-256 of the canonical serialized config, for report metadata.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex_string(&digest)
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// One generated cluster with both potential outcome vectors retained.
#[derive(Debug, Clone)]
pub struct GeneratedCluster {
    pub arm: Arm,
    pub type_idx: usize,
    pub alpha: f64,
    pub size: u64,
    pub potential_treated: Vec<Rank>,
    pub potential_control: Vec<Rank>,
}

impl GeneratedCluster {
    pub fn observed(&self) -> &[Rank] {
        match self.arm {
            Arm::Treated => &self.potential_treated,
            Arm::Control => &self.potential_control,
        }
    }
}

/// Dedicated RNG stream for one (replicate, cluster) pair.
pub fn cluster_rng(seed: u64, replicate: u64, cluster: u64) -> ChaCha12Rng {
    let mut state = seed ^ replicate.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha12Rng::from_seed(bytes);
    rng.set_stream(cluster);
    rng
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw one cluster: type, intercept, arm, size, and both potential outcome
/// vectors. The intercept and the per-individual latent noise are shared
/// across the two potential outcomes.
pub fn generate_cluster<R: Rng>(config: &DgpConfig, rng: &mut R) -> GeneratedCluster {
    let arm = if rng.gen::<f64>() < config.treatment_probability {
        Arm::Treated
    } else {
        Arm::Control
    };
    let type_idx = {
        let u: f64 = rng.gen();
        let mut cumulative = 0.0;
        let mut chosen = config.types.len() - 1;
        for (i, t) in config.types.iter().enumerate() {
            cumulative += t.probability;
            if u < cumulative {
                chosen = i;
                break;
            }
        }
        chosen
    };
    let t = &config.types[type_idx];
    let alpha = if config.intercept_sd > 0.0 {
        Normal::new(0.0, config.intercept_sd)
            .expect("validated sd")
            .sample(rng)
    } else {
        0.0
    };
    let base_size = rng.gen_range(t.size_min..=t.size_max);
    let size = if config.gamma != 0.0 {
        config.gamma_link.apply(base_size, config.gamma, alpha)
    } else {
        base_size
    };

    let eta_control = t.latent_baseline + alpha;
    let eta_treated = eta_control + t.latent_effect;
    let mut potential_treated = Vec::with_capacity(size as usize);
    let mut potential_control = Vec::with_capacity(size as usize);
    for _ in 0..size {
        // Standard logistic noise via inverse CDF.
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let epsilon = (u / (1.0 - u)).ln();
        potential_treated.push(discretize(eta_treated + epsilon, &config.cut_points));
        potential_control.push(discretize(eta_control + epsilon, &config.cut_points));
    }
    GeneratedCluster {
        arm,
        type_idx,
        alpha,
        size,
        potential_treated,
        potential_control,
    }
}

/// Rank = number of cut-points strictly below the latent value.
fn discretize(latent: f64, cut_points: &[f64]) -> Rank {
    cut_points.iter().filter(|&&theta| theta < latent).count() as Rank
}

/// A generated trial: the observed dataset plus per-cluster diagnostics.
#[derive(Debug, Clone)]
pub struct GeneratedTrial {
    pub dataset: TrialDataset,
    pub clusters: Vec<GeneratedCluster>,
}

/// Assemble a full trial for one replicate. Regenerating with the same
/// (config, replicate) is byte-identical.
///
/// A draw can leave an arm empty (all Bernoulli assignments equal); such
/// trials are rejected with `EmptyArm` and the caller decides how to count
/// them.
pub fn generate_trial(config: &DgpConfig, replicate: u64) -> Result<GeneratedTrial> {
    let generated: Vec<GeneratedCluster> = crate::parallel::map_indexed(config.clusters, |i| {
        let mut rng = cluster_rng(config.seed, replicate, i as u64);
        generate_cluster(config, &mut rng)
    });
    let records: Vec<ClusterRecord> = generated
        .iter()
        .enumerate()
        .map(|(i, g)| ClusterRecord::new(format!("c{i:06}"), g.arm, g.observed().to_vec()))
        .collect();
    let dataset = TrialDataset::new(config.scale(), records)?;
    Ok(GeneratedTrial {
        dataset,
        clusters: generated,
    })
}

/// The two-type parameter set used throughout the simulation examples.
/// `ics = false` collapses to the single large-cluster type with γ = 0.
pub fn example_config(ics: bool) -> DgpConfig {
    let types = if ics {
        vec![
            ClusterTypeParams {
                probability: 0.92,
                latent_baseline: 2.2,
                latent_effect: 0.0,
                size_min: 8,
                size_max: 20,
            },
            ClusterTypeParams {
                probability: 0.08,
                latent_baseline: 0.3,
                latent_effect: 2.1,
                size_min: 80,
                size_max: 180,
            },
        ]
    } else {
        vec![ClusterTypeParams {
            probability: 1.0,
            latent_baseline: 0.3,
            latent_effect: 2.1,
            size_min: 80,
            size_max: 180,
        }]
    };
    DgpConfig {
        clusters: 100,
        categories: 5,
        cut_points: vec![-1.2, -0.2, 0.6, 1.4],
        intercept_sd: 1.34,
        gamma: if ics { -0.6 } else { 0.0 },
        gamma_link: GammaLink::MeanScaled,
        replicates: 500,
        seed: 20260823,
        treatment_probability: 0.5,
        types,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_seed_is_reproducible() {
        let config = example_config(false);
        let a = generate_trial(&config, 7).unwrap();
        let b = generate_trial(&config, 7).unwrap();
        for (x, y) in a.clusters.iter().zip(&b.clusters) {
            assert_eq!(x.arm, y.arm);
            assert_eq!(x.potential_treated, y.potential_treated);
            assert_eq!(x.potential_control, y.potential_control);
        }
        let c = generate_trial(&config, 8).unwrap();
        assert_ne!(
            a.clusters[0].potential_treated,
            c.clusters[0].potential_treated
        );
    }

    #[test]
    fn no_ics_sizes_are_uniform_80_to_180() {
        let config = example_config(false);
        let trial = generate_trial(&config, 0).unwrap();
        let sizes: Vec<u64> = trial.clusters.iter().map(|c| c.size).collect();
        assert!(sizes.iter().all(|&n| (80..=180).contains(&n)));
        let mean = sizes.iter().sum::<u64>() as f64 / sizes.len() as f64;
        // E[N] = 130; binomial-ish bound over 100 draws.
        assert!((mean - 130.0).abs() < 15.0, "mean size {mean}");
    }

    #[test]
    fn null_effect_matches_marginals() {
        let mut config = example_config(false);
        config.types[0].latent_effect = 0.0;
        config.types[0].size_min = 50;
        config.types[0].size_max = 50;
        config.clusters = 400;
        let trial = generate_trial(&config, 1).unwrap();
        let mut freq_treated = vec![0u64; 5];
        let mut freq_control = vec![0u64; 5];
        let mut totals = [0u64; 2];
        for cluster in &trial.clusters {
            for &r in &cluster.potential_treated {
                freq_treated[r as usize] += 1;
                totals[0] += 1;
            }
            for &r in &cluster.potential_control {
                freq_control[r as usize] += 1;
                totals[1] += 1;
            }
        }
        // δ = 0 forces identical latent means: identical outcomes per draw.
        assert_eq!(freq_treated, freq_control);
        assert_eq!(totals[0], totals[1]);
    }

    #[test]
    fn type_frequencies_match_probabilities() {
        let config = example_config(true);
        let mut type2 = 0usize;
        let reps = 50u64;
        for rep in 0..reps {
            let trial = generate_trial(&config, rep).unwrap();
            type2 += trial.clusters.iter().filter(|c| c.type_idx == 1).count();
        }
        let total = reps as f64 * config.clusters as f64;
        let rate = type2 as f64 / total;
        // 99% binomial bounds around 0.08 for 5000 draws.
        assert!((rate - 0.08).abs() < 0.01, "type-2 rate {rate}");
    }

    #[test]
    fn arm_counts_are_binomial() {
        let config = example_config(false);
        let trial = generate_trial(&config, 3).unwrap();
        let treated = trial.dataset.treated_indices().len();
        assert!((25..=75).contains(&treated), "treated count {treated}");
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut config = example_config(false);
        config.cut_points = vec![0.0, 0.0, 0.1, 0.2];
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));

        let mut config = example_config(false);
        config.types[0].probability = 0.5;
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn gamma_link_floors_at_one() {
        assert_eq!(GammaLink::MeanScaled.apply(10, -0.6, 10.0), 1);
        assert_eq!(GammaLink::MeanScaled.apply(10, 0.0, 3.0), 10);
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
clusters = 100
categories = 5
cut_points = [-1.2, -0.2, 0.6, 1.4]
intercept_sd = 1.34
gamma = -0.6
gamma_link = "mean-scaled"
replicates = 2000
seed = 42

[[cluster_type]]
probability = 0.92
latent_baseline = 2.2
latent_effect = 0.0
size_min = 8
size_max = 20

[[cluster_type]]
probability = 0.08
latent_baseline = 0.3
latent_effect = 2.1
size_min = 80
size_max = 180
"#;
        let config = DgpConfig::from_toml_str(text).unwrap();
        assert_eq!(config.types.len(), 2);
        assert_eq!(config.treatment_probability, 0.5);
        assert_eq!(config.gamma_link, GammaLink::MeanScaled);
        assert_eq!(config.content_hash().len(), 64);
    }
}
