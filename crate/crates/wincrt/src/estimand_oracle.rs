//! Exact computation of individual-pair, cluster-pair, and weighted win
//! estimands from a superpopulation of cluster types. Default arithmetic is
//! rational, so hand-derived fractions can be checked for exact equality.
//!
//! With clusters in a pair drawn independently, every estimand factorizes
//! through per-arm category marginals, so only the expected size per type
//! enters the individual weighting.

use crate::data_model::{summarize, OrdinalScale, WeightScheme, WinSummary, WinTriple};
use crate::error::{Error, Result};
use crate::numeric::{parse_exact_rational, WinScalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

/// Cluster size under one type: fixed, a uniform integer range, or an
/// explicit discrete distribution. Only the mean enters the estimands.
#[derive(Debug, Clone, PartialEq)]
pub enum SizeSpec {
    Fixed(u64),
    Range { min: u64, max: u64 },
    Distribution(Vec<(u64, BigRational)>),
}

impl SizeSpec {
    pub fn mean(&self) -> BigRational {
        match self {
            SizeSpec::Fixed(n) => BigRational::from_integer(BigInt::from(*n)),
            SizeSpec::Range { min, max } => {
                BigRational::new(BigInt::from(min + max), BigInt::from(2u32))
            }
            SizeSpec::Distribution(points) => points
                .iter()
                .map(|(n, p)| BigRational::from_integer(BigInt::from(*n)) * p)
                .fold(<BigRational as Zero>::zero(), |a, b| a + b),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SizeSpec::Fixed(n) if *n >= 1 => Ok(()),
            SizeSpec::Fixed(n) => Err(Error::InvalidSpec(format!("size {n} must be >= 1"))),
            SizeSpec::Range { min, max } => {
                if *min >= 1 && min <= max {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "size range [{min}, {max}] must satisfy 1 <= min <= max"
                    )))
                }
            }
            SizeSpec::Distribution(points) => {
                if points.is_empty() {
                    return Err(Error::InvalidSpec("empty size distribution".into()));
                }
                let total: BigRational = points
                    .iter()
                    .map(|(n, p)| {
                        if *n < 1 {
                            Err(Error::InvalidSpec(format!("size {n} must be >= 1")))
                        } else if p.is_negative() {
                            Err(Error::InvalidSpec("negative size probability".into()))
                        } else {
                            Ok(p.clone())
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(<BigRational as Zero>::zero(), |a, b| a + b);
                if total != <BigRational as One>::one() {
                    return Err(Error::InvalidSpec(format!(
                        "size distribution sums to {total}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// One cluster type: its superpopulation probability, size law, and
/// potential-outcome category distributions (worst level first).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTypeSpec {
    pub label: String,
    pub probability: BigRational,
    pub size: SizeSpec,
    pub dist_treated: Vec<BigRational>,
    pub dist_control: Vec<BigRational>,
}

#[derive(Debug, Clone)]
pub struct SuperpopulationSpec {
    pub scale: OrdinalScale,
    pub types: Vec<ClusterTypeSpec>,
}

impl SuperpopulationSpec {
    pub fn new(scale: OrdinalScale, types: Vec<ClusterTypeSpec>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidSpec("no cluster types".into()));
        }
        let d = scale.num_levels();
        let mut total = <BigRational as Zero>::zero();
        for t in &types {
            if !t.probability.is_positive() || t.probability > <BigRational as One>::one() {
                return Err(Error::InvalidSpec(format!(
                    "type {}: probability must lie in (0, 1]",
                    t.label
                )));
            }
            total += &t.probability;
            t.size
                .validate()
                .map_err(|e| Error::InvalidSpec(format!("type {}: {e}", t.label)))?;
            for (arm, dist) in [("treated", &t.dist_treated), ("control", &t.dist_control)] {
                if dist.len() != d {
                    return Err(Error::InvalidSpec(format!(
                        "type {}: {arm} distribution has {} entries, scale has {d} levels",
                        t.label,
                        dist.len()
                    )));
                }
                if dist.iter().any(|p| p.is_negative()) {
                    return Err(Error::InvalidSpec(format!(
                        "type {}: negative {arm} probability",
                        t.label
                    )));
                }
                let sum: BigRational = dist
                    .iter()
                    .cloned()
                    .fold(<BigRational as Zero>::zero(), |a, b| a + b);
                if sum != <BigRational as One>::one() {
                    return Err(Error::InvalidSpec(format!(
                        "type {}: {arm} distribution sums to {sum}, expected 1",
                        t.label
                    )));
                }
            }
        }
        if total != <BigRational as One>::one() {
            return Err(Error::InvalidSpec(format!(
                "type probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { scale, types })
    }

    /// Parse the TOML spec format. Category entries may be counts or
    /// probabilities (normalized internally) and accept integers, floats, or
    /// exact strings like `"9/20"` / `"0.45"`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSpec =
            toml::from_str(text).map_err(|e| Error::InvalidSpec(format!("toml: {e}")))?;
        let scale = OrdinalScale::new(raw.levels)
            .map_err(|e| Error::InvalidSpec(format!("levels: {e}")))?;
        let types = raw
            .cluster_type
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.into_spec(i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(scale, types)
    }
}

#[derive(Debug, Deserialize)]
struct RawSpec {
    levels: Vec<String>,
    cluster_type: Vec<RawType>,
}

#[derive(Debug, Deserialize)]
struct RawType {
    label: Option<String>,
    probability: toml::Value,
    size: toml::Value,
    treated: Vec<toml::Value>,
    control: Vec<toml::Value>,
}

impl RawType {
    fn into_spec(self, index: usize) -> Result<ClusterTypeSpec> {
        let label = self.label.unwrap_or_else(|| (index + 1).to_string());
        let field = |name: &str, e: String| Error::InvalidSpec(format!("type {label}.{name}: {e}"));
        let probability =
            value_to_rational(&self.probability).map_err(|e| field("probability", e))?;
        let size = parse_size(&self.size).map_err(|e| field("size", e))?;
        let dist_treated = normalize(
            self.treated
                .iter()
                .map(value_to_rational)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| field("treated", e))?,
        )
        .map_err(|e| field("treated", e))?;
        let dist_control = normalize(
            self.control
                .iter()
                .map(value_to_rational)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| field("control", e))?,
        )
        .map_err(|e| field("control", e))?;
        Ok(ClusterTypeSpec {
            label,
            probability,
            size,
            dist_treated,
            dist_control,
        })
    }
}

fn value_to_rational(value: &toml::Value) -> std::result::Result<BigRational, String> {
    match value {
        toml::Value::Integer(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
        toml::Value::Float(f) => {
            BigRational::from_float(*f).ok_or_else(|| format!("non-finite number {f}"))
        }
        toml::Value::String(s) => {
            parse_exact_rational(s).ok_or_else(|| format!("cannot parse {s:?} as a rational"))
        }
        other => Err(format!("expected a number or string, got {other}")),
    }
}

fn parse_size(value: &toml::Value) -> std::result::Result<SizeSpec, String> {
    match value {
        toml::Value::Integer(n) if *n > 0 => Ok(SizeSpec::Fixed(*n as u64)),
        toml::Value::Integer(n) => Err(format!("size {n} must be positive")),
        toml::Value::Table(table) => {
            let get = |key: &str| {
                table
                    .get(key)
                    .and_then(|v| v.as_integer())
                    .ok_or_else(|| format!("size table needs integer {key:?}"))
            };
            Ok(SizeSpec::Range {
                min: get("min")? as u64,
                max: get("max")? as u64,
            })
        }
        toml::Value::Array(points) => {
            let parsed = points
                .iter()
                .map(|point| {
                    let pair = point.as_array().ok_or_else(|| {
                        "size distribution entries are [size, prob] pairs".to_string()
                    })?;
                    if pair.len() != 2 {
                        return Err("size distribution entries are [size, prob] pairs".to_string());
                    }
                    let n = pair[0]
                        .as_integer()
                        .ok_or_else(|| "size must be an integer".to_string())?;
                    let p = value_to_rational(&pair[1])?;
                    Ok((n as u64, p))
                })
                .collect::<std::result::Result<Vec<_>, String>>()?;
            Ok(SizeSpec::Distribution(parsed))
        }
        other => Err(format!("unsupported size value {other}")),
    }
}

/// Normalize counts or probabilities to a probability vector.
fn normalize(values: Vec<BigRational>) -> std::result::Result<Vec<BigRational>, String> {
    let total: BigRational = values
        .iter()
        .cloned()
        .fold(<BigRational as Zero>::zero(), |a, b| a + b);
    if !total.is_positive() {
        return Err("entries must sum to a positive value".into());
    }
    Ok(values.into_iter().map(|v| v / total.clone()).collect())
}

/// Which marginal averaging a `MarginalPair` used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Size-weighted: category c gets Σ p_t·E[N|t]·π_t(c) / Σ p_t·E[N|t].
    Individual,
    /// Unweighted over clusters: Σ p_t·π_t(c).
    Cluster,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::Individual => "individual-pair",
            Weighting::Cluster => "cluster-pair",
        }
    }
}

/// Per-arm category marginals under a given weighting.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalPair {
    pub treated: Vec<BigRational>,
    pub control: Vec<BigRational>,
    pub weighting: Weighting,
}

/// Average the per-type category distributions into arm-level marginals.
pub fn marginals(spec: &SuperpopulationSpec, weighting: Weighting) -> MarginalPair {
    let type_weights: Vec<BigRational> = spec
        .types
        .iter()
        .map(|t| match weighting {
            Weighting::Individual => &t.probability * t.size.mean(),
            Weighting::Cluster => t.probability.clone(),
        })
        .collect();
    let total: BigRational = type_weights
        .iter()
        .cloned()
        .fold(<BigRational as Zero>::zero(), |a, b| a + b);

    let d = spec.scale.num_levels();
    let mix = |pick: fn(&ClusterTypeSpec) -> &Vec<BigRational>| -> Vec<BigRational> {
        (0..d)
            .map(|c| {
                spec.types
                    .iter()
                    .zip(&type_weights)
                    .map(|(t, w)| w * &pick(t)[c])
                    .fold(<BigRational as Zero>::zero(), |a, b| a + b)
                    / total.clone()
            })
            .collect()
    };
    MarginalPair {
        treated: mix(|t| &t.dist_treated),
        control: mix(|t| &t.dist_control),
        weighting,
    }
}

/// τ_win = Σ_{a>b} treated(a)·control(b), loss and tie analogous.
pub fn win_triple_from_marginals(pair: &MarginalPair) -> WinTriple<BigRational> {
    win_triple_from_distributions(&pair.treated, &pair.control)
}

/// Cross-arm win/loss/tie mass for any pair of category distributions.
/// Generic over numeric mode (the quadrature truth path reuses it in f64).
pub fn win_triple_from_distributions<S: WinScalar>(treated: &[S], control: &[S]) -> WinTriple<S> {
    let mut win = S::zero();
    let mut loss = S::zero();
    let mut tie = S::zero();
    for (a, pa) in treated.iter().enumerate() {
        for (b, pb) in control.iter().enumerate() {
            let mass = pa.clone() * pb.clone();
            match a.cmp(&b) {
                std::cmp::Ordering::Greater => win = win + mass,
                std::cmp::Ordering::Less => loss = loss + mass,
                std::cmp::Ordering::Equal => tie = tie + mass,
            }
        }
    }
    WinTriple::new(win, loss, tie)
}

/// Exact win estimand under one weight scheme.
#[derive(Debug, Clone)]
pub struct OracleEstimate {
    pub triple: WinTriple<BigRational>,
    pub summary: WinSummary<BigRational>,
}

impl OracleEstimate {
    pub fn summary_f64(&self) -> WinSummary<f64> {
        WinSummary {
            win_ratio: match &self.summary.win_ratio {
                crate::data_model::RatioValue::Finite(v) => {
                    crate::data_model::RatioValue::Finite(v.to_f64())
                }
                crate::data_model::RatioValue::PositiveInfinity => {
                    crate::data_model::RatioValue::PositiveInfinity
                }
            },
            win_odds: match &self.summary.win_odds {
                crate::data_model::RatioValue::Finite(v) => {
                    crate::data_model::RatioValue::Finite(v.to_f64())
                }
                crate::data_model::RatioValue::PositiveInfinity => {
                    crate::data_model::RatioValue::PositiveInfinity
                }
            },
            win_difference: self.summary.win_difference.to_f64(),
        }
    }
}

/// Compute the exact estimand for any weight scheme.
///
/// Individual-pair and cluster-pair factor through arm marginals. A custom
/// scheme runs the type-pair double sum with weights evaluated at expected
/// sizes (full size distributions are reduced to their means; sizes of the
/// two clusters in a pair are independent).
pub fn estimands(spec: &SuperpopulationSpec, scheme: &WeightScheme) -> Result<OracleEstimate> {
    let triple = match scheme {
        WeightScheme::IndividualPair => {
            win_triple_from_marginals(&marginals(spec, Weighting::Individual))
        }
        WeightScheme::ClusterPair => {
            win_triple_from_marginals(&marginals(spec, Weighting::Cluster))
        }
        WeightScheme::Custom(_) => {
            let mut num = [
                <BigRational as Zero>::zero(),
                <BigRational as Zero>::zero(),
                <BigRational as Zero>::zero(),
            ];
            let mut den = <BigRational as Zero>::zero();
            for ti in &spec.types {
                for tj in &spec.types {
                    let w = scheme.weight_rational(&ti.size.mean(), &tj.size.mean())?
                        * &ti.probability
                        * &tj.probability;
                    let t = win_triple_from_distributions(&ti.dist_treated, &tj.dist_control);
                    num[0] += &w * t.win;
                    num[1] += &w * t.loss;
                    num[2] += &w * t.tie;
                    den += w;
                }
            }
            WinTriple::new(
                num[0].clone() / den.clone(),
                num[1].clone() / den.clone(),
                num[2].clone() / den,
            )
        }
    };
    let summary = summarize(&triple)?;
    Ok(OracleEstimate { triple, summary })
}

/// Informative-cluster-size classification of a spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcsClass {
    /// Sizes are uncorrelated with the outcome distributions.
    None,
    /// Baseline (control) outcome distributions depend on cluster size.
    TypeIOnly,
    /// Treatment effects depend on cluster size, baselines do not.
    TypeIIOnly,
    /// Both baselines and treatment effects depend on cluster size.
    TypeIAndII,
}

impl IcsClass {
    pub fn describe(self) -> &'static str {
        match self {
            IcsClass::None => "no ICS",
            IcsClass::TypeIOnly => "type I ICS",
            IcsClass::TypeIIOnly => "type II ICS",
            IcsClass::TypeIAndII => "type I and II ICS",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CollapseReport {
    pub ics_class: IcsClass,
    pub estimands_equal: bool,
    pub individual: OracleEstimate,
    pub cluster: OracleEstimate,
}

/// Report whether size is uncorrelated with the outcome distributions and
/// whether the individual-pair and cluster-pair estimands agree.
pub fn collapse_check(spec: &SuperpopulationSpec) -> Result<CollapseReport> {
    let individual = estimands(spec, &WeightScheme::IndividualPair)?;
    let cluster = estimands(spec, &WeightScheme::ClusterPair)?;
    let estimands_equal = individual.triple == cluster.triple;

    let first = &spec.types[0];
    let sizes_vary = spec
        .types
        .iter()
        .any(|t| t.size.mean() != first.size.mean());
    let dists_shared = spec
        .types
        .iter()
        .all(|t| t.dist_treated == first.dist_treated && t.dist_control == first.dist_control);
    let effect = |t: &ClusterTypeSpec| -> Vec<BigRational> {
        t.dist_treated
            .iter()
            .zip(&t.dist_control)
            .map(|(a, b)| a - b)
            .collect()
    };
    let baseline_varies = spec
        .types
        .iter()
        .any(|t| t.dist_control != first.dist_control);
    let first_effect = effect(first);
    let effect_varies = spec.types.iter().any(|t| effect(t) != first_effect);

    let ics_class = if !sizes_vary || dists_shared {
        IcsClass::None
    } else {
        match (baseline_varies, effect_varies) {
            (true, true) => IcsClass::TypeIAndII,
            (true, false) => IcsClass::TypeIOnly,
            (false, true) => IcsClass::TypeIIOnly,
            (false, false) => IcsClass::None,
        }
    };
    Ok(CollapseReport {
        ics_class,
        estimands_equal,
        individual,
        cluster,
    })
}
