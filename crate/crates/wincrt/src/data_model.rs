//! Core domain types: ordinal scales, clustered trial datasets, pair-weight
//! schemes, and the win/loss/tie probability algebra shared by every
//! estimator and oracle in the crate.

use crate::error::{Error, Result};
use crate::numeric::WinScalar;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::HashSet;
use std::fmt;
use std::io::Read;

/// Internal outcome representation: rank into the ordinal scale,
/// `0..D-1`, higher rank is better.
pub type Rank = u32;

/// An ordered outcome scale. Levels are stored worst-first, so the rank of a
/// level is its index and higher ranks are preferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalScale {
    levels: Vec<String>,
}

impl OrdinalScale {
    /// Build a scale from labels ordered worst to best.
    pub fn new<S: Into<String>>(levels: impl IntoIterator<Item = S>) -> Result<Self> {
        let levels: Vec<String> = levels.into_iter().map(Into::into).collect();
        if levels.len() < 2 {
            return Err(Error::InvalidScale(format!(
                "need at least 2 levels, got {}",
                levels.len()
            )));
        }
        let mut seen = HashSet::new();
        for level in &levels {
            if !seen.insert(level.clone()) {
                return Err(Error::InvalidScale(format!("duplicate level {level:?}")));
            }
        }
        Ok(Self { levels })
    }

    /// Anonymous numeric scale with `d` levels labelled `1..=d`.
    pub fn numeric(d: usize) -> Result<Self> {
        Self::new((1..=d).map(|r| r.to_string()))
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn rank_of(&self, label: &str) -> Option<Rank> {
        self.levels
            .iter()
            .position(|l| l == label)
            .map(|i| i as Rank)
    }

    pub fn label(&self, rank: Rank) -> &str {
        &self.levels[rank as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.levels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Control,
    Treated,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Control => "control",
            Arm::Treated => "treated",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One cluster: its assigned arm and the outcome ranks of its members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterRecord {
    pub id: String,
    pub arm: Arm,
    pub outcomes: Vec<Rank>,
}

impl ClusterRecord {
    pub fn new(id: impl Into<String>, arm: Arm, outcomes: Vec<Rank>) -> Self {
        Self {
            id: id.into(),
            arm,
            outcomes,
        }
    }

    pub fn size(&self) -> u64 {
        self.outcomes.len() as u64
    }
}

/// A validated clustered dataset. Construction runs all invariant checks, so
/// holding a `TrialDataset` implies unique cluster ids, in-scale outcomes,
/// nonempty clusters, and at least one cluster per arm.
#[derive(Debug, Clone)]
pub struct TrialDataset {
    scale: OrdinalScale,
    clusters: Vec<ClusterRecord>,
    treated: Vec<usize>,
    control: Vec<usize>,
}

impl TrialDataset {
    pub fn new(scale: OrdinalScale, clusters: Vec<ClusterRecord>) -> Result<Self> {
        let d = scale.num_levels() as Rank;
        let mut ids = HashSet::new();
        let mut treated = Vec::new();
        let mut control = Vec::new();
        for (idx, cluster) in clusters.iter().enumerate() {
            if !ids.insert(cluster.id.clone()) {
                return Err(Error::DuplicateClusterId(cluster.id.clone()));
            }
            if cluster.outcomes.is_empty() {
                return Err(Error::EmptyCluster(cluster.id.clone()));
            }
            if let Some(bad) = cluster.outcomes.iter().find(|&&r| r >= d) {
                return Err(Error::UnknownLevel {
                    label: format!("rank {bad}"),
                    cluster_id: cluster.id.clone(),
                });
            }
            match cluster.arm {
                Arm::Treated => treated.push(idx),
                Arm::Control => control.push(idx),
            }
        }
        if treated.is_empty() {
            return Err(Error::EmptyArm("treated"));
        }
        if control.is_empty() {
            return Err(Error::EmptyArm("control"));
        }
        Ok(Self {
            scale,
            clusters,
            treated,
            control,
        })
    }

    pub fn scale(&self) -> &OrdinalScale {
        &self.scale
    }

    pub fn clusters(&self) -> &[ClusterRecord] {
        &self.clusters
    }

    /// Number of clusters M.
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Indices of treated clusters, in dataset order.
    pub fn treated_indices(&self) -> &[usize] {
        &self.treated
    }

    /// Indices of control clusters, in dataset order.
    pub fn control_indices(&self) -> &[usize] {
        &self.control
    }

    /// New dataset with every arm flipped (used in antisymmetry checks).
    pub fn swap_arms(&self) -> TrialDataset {
        let clusters = self
            .clusters
            .iter()
            .map(|c| {
                let arm = match c.arm {
                    Arm::Treated => Arm::Control,
                    Arm::Control => Arm::Treated,
                };
                ClusterRecord::new(c.id.clone(), arm, c.outcomes.clone())
            })
            .collect();
        TrialDataset::new(self.scale.clone(), clusters).expect("swapped dataset stays valid")
    }

    /// New dataset with cluster `idx` removed. Errors if this empties an arm.
    pub fn without_cluster(&self, idx: usize) -> Result<TrialDataset> {
        let target = &self.clusters[idx];
        let remaining_same_arm = self
            .clusters
            .iter()
            .enumerate()
            .filter(|(i, c)| *i != idx && c.arm == target.arm)
            .count();
        if remaining_same_arm == 0 {
            return Err(Error::DegenerateDeletion {
                cluster_id: target.id.clone(),
                arm: target.arm.name(),
            });
        }
        let clusters = self
            .clusters
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx)
            .map(|(_, c)| c.clone())
            .collect();
        TrialDataset::new(self.scale.clone(), clusters)
    }

    /// Read a delimited dataset with header `cluster_id,arm,outcome`, one row
    /// per individual. When `levels` is `None` the scale is inferred from the
    /// sorted distinct labels (numeric sort when all labels parse as numbers,
    /// lexicographic otherwise), worst first.
    pub fn from_csv<R: Read>(reader: R, levels: Option<&[String]>) -> Result<Self> {
        let mut csv_reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<(String, Arm, String)> = Vec::new();
        for (i, record) in csv_reader.records().enumerate() {
            let line = i + 2; // header is line 1
            let record = record.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if record.len() < 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 columns, got {}", record.len()),
                });
            }
            let arm = match &record[1] {
                "0" => Arm::Control,
                "1" => Arm::Treated,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("arm must be 0 or 1, got {other:?}"),
                    })
                }
            };
            rows.push((record[0].to_string(), arm, record[2].to_string()));
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "dataset contains no rows".into(),
            });
        }

        let scale = match levels {
            Some(levels) => OrdinalScale::new(levels.iter().cloned())?,
            None => OrdinalScale::new(infer_levels(rows.iter().map(|r| r.2.as_str())))?,
        };

        let mut clusters: Vec<ClusterRecord> = Vec::new();
        for (cluster_id, arm, label) in rows {
            let rank = scale.rank_of(&label).ok_or_else(|| Error::UnknownLevel {
                label: label.clone(),
                cluster_id: cluster_id.clone(),
            })?;
            match clusters.iter_mut().find(|c| c.id == cluster_id) {
                Some(cluster) => {
                    if cluster.arm != arm {
                        return Err(Error::InvalidScale(format!(
                            "cluster {cluster_id:?} appears under both arms"
                        )));
                    }
                    cluster.outcomes.push(rank);
                }
                None => clusters.push(ClusterRecord::new(cluster_id, arm, vec![rank])),
            }
        }
        TrialDataset::new(scale, clusters)
    }
}

fn infer_levels<'a>(labels: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut distinct: Vec<String> = Vec::new();
    for label in labels {
        if !distinct.iter().any(|l| l == label) {
            distinct.push(label.to_string());
        }
    }
    let all_numeric: Option<Vec<f64>> = distinct.iter().map(|l| l.parse::<f64>().ok()).collect();
    match all_numeric {
        Some(values) => {
            let mut order: Vec<usize> = (0..distinct.len()).collect();
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            order.into_iter().map(|i| distinct[i].clone()).collect()
        }
        None => {
            distinct.sort();
            distinct
        }
    }
}

/// Weight assigned to each treated-control cluster pair.
#[derive(Debug, Clone)]
pub enum WeightScheme {
    /// ω_ij = N_i·N_j: every cross-arm individual pair counts once.
    IndividualPair,
    /// ω_ij = 1: every cluster pair counts once.
    ClusterPair,
    /// ω_ij given by a deterministic expression in the pair sizes.
    Custom(WeightExpr),
}

impl WeightScheme {
    pub fn name(&self) -> String {
        match self {
            WeightScheme::IndividualPair => "individual-pair".into(),
            WeightScheme::ClusterPair => "cluster-pair".into(),
            WeightScheme::Custom(expr) => format!("custom:{}", expr.source()),
        }
    }

    /// Exact rational weight for a pair of cluster sizes.
    pub fn weight(&self, ni: u64, nj: u64) -> Result<BigRational> {
        self.weight_rational(
            &BigRational::from_integer(BigInt::from(ni)),
            &BigRational::from_integer(BigInt::from(nj)),
        )
    }

    /// Weight at (possibly fractional) expected sizes.
    pub fn weight_rational(&self, ni: &BigRational, nj: &BigRational) -> Result<BigRational> {
        let w = match self {
            WeightScheme::IndividualPair => ni * nj,
            WeightScheme::ClusterPair => BigRational::from_integer(BigInt::from(1)),
            WeightScheme::Custom(expr) => expr.eval_rational(ni, nj)?,
        };
        if w <= num_traits::Zero::zero() {
            return Err(Error::InvalidWeightExpr {
                source_text: self.name(),
                message: format!("weight must be strictly positive, got {w} at sizes ({ni}, {nj})"),
            });
        }
        Ok(w)
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "individual-pair" => Ok(WeightScheme::IndividualPair),
            "cluster-pair" => Ok(WeightScheme::ClusterPair),
            other => match other.strip_prefix("custom:") {
                Some(expr) => Ok(WeightScheme::Custom(WeightExpr::parse(expr)?)),
                None => Err(Error::InvalidWeightExpr {
                    source_text: text.into(),
                    message: "expected individual-pair, cluster-pair, or custom:<expr>".into(),
                }),
            },
        }
    }
}

/// A small arithmetic expression over the pair sizes `ni` and `nj`:
/// `+ - * /`, parentheses, and nonnegative integer or decimal literals.
/// Evaluated in exact rational arithmetic.
#[derive(Debug, Clone)]
pub struct WeightExpr {
    source: String,
    ast: ExprNode,
}

#[derive(Debug, Clone)]
enum ExprNode {
    Ni,
    Nj,
    Literal(BigRational),
    Add(Box<ExprNode>, Box<ExprNode>),
    Sub(Box<ExprNode>, Box<ExprNode>),
    Mul(Box<ExprNode>, Box<ExprNode>),
    Div(Box<ExprNode>, Box<ExprNode>),
}

impl WeightExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = ExprParser {
            source,
            tokens: &tokens,
            pos: 0,
        };
        let ast = parser.expression()?;
        if parser.pos != tokens.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Self {
            source: source.to_string(),
            ast,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, ni: u64, nj: u64) -> Result<BigRational> {
        self.eval_rational(
            &BigRational::from_integer(BigInt::from(ni)),
            &BigRational::from_integer(BigInt::from(nj)),
        )
    }

    /// Evaluate at (possibly fractional) expected sizes, as the estimand
    /// oracle does.
    pub fn eval_rational(&self, ni: &BigRational, nj: &BigRational) -> Result<BigRational> {
        eval_node(&self.ast, ni, nj).ok_or_else(|| Error::InvalidWeightExpr {
            source_text: self.source.clone(),
            message: format!("division by zero at sizes ({ni}, {nj})"),
        })
    }
}

fn eval_node(node: &ExprNode, ni: &BigRational, nj: &BigRational) -> Option<BigRational> {
    Some(match node {
        ExprNode::Ni => ni.clone(),
        ExprNode::Nj => nj.clone(),
        ExprNode::Literal(v) => v.clone(),
        ExprNode::Add(a, b) => eval_node(a, ni, nj)? + eval_node(b, ni, nj)?,
        ExprNode::Sub(a, b) => eval_node(a, ni, nj)? - eval_node(b, ni, nj)?,
        ExprNode::Mul(a, b) => eval_node(a, ni, nj)? * eval_node(b, ni, nj)?,
        ExprNode::Div(a, b) => {
            let denom = eval_node(b, ni, nj)?;
            if num_traits::Zero::is_zero(&denom) {
                return None;
            }
            eval_node(a, ni, nj)? / denom
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ni,
    Nj,
    Literal(BigRational),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn tokenize(source: &str) -> Result<Vec<Token>> {
    let err = |message: String| Error::InvalidWeightExpr {
        source_text: source.to_string(),
        message,
    };
    let mut tokens = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let value = crate::numeric::parse_exact_rational(&text)
                    .ok_or_else(|| err(format!("bad numeric literal {text:?}")))?;
                tokens.push(Token::Literal(value));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let ident: String = chars[start..i].iter().collect();
                match ident.as_str() {
                    "ni" => tokens.push(Token::Ni),
                    "nj" => tokens.push(Token::Nj),
                    other => return Err(err(format!("unknown identifier {other:?}"))),
                }
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

struct ExprParser<'a> {
    source: &'a str,
    tokens: &'a [Token],
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::InvalidWeightExpr {
            source_text: self.source.to_string(),
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expression(&mut self) -> Result<ExprNode> {
        let mut node = self.term()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Plus => {
                    self.pos += 1;
                    node = ExprNode::Add(Box::new(node), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.pos += 1;
                    node = ExprNode::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<ExprNode> {
        let mut node = self.factor()?;
        while let Some(op) = self.peek().cloned() {
            match op {
                Token::Star => {
                    self.pos += 1;
                    node = ExprNode::Mul(Box::new(node), Box::new(self.factor()?));
                }
                Token::Slash => {
                    self.pos += 1;
                    node = ExprNode::Div(Box::new(node), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<ExprNode> {
        match self.peek().cloned() {
            Some(Token::Ni) => {
                self.pos += 1;
                Ok(ExprNode::Ni)
            }
            Some(Token::Nj) => {
                self.pos += 1;
                Ok(ExprNode::Nj)
            }
            Some(Token::Literal(v)) => {
                self.pos += 1;
                Ok(ExprNode::Literal(v))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expression()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.error("missing closing parenthesis")),
                }
            }
            _ => Err(self.error("expected ni, nj, a number, or a parenthesized expression")),
        }
    }
}

/// Win, loss, and tie probabilities for one weighting. Sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WinTriple<S: WinScalar> {
    pub win: S,
    pub loss: S,
    pub tie: S,
}

impl<S: WinScalar> WinTriple<S> {
    pub fn new(win: S, loss: S, tie: S) -> Self {
        Self { win, loss, tie }
    }

    /// Deviation of win + loss + tie from 1, as f64.
    pub fn sum_error(&self) -> f64 {
        (self.win.clone() + self.loss.clone() + self.tie.clone() - S::one())
            .to_f64()
            .abs()
    }

    pub fn to_f64(&self) -> WinTriple<f64> {
        WinTriple::new(self.win.to_f64(), self.loss.to_f64(), self.tie.to_f64())
    }
}

/// A win ratio or win odds value, which can be +infinity when the
/// denominator is zero but the numerator is not.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioValue<S: WinScalar> {
    Finite(S),
    PositiveInfinity,
}

impl<S: WinScalar> RatioValue<S> {
    pub fn to_f64(&self) -> f64 {
        match self {
            RatioValue::Finite(v) => v.to_f64(),
            RatioValue::PositiveInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, RatioValue::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&S> {
        match self {
            RatioValue::Finite(v) => Some(v),
            RatioValue::PositiveInfinity => None,
        }
    }
}

/// The three summary win estimands derived from a `WinTriple`.
#[derive(Debug, Clone, PartialEq)]
pub struct WinSummary<S: WinScalar> {
    pub win_ratio: RatioValue<S>,
    pub win_odds: RatioValue<S>,
    pub win_difference: S,
}

/// WR = win/loss, WO = (win + tie/2)/(loss + tie/2), WD = win − loss.
///
/// Errors with `UndefinedRatio` when win = loss = 0 (all ties); returns the
/// `PositiveInfinity` ratio flag when only the denominator vanishes.
pub fn summarize<S: WinScalar>(triple: &WinTriple<S>) -> Result<WinSummary<S>> {
    let win = triple.win.clone();
    let loss = triple.loss.clone();
    let tie = triple.tie.clone();
    if win.is_zero() && loss.is_zero() {
        return Err(Error::UndefinedRatio);
    }
    let half = S::ratio(1, 2);
    let win_ratio = if loss.is_zero() {
        RatioValue::PositiveInfinity
    } else {
        RatioValue::Finite(win.clone() / loss.clone())
    };
    let odds_num = win.clone() + half.clone() * tie.clone();
    let odds_den = loss.clone() + half * tie;
    let win_odds = if odds_den.is_zero() {
        RatioValue::PositiveInfinity
    } else {
        RatioValue::Finite(odds_num / odds_den)
    };
    Ok(WinSummary {
        win_ratio,
        win_odds,
        win_difference: win - loss,
    })
}

/// Which summary estimand a downstream computation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    WinRatio,
    WinOdds,
    WinDifference,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::WinRatio, Measure::WinOdds, Measure::WinDifference];

    pub fn name(self) -> &'static str {
        match self {
            Measure::WinRatio => "WR",
            Measure::WinOdds => "WO",
            Measure::WinDifference => "WD",
        }
    }

    /// Extract this measure from a summary as f64 (+inf when flagged).
    pub fn of<S: WinScalar>(self, summary: &WinSummary<S>) -> f64 {
        match self {
            Measure::WinRatio => summary.win_ratio.to_f64(),
            Measure::WinOdds => summary.win_odds.to_f64(),
            Measure::WinDifference => summary.win_difference.to_f64(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn triple(win: f64, loss: f64, tie: f64) -> WinTriple<f64> {
        WinTriple::new(win, loss, tie)
    }

    #[test]
    fn minimal_valid_dataset_accepted() {
        let scale = OrdinalScale::new(["C", "B", "A"]).unwrap();
        let clusters = vec![
            ClusterRecord::new("t1", Arm::Treated, vec![0, 2]),
            ClusterRecord::new("c1", Arm::Control, vec![1]),
        ];
        let ds = TrialDataset::new(scale, clusters).unwrap();
        assert_eq!(ds.num_clusters(), 2);
        assert_eq!(ds.treated_indices(), &[0]);
        assert_eq!(ds.control_indices(), &[1]);
    }

    #[test]
    fn both_arms_required() {
        let scale = OrdinalScale::new(["C", "B", "A"]).unwrap();
        let clusters = vec![
            ClusterRecord::new("t1", Arm::Treated, vec![0]),
            ClusterRecord::new("t2", Arm::Treated, vec![1]),
        ];
        assert!(matches!(
            TrialDataset::new(scale, clusters),
            Err(Error::EmptyArm("control"))
        ));
    }

    #[test]
    fn out_of_scale_rank_rejected() {
        let scale = OrdinalScale::new(["C", "B", "A"]).unwrap();
        let clusters = vec![
            ClusterRecord::new("t1", Arm::Treated, vec![3]),
            ClusterRecord::new("c1", Arm::Control, vec![0]),
        ];
        assert!(matches!(
            TrialDataset::new(scale, clusters),
            Err(Error::UnknownLevel { .. })
        ));
    }

    #[test]
    fn duplicate_cluster_id_rejected() {
        let scale = OrdinalScale::new(["C", "B", "A"]).unwrap();
        let clusters = vec![
            ClusterRecord::new("x", Arm::Treated, vec![0]),
            ClusterRecord::new("x", Arm::Control, vec![1]),
        ];
        assert!(matches!(
            TrialDataset::new(scale, clusters),
            Err(Error::DuplicateClusterId(_))
        ));
    }

    #[test]
    fn summarize_direct_substitution() {
        let s = summarize(&triple(0.5, 0.25, 0.25)).unwrap();
        assert_abs_diff_eq!(s.win_ratio.to_f64(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.win_odds.to_f64(), 0.625 / 0.375, epsilon = 1e-12);
        assert_abs_diff_eq!(s.win_difference, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn summarize_cluster_pair_paper_row() {
        // win/loss/tie from the cluster-pair worked example.
        let s = summarize(&triple(0.306875, 0.34875, 0.344375)).unwrap();
        assert_abs_diff_eq!(s.win_ratio.to_f64(), 0.880, epsilon = 5e-4);
        assert_abs_diff_eq!(s.win_odds.to_f64(), 0.920, epsilon = 5e-4);
        assert_abs_diff_eq!(s.win_difference, -0.042, epsilon = 5e-4);
    }

    #[test]
    fn summarize_null_case() {
        let s = summarize(&triple(0.3, 0.3, 0.4)).unwrap();
        assert_abs_diff_eq!(s.win_ratio.to_f64(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.win_odds.to_f64(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.win_difference, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn summarize_degenerate_cases() {
        assert!(matches!(
            summarize(&triple(0.0, 0.0, 1.0)),
            Err(Error::UndefinedRatio)
        ));
        let s = summarize(&triple(0.6, 0.0, 0.4)).unwrap();
        assert!(matches!(s.win_ratio, RatioValue::PositiveInfinity));
        assert!(s.win_odds.is_finite());
        let s = summarize(&triple(1.0, 0.0, 0.0)).unwrap();
        assert!(matches!(s.win_odds, RatioValue::PositiveInfinity));
    }

    #[test]
    fn csv_ingestion_with_level_override() {
        let data = "cluster_id,arm,outcome\nh1,1,A\nh1,1,B\nh2,0,C\n";
        let levels: Vec<String> = ["C", "B", "A"].iter().map(|s| s.to_string()).collect();
        let ds = TrialDataset::from_csv(data.as_bytes(), Some(&levels)).unwrap();
        assert_eq!(ds.clusters()[0].outcomes, vec![2, 1]);
        assert_eq!(ds.clusters()[1].outcomes, vec![0]);
    }

    #[test]
    fn csv_numeric_levels_sorted_numerically() {
        let data = "cluster_id,arm,outcome\na,1,10\na,1,2\nb,0,3\n";
        let ds = TrialDataset::from_csv(data.as_bytes(), None).unwrap();
        assert_eq!(ds.scale().labels(), ["2", "3", "10"]);
    }

    #[test]
    fn csv_bad_arm_names_row() {
        let data = "cluster_id,arm,outcome\na,1,A\nb,2,B\n";
        match TrialDataset::from_csv(data.as_bytes(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn weight_expr_round_trips() {
        let scheme = WeightScheme::parse("custom:ni*nj").unwrap();
        assert_eq!(
            scheme.weight(3, 4).unwrap(),
            BigRational::from_integer(BigInt::from(12))
        );
        let scheme = WeightScheme::parse("custom:(ni+nj)/2").unwrap();
        assert_eq!(
            scheme.weight(3, 5).unwrap(),
            BigRational::from_integer(BigInt::from(4))
        );
        assert!(WeightScheme::parse("custom:nk").is_err());
        // zero weight rejected
        assert!(WeightScheme::parse("custom:ni-ni")
            .unwrap()
            .weight(2, 2)
            .is_err());
    }
}
