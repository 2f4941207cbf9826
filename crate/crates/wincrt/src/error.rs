use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no {0} clusters in dataset; estimator denominator would be zero")]
    EmptyArm(&'static str),
    #[error("outcome label {label:?} is not a level of the ordinal scale (cluster {cluster_id})")]
    UnknownLevel { label: String, cluster_id: String },
    #[error("duplicate cluster id {0:?}")]
    DuplicateClusterId(String),
    #[error("cluster {0:?} has no outcomes")]
    EmptyCluster(String),
    #[error("win ratio is undefined: win and loss probabilities are both zero")]
    UndefinedRatio,
    #[error("deleting cluster {cluster_id:?} would empty the {arm} arm")]
    DegenerateDeletion {
        cluster_id: String,
        arm: &'static str,
    },
    #[error("cluster {0:?} is not part of the contribution table")]
    UnknownCluster(String),
    #[error("jackknife requires at least {required} clusters under the {df_rule} rule, got {got}")]
    InsufficientClusters {
        required: usize,
        got: usize,
        df_rule: &'static str,
    },
    #[error("invalid superpopulation spec: {0}")]
    InvalidSpec(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid ordinal scale: {0}")]
    InvalidScale(String),
    #[error("invalid weight expression {source_text:?}: {message}")]
    InvalidWeightExpr {
        source_text: String,
        message: String,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
