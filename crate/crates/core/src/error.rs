use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("frequency grid of {grid} points is too coarse; need at least {needed}")]
    GridTooSmall { grid: usize, needed: usize },

    #[error("assembled block `{block}` is acausal at offset {offset}: {offenders:?}")]
    CausalityViolation {
        block: String,
        offset: i64,
        offenders: Vec<(i32, f64)>,
    },

    #[error("design matrix is rank deficient at column {column} (|r_kk| = {pivot:e})")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("evaluation point is within {magnitude:e} of a pole of the controller")]
    PoleProximity { magnitude: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
