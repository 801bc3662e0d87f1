use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree {degree} exceeds the bound {bound}")]
    DegreeBound { degree: usize, bound: usize },

    #[error("partial fractions need distinct shifts, got {0} twice")]
    CoincidentShifts(u32),

    #[error("invalid elementary sum: {0}")]
    InvalidElementarySum(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("series diverges: {0}")]
    Divergent(String),

    #[error("Delta mismatch: factor has Delta = {found}, expected {expected}")]
    DeltaMismatch { expected: u32, found: u32 },

    #[error("index condition violated on factors {j1}..={j2}: sum = {sum}, bound = {bound}")]
    IndexCondition {
        j1: usize,
        j2: usize,
        sum: i64,
        bound: i64,
    },

    #[error("parameter validation failed: {0}")]
    Validation(String),

    #[error("negative power z^{power} carries nonzero coefficient {coefficient}")]
    NegativePower { power: i64, coefficient: String },

    #[error("series windows have different orders ({0} vs {1})")]
    WindowMismatch(usize, usize),

    #[error(
        "no stabilization within budget: last agreement {agreement:e} at truncation {truncation}"
    )]
    NotStabilized { agreement: f64, truncation: usize },

    #[error("structure check failed: {0}")]
    Structure(String),

    #[error("evaluation hits a pole at x = {0}")]
    Pole(i64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
