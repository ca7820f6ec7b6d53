use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("point `{label}` maps to unknown label `{image}`")]
    DanglingLabel { label: String, image: String },

    #[error("label `{0}` appears more than once")]
    DuplicateLabel(String),

    #[error("degree must be at least 2, got {0}")]
    DegreeTooSmall(u32),

    #[error("multiplicity sum violation: expected {expected}, found {found}")]
    MultiplicitySum { expected: u32, found: u32 },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("the induced map on marked points is not a bijection")]
    NotPermutation,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("root finder did not converge after {iterations} iterations (backward error {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("fixed point does not reproduce its own coordinates (deviation {deviation:e})")]
    CorruptFixedPoint { deviation: f64 },

    #[error("inverse branch lost at step {step}: jumped {jump:.3e} in chart distance")]
    BranchLost { step: usize, jump: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
