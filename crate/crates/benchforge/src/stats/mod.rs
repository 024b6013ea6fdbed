//! Self-contained statistical kernel.
//!
//! Pure functions only: correlations with significance levels, least squares
//! on named design matrices, word-frequency entropy, mean pairwise
//! distances, and the special functions (normal CDF, incomplete beta,
//! Student's t tails) they rest on.

mod corr;
mod distance;
mod entropy;
mod ols;
pub mod special;

pub use corr::{midranks, partial_correlation, pearson, spearman, CorrelationResult};
pub use distance::{mean_pairwise_euclidean, mean_pairwise_hamming};
pub use entropy::{token_counts, tokenize, word_entropy, word_entropy_with, EntropyEstimator};
pub use ols::{ols, Design, RegressionFit};
pub use special::{incomplete_beta, ln_gamma, normal_cdf, students_t_two_sided_p};

/// Failure modes shared across kernel operations.
#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("length mismatch in {context}: {left} vs {right}")]
    LengthMismatch {
        left: usize,
        right: usize,
        context: String,
    },
    #[error("too few observations for {context}: got {got}, need at least {need}")]
    TooFewObservations {
        got: usize,
        need: usize,
        context: String,
    },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("design column `{column}` is numerically dependent on earlier columns")]
    Collinear { column: String },
    #[error("corpus contains no tokens")]
    EmptyCorpus,
    #[error("vector {index} has dimension {got}, expected {want}")]
    DimensionMismatch {
        index: usize,
        got: usize,
        want: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}
