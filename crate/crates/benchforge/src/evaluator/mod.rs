//! Benchmark quality evaluation.
//!
//! A benchmark is scored under ten criteria: judged faithfulness and
//! demand alignment; lexical, semantic, and knowledge-coverage diversity;
//! difficulty controllability and boundary pressure; effectiveness and
//! robustness as agreement with held-out model rankings; and per-item cost.
//! Judge scores can additionally be debiased against verbosity and compared
//! across generators.

pub mod debias;
pub mod judge;
pub mod matrix;
pub mod metrics;
pub mod report;
pub mod scan;

use thiserror::Error;

pub use debias::{calibrate_against, debias_scores, DebiasResult};
pub use judge::{
    judge_alignment, judge_faithfulness, noise_fraction, read_judgments, write_judgments,
    JudgeCriterion, JudgeRecord,
};
pub use matrix::{shared_model_accuracies, CorrectnessMatrix, CorrectnessRecord};
pub use metrics::{
    boundary_error_rate, controllability, effectiveness, efficiency, knowledge_coverage,
    lexical_diversity, robustness, semantic_diversity, EfficiencyValue,
};
pub use report::{
    read_report, report_markdown, write_report, Criterion, CriterionValue, EvaluationReport,
    ReportBuilder,
};
pub use scan::{
    bias_scan, rows_from_judgments, BiasCell, BiasScanResult, BiasScanRow, PartialCell,
};

use crate::providers::ProviderError;
use crate::stats::StatsError;

/// Errors from evaluation.
#[derive(Debug, Error)]
pub enum EvaluatorError {
    /// The provider failed in a way its own retries could not absorb.
    #[error(transparent)]
    Provider(#[from] ProviderError),
    /// A statistical computation rejected its input.
    #[error(transparent)]
    Stats(#[from] StatsError),
    /// A judge reply stayed unusable through every parse attempt.
    #[error("judge reply for sample {sample_id} unusable after {attempts} attempts: {message}")]
    JudgeUnusable {
        sample_id: String,
        attempts: u32,
        message: String,
    },
    /// Correctness records do not form a complete model-by-sample matrix.
    #[error("correctness records: {0}")]
    Matrix(String),
    /// The inputs cannot support the requested metric.
    #[error("{0}")]
    Input(String),
    /// The same criterion was supplied to a report twice.
    #[error("criterion `{0}` supplied twice")]
    DuplicateCriterion(String),
}
