//! Toolkit for synthesizing multiple-choice benchmarks from free-text
//! assessment demands and judging the result under a ten-criterion framework.
//!
//! The crate is organized around the lifecycle of a benchmark:
//!
//! * [`types`] — domain types (samples, benchmarks, demands) plus validation
//!   and the MCQ → open-text conversion.
//! * [`io`] — line-delimited file formats for benchmarks, correctness
//!   matrices, judgments, and demand files.
//! * [`stats`] — self-contained numerical kernel (correlations, least
//!   squares, entropy, pairwise distances, normal/t distributions).
//! * [`providers`] — chat/embedding backends behind one trait, with usage
//!   metering; includes a deterministic scripted mock.
//! * [`generator`] — the staged drafting pipeline: attribute and strategy
//!   synthesis, difficulty estimation, conflict resolution, reference
//!   diffusion, and diversity boosting.
//! * [`evaluator`] — judge scoring, length-debiasing, bias scans, and the
//!   ten-criterion evaluation report.
//! * [`reliability`] — noise-aware significance test for model rankings,
//!   with a Monte-Carlo self-check.

pub mod evaluator;
pub mod generator;
pub mod io;
pub mod providers;
pub mod reliability;
pub mod stats;
pub mod templates;
pub mod types;
