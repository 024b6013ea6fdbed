//! Debiased cross-generator score comparison.
//!
//! Raw judge scores confound generator quality with judge verbosity: the same
//! judge drifts when it writes longer analyses. Regressing scores on one
//! indicator column per generator (no global intercept) plus a centered
//! analysis-length covariate separates the two; the indicator coefficients
//! are the length-adjusted quality scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::evaluator::judge::{JudgeCriterion, JudgeRecord};
use crate::evaluator::EvaluatorError;
use crate::stats::{ols, Design, StatsError};

/// Name of the verbosity covariate in the regression design.
const LENGTH_COLUMN: &str = "judge_length";

/// Length-adjusted per-generator scores for one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasResult {
    /// Generator id -> debiased score (the fitted indicator coefficient).
    pub scores: BTreeMap<String, f64>,
    /// Fitted score shift per word of judge analysis.
    pub length_coefficient: f64,
    /// Two-sided significance of the length coefficient.
    pub length_p_value: f64,
    /// True when analysis lengths carried no usable variation and the scores
    /// are plain per-generator means instead of regression coefficients.
    pub fallback: bool,
}

/// Fit debiased scores for every generator appearing in `records` under the
/// given criterion.
///
/// Needs records from at least two generators (the point is comparison) and
/// at least three per generator (fewer makes the indicator coefficient an
/// anecdote, not an estimate). When analysis lengths are constant — globally
/// or within every generator — the covariate is unidentifiable, so the fit
/// falls back to raw per-generator means and says so.
pub fn debias_scores(
    records: &[JudgeRecord],
    criterion: JudgeCriterion,
) -> Result<DebiasResult, EvaluatorError> {
    let rows: Vec<&JudgeRecord> = records
        .iter()
        .filter(|r| r.criterion == criterion)
        .collect();
    let mut generators: Vec<&str> = Vec::new();
    for r in &rows {
        if !generators.contains(&r.generator_id.as_str()) {
            generators.push(&r.generator_id);
        }
    }
    if generators.len() < 2 {
        return Err(EvaluatorError::Input(format!(
            "debiasing compares generators, so records from at least two are needed; got {}",
            generators.len()
        )));
    }
    let thin: Vec<&str> = generators
        .iter()
        .filter(|g| rows.iter().filter(|r| r.generator_id == **g).count() < 3)
        .copied()
        .collect();
    if !thin.is_empty() {
        return Err(EvaluatorError::Input(format!(
            "each generator needs at least three records to fit; too few for: {}",
            thin.join(", ")
        )));
    }

    let mean_length =
        rows.iter().map(|r| r.rationale_length as f64).sum::<f64>() / rows.len() as f64;
    let mut design = Design::new();
    for g in &generators {
        design.push(
            format!("gen:{g}"),
            rows.iter()
                .map(|r| if r.generator_id == *g { 1.0 } else { 0.0 })
                .collect(),
        );
    }
    design.push(
        LENGTH_COLUMN,
        rows.iter()
            .map(|r| r.rationale_length as f64 - mean_length)
            .collect(),
    );
    let y: Vec<f64> = rows.iter().map(|r| r.score).collect();

    match ols(&design, &y) {
        Ok(fit) => Ok(DebiasResult {
            scores: generators
                .iter()
                .map(|g| {
                    (
                        g.to_string(),
                        fit.coefficients[format!("gen:{g}").as_str()],
                    )
                })
                .collect(),
            length_coefficient: fit.coefficients[LENGTH_COLUMN],
            length_p_value: fit.p_values[LENGTH_COLUMN],
            fallback: false,
        }),
        Err(StatsError::Collinear { column }) if column == LENGTH_COLUMN => {
            let mut scores = BTreeMap::new();
            for g in &generators {
                let group: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.generator_id == *g)
                    .map(|r| r.score)
                    .collect();
                scores.insert(
                    g.to_string(),
                    group.iter().sum::<f64>() / group.len() as f64,
                );
            }
            Ok(DebiasResult {
                scores,
                length_coefficient: 0.0,
                length_p_value: 1.0,
                fallback: true,
            })
        }
        Err(e) => Err(e.into()),
    }
}

/// Rescale debiased scores so the named reference generator sits at 1.
pub fn calibrate_against(
    result: &DebiasResult,
    reference: &str,
) -> Result<BTreeMap<String, f64>, EvaluatorError> {
    let base = *result.scores.get(reference).ok_or_else(|| {
        EvaluatorError::Input(format!(
            "no generator `{reference}` among the debiased scores"
        ))
    })?;
    if base.abs() < 1e-12 {
        return Err(EvaluatorError::Input(format!(
            "reference generator `{reference}` scored {base}; cannot normalize against zero"
        )));
    }
    Ok(result
        .scores
        .iter()
        .map(|(g, s)| (g.clone(), s / base))
        .collect())
}
