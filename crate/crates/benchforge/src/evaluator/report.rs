//! Evaluation reports: one benchmark scored under the ten criteria, stored as
//! JSON and rendered as a comparison table.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::evaluator::metrics::EfficiencyValue;
use crate::evaluator::EvaluatorError;
use crate::io::{atomic_write, clean_serde_message, FileError};
use crate::stats::CorrelationResult;

/// The ten criteria, in report column order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Faithfulness,
    Alignment,
    LexicalDiversity,
    SemanticDiversity,
    KnowledgeCoverage,
    Controllability,
    Boundary,
    Effectiveness,
    Robustness,
    Efficiency,
}

impl Criterion {
    pub const ALL: [Criterion; 10] = [
        Criterion::Faithfulness,
        Criterion::Alignment,
        Criterion::LexicalDiversity,
        Criterion::SemanticDiversity,
        Criterion::KnowledgeCoverage,
        Criterion::Controllability,
        Criterion::Boundary,
        Criterion::Effectiveness,
        Criterion::Robustness,
        Criterion::Efficiency,
    ];

    /// Stable identifier, matching the JSON spelling.
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Faithfulness => "faithfulness",
            Criterion::Alignment => "alignment",
            Criterion::LexicalDiversity => "lexical_diversity",
            Criterion::SemanticDiversity => "semantic_diversity",
            Criterion::KnowledgeCoverage => "knowledge_coverage",
            Criterion::Controllability => "controllability",
            Criterion::Boundary => "boundary",
            Criterion::Effectiveness => "effectiveness",
            Criterion::Robustness => "robustness",
            Criterion::Efficiency => "efficiency",
        }
    }

    /// Column header in the comparison table.
    pub fn title(self) -> &'static str {
        match self {
            Criterion::Faithfulness => "Faithful",
            Criterion::Alignment => "Alignment",
            Criterion::LexicalDiversity => "Lexical",
            Criterion::SemanticDiversity => "Semantic",
            Criterion::KnowledgeCoverage => "Knowledge",
            Criterion::Controllability => "Control",
            Criterion::Boundary => "Boundary",
            Criterion::Effectiveness => "Effective",
            Criterion::Robustness => "Robust",
            Criterion::Efficiency => "Efficiency",
        }
    }

    /// The dimension a criterion scores; `ALL` keeps each dimension's
    /// criteria adjacent, so reports group naturally.
    pub fn dimension(self) -> &'static str {
        match self {
            Criterion::Faithfulness | Criterion::Alignment => "credibility",
            Criterion::LexicalDiversity
            | Criterion::SemanticDiversity
            | Criterion::KnowledgeCoverage => "diversity",
            Criterion::Controllability | Criterion::Boundary => "difficulty",
            Criterion::Effectiveness | Criterion::Robustness | Criterion::Efficiency => {
                "benchmark-level"
            }
        }
    }
}

/// A criterion's value. Serialized untagged, so the variants must stay
/// distinguishable by field set alone — `Correlation` and `Efficiency` are
/// tried before the catch-all `Scalar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CriterionValue {
    Correlation { value: f64, p_value: f64 },
    Efficiency {
        dollars_per_item: f64,
        minutes_per_item: f64,
    },
    Scalar { value: f64 },
}

impl From<f64> for CriterionValue {
    fn from(value: f64) -> Self {
        CriterionValue::Scalar { value }
    }
}

impl From<CorrelationResult> for CriterionValue {
    fn from(c: CorrelationResult) -> Self {
        CriterionValue::Correlation {
            value: c.r,
            p_value: c.p_value,
        }
    }
}

impl From<EfficiencyValue> for CriterionValue {
    fn from(e: EfficiencyValue) -> Self {
        CriterionValue::Efficiency {
            dollars_per_item: e.dollars_per_item,
            minutes_per_item: e.minutes_per_item,
        }
    }
}

/// One benchmark's evaluation: whatever criteria could be computed, plus a
/// warning for each one that could not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Identity of the generation method (the benchmark's generator id).
    pub method: String,
    /// Name of the assessment demand the benchmark answers.
    pub demand: String,
    pub sample_count: usize,
    /// Estimated fraction of mislabeled samples (zero-scored faithfulness
    /// judgments), when faithfulness was judged.
    pub noise_fraction: Option<f64>,
    pub criteria: BTreeMap<Criterion, CriterionValue>,
    pub warnings: Vec<String>,
}

/// Accumulates criteria for one report, rejecting duplicates; omissions
/// become warnings at build time.
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    report: EvaluationReport,
}

impl ReportBuilder {
    pub fn new(
        method: impl Into<String>,
        demand: impl Into<String>,
        sample_count: usize,
    ) -> Self {
        Self {
            report: EvaluationReport {
                method: method.into(),
                demand: demand.into(),
                sample_count,
                noise_fraction: None,
                criteria: BTreeMap::new(),
                warnings: Vec::new(),
            },
        }
    }

    pub fn with_noise_fraction(mut self, noise_fraction: Option<f64>) -> Self {
        self.report.noise_fraction = noise_fraction;
        self
    }

    /// Record a criterion's value; each criterion may be set once.
    pub fn set(
        &mut self,
        criterion: Criterion,
        value: impl Into<CriterionValue>,
    ) -> Result<(), EvaluatorError> {
        if self.report.criteria.contains_key(&criterion) {
            return Err(EvaluatorError::DuplicateCriterion(
                criterion.name().to_string(),
            ));
        }
        self.report.criteria.insert(criterion, value.into());
        Ok(())
    }

    /// Attach a free-form warning (an input that was missing, a metric that
    /// failed) to the report.
    pub fn warn(&mut self, message: impl Into<String>) {
        self.report.warnings.push(message.into());
    }

    /// Finish the report, adding one warning per criterion never set.
    pub fn build(self) -> EvaluationReport {
        let mut report = self.report;
        for criterion in Criterion::ALL {
            if !report.criteria.contains_key(&criterion) {
                report
                    .warnings
                    .push(format!("criterion `{}` was not evaluated", criterion.name()));
            }
        }
        report
    }
}

fn render_cell(value: Option<&CriterionValue>) -> String {
    match value {
        None => "-".to_string(),
        Some(CriterionValue::Scalar { value }) => format!("{value:.3}"),
        Some(CriterionValue::Correlation { value, p_value }) => {
            format!("{value:.3} (p={p_value:.3})")
        }
        Some(CriterionValue::Efficiency {
            dollars_per_item,
            minutes_per_item,
        }) => format!("${dollars_per_item:.4} / {minutes_per_item:.2} min"),
    }
}

/// Render reports as a side-by-side comparison table, one row per method,
/// with `-` for criteria a report does not carry. Noise estimates and
/// warnings follow as notes.
pub fn report_markdown(reports: &[EvaluationReport]) -> String {
    let mut out = String::from(
        "| Methods | Faithful | Alignment | Lexical | Semantic | Knowledge | Control | Boundary | Effective | Robust | Efficiency |\n",
    );
    out.push_str("| --- | --- | --- | --- | --- | --- | --- | --- | --- | --- | --- |\n");
    for report in reports {
        out.push_str(&format!("| {} ", report.method));
        for criterion in Criterion::ALL {
            out.push_str(&format!("| {} ", render_cell(report.criteria.get(&criterion))));
        }
        out.push_str("|\n");
    }

    let mut notes = Vec::new();
    for report in reports {
        if let Some(noise) = report.noise_fraction {
            notes.push(format!(
                "- {}: estimated noise rate {noise:.3}",
                report.method
            ));
        }
        for warning in &report.warnings {
            notes.push(format!("- {}: {warning}", report.method));
        }
    }
    if !notes.is_empty() {
        out.push_str("\nNotes:\n");
        for note in notes {
            out.push_str(&note);
            out.push('\n');
        }
    }
    out
}

/// Write a report as pretty-printed JSON, atomically.
pub fn write_report(path: &Path, report: &EvaluationReport) -> Result<(), FileError> {
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    atomic_write(path, json.as_bytes())
}

/// Read a report written by [`write_report`].
pub fn read_report(path: &Path) -> Result<EvaluationReport, FileError> {
    let raw = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&raw).map_err(|e| FileError::Malformed {
        path: path.to_path_buf(),
        line: e.line(),
        message: clean_serde_message(&e),
    })
}
