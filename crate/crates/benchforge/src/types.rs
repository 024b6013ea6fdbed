//! Domain types shared across the toolkit: samples, benchmarks, assessment
//! demands, usage meters, and the MCQ → open-text conversion.
//!
//! Option labels are 0-based indices everywhere inside the crate; letters
//! (A, B, C, ...) exist only at the prompt/report boundary via
//! [`option_letter`] and [`letter_to_index`].

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use serde::{Deserialize, Serialize};

/// One multiple-choice item with its generation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Generator-assigned id ("s000001", monotonically increasing).
    pub id: String,
    pub question: String,
    /// Reasoning path supporting the labeled answer.
    pub rationale: String,
    pub options: Vec<String>,
    /// 0-based index of the correct option.
    pub label: usize,
    /// Estimated difficulty: fraction of test-taker attempts that missed.
    pub difficulty_label: Option<f64>,
    /// Difficulty level requested from the direct baseline generator (1-10).
    pub declared_level: Option<u32>,
    /// Attribute dimension -> value drawn for this sample.
    pub attributes: BTreeMap<String, String>,
    /// Difficulty-strategy tier texts injected into the drafting prompt.
    pub strategies: Vec<String>,
    /// How many times this sample has served as a reference demonstration.
    pub reference_uses: u32,
}

impl Sample {
    /// Minimal well-formed sample; generation metadata starts empty.
    pub fn new(
        id: impl Into<String>,
        question: impl Into<String>,
        rationale: impl Into<String>,
        options: Vec<String>,
        label: usize,
    ) -> Self {
        Self {
            id: id.into(),
            question: question.into(),
            rationale: rationale.into(),
            options,
            label,
            difficulty_label: None,
            declared_level: None,
            attributes: BTreeMap::new(),
            strategies: Vec::new(),
            reference_uses: 0,
        }
    }
}

/// Free-text description of what a benchmark should assess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentDemand {
    pub name: String,
    pub text: String,
    /// Number of options every generated sample must carry.
    pub option_count: usize,
}

/// Accumulated provider usage. Deltas and totals share this shape; totals
/// are sums of deltas.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UsageMeter {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub wall_seconds: f64,
    pub dollars: f64,
    /// True when any token count came from the whitespace heuristic rather
    /// than a backend-reported figure.
    pub estimated: bool,
}

impl UsageMeter {
    pub fn add(&mut self, delta: &UsageMeter) {
        self.prompt_tokens += delta.prompt_tokens;
        self.completion_tokens += delta.completion_tokens;
        self.wall_seconds += delta.wall_seconds;
        self.dollars += delta.dollars;
        self.estimated |= delta.estimated;
    }
}

/// A generated benchmark: the demand it answers, its samples, and the
/// provider usage spent producing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub demand: AssessmentDemand,
    pub samples: Vec<Sample>,
    pub generator_id: String,
    /// UTC, second precision.
    #[serde(with = "utc_seconds")]
    pub created_at: DateTime<Utc>,
    pub usage: UsageMeter,
}

/// Open-text item produced by hiding a sample's options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenTextItem {
    pub question: String,
    pub reference_solution: String,
    pub reference_answer: String,
}

/// Letter shown for a 0-based option index (A, B, C, ...). None past 'Z'.
pub fn option_letter(index: usize) -> Option<char> {
    if index < 26 {
        Some((b'A' + index as u8) as char)
    } else {
        None
    }
}

/// 0-based option index for a letter, case-insensitive.
pub fn letter_to_index(letter: char) -> Option<usize> {
    let upper = letter.to_ascii_uppercase();
    if upper.is_ascii_uppercase() {
        Some((upper as u8 - b'A') as usize)
    } else {
        None
    }
}

/// Current UTC time truncated to whole seconds.
pub fn now_utc_seconds() -> DateTime<Utc> {
    truncate_to_seconds(Utc::now())
}

/// Drop sub-second precision so timestamps round-trip through the file
/// format unchanged.
pub fn truncate_to_seconds(dt: DateTime<Utc>) -> DateTime<Utc> {
    Utc.timestamp_opt(dt.timestamp(), 0).unwrap()
}

mod utc_seconds {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(dt: &DateTime<Utc>, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&dt.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(de)?;
        let parsed = DateTime::parse_from_rfc3339(&raw).map_err(serde::de::Error::custom)?;
        Ok(truncate_to_seconds(parsed.with_timezone(&Utc)))
    }
}

/// Check every structural invariant of a sample; returns one message per
/// violation (empty means valid).
pub fn validate_sample(sample: &Sample) -> Vec<String> {
    let mut violations = Vec::new();
    if sample.question.trim().is_empty() {
        violations.push("question is empty".to_string());
    }
    if sample.options.len() < 2 {
        violations.push(format!(
            "needs at least two options, has {}",
            sample.options.len()
        ));
    }
    for (i, opt) in sample.options.iter().enumerate() {
        if opt.trim().is_empty() {
            violations.push(format!("option {i} is empty"));
        }
    }
    for i in 0..sample.options.len() {
        for j in i + 1..sample.options.len() {
            if sample.options[i] == sample.options[j] {
                violations.push(format!("options {i} and {j} are identical"));
            }
        }
    }
    if sample.label >= sample.options.len() {
        violations.push(format!(
            "label {} out of range for {} options",
            sample.label,
            sample.options.len()
        ));
    }
    if let Some(d) = sample.difficulty_label {
        if !d.is_finite() || !(0.0..=1.0).contains(&d) {
            violations.push(format!("difficulty_label {d} outside [0, 1]"));
        }
    }
    if let Some(level) = sample.declared_level {
        if !(1..=10).contains(&level) {
            violations.push(format!("declared_level {level} outside 1..=10"));
        }
    }
    violations
}

/// Error converting an invalid sample.
#[derive(Debug, thiserror::Error)]
#[error("sample `{id}` cannot be converted: {}", violations.join("; "))]
pub struct ConversionError {
    pub id: String,
    pub violations: Vec<String>,
}

/// Convert a multiple-choice sample to open-text form by hiding the options:
/// the rationale becomes the reference solution and the labeled option text
/// the reference answer.
pub fn mcq_to_otg(sample: &Sample) -> Result<OpenTextItem, ConversionError> {
    let violations = validate_sample(sample);
    if !violations.is_empty() {
        return Err(ConversionError {
            id: sample.id.clone(),
            violations,
        });
    }
    Ok(OpenTextItem {
        question: sample.question.clone(),
        reference_solution: sample.rationale.clone(),
        reference_answer: sample.options[sample.label].clone(),
    })
}
