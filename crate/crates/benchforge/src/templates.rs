//! Prompt templates bundled at compile time, with optional overrides loaded
//! from a directory of plain-text files.
//!
//! Placeholders use the `{{name}}` form. [`fill`] substitutes only the names
//! it is given; unknown placeholders survive verbatim, which several templates
//! rely on to show literal `{{...}}` examples to the model.

use std::fmt;
use std::path::Path;

/// The complete set of prompt templates used by the generator and evaluator.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    /// Staged benchmark-generation prompt (analyses, question, reasoning, candidates, answer).
    pub staged: String,
    /// Single-stage baseline generation prompt.
    pub direct: String,
    /// Judge prompt scoring whether a rationale correctly answers its question.
    pub faithfulness_judge: String,
    /// Judge prompt contrasting two candidate answers to the same question.
    pub comparison_judge: String,
    /// Judge prompt scoring whether a question tests a stated ability.
    pub relevance_judge: String,
    /// Prompt asking for general attribute dimensions and values.
    pub attributes: String,
    /// Prompt asking for difficulty strategies as ordered tier ladders.
    pub strategies: String,
    /// Prompt instructing a model to answer a multiple-choice question.
    pub test_taker: String,
    /// Prompt asking for a fresh reasoning path toward a fixed option.
    pub rationale: String,
    /// Prompt rewriting a terse assessment demand into a detailed one.
    pub demand_rewrite: String,
    /// Difficulty level descriptions, one line per level, easiest first.
    pub difficulty_levels: Vec<String>,
}

/// Error raised when loading template overrides from disk.
#[derive(Debug)]
pub struct TemplateError {
    /// File name that failed to load.
    pub name: String,
    /// Underlying I/O failure.
    pub source: std::io::Error,
}

impl fmt::Display for TemplateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "failed to read template `{}`: {}", self.name, self.source)
    }
}

impl std::error::Error for TemplateError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    /// The templates compiled into the library.
    pub fn builtin() -> Self {
        Self {
            staged: include_str!("assets/staged_prompt.txt").to_string(),
            direct: include_str!("assets/direct_prompt.txt").to_string(),
            faithfulness_judge: include_str!("assets/faithfulness_judge.txt").to_string(),
            comparison_judge: include_str!("assets/comparison_judge.txt").to_string(),
            relevance_judge: include_str!("assets/relevance_judge.txt").to_string(),
            attributes: include_str!("assets/attributes_prompt.txt").to_string(),
            strategies: include_str!("assets/strategies_prompt.txt").to_string(),
            test_taker: include_str!("assets/test_taker_prompt.txt").to_string(),
            rationale: include_str!("assets/rationale_prompt.txt").to_string(),
            demand_rewrite: include_str!("assets/demand_rewrite_prompt.txt").to_string(),
            difficulty_levels: parse_levels(include_str!("assets/difficulty_levels.txt")),
        }
    }

    /// Builtin templates with per-file overrides from `dir`.
    ///
    /// A file named after the template (e.g. `staged_prompt.txt`) replaces the
    /// builtin text; missing files keep the builtin version.
    pub fn from_dir(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = Self::builtin();
        override_text(dir, "staged_prompt.txt", &mut set.staged)?;
        override_text(dir, "direct_prompt.txt", &mut set.direct)?;
        override_text(dir, "faithfulness_judge.txt", &mut set.faithfulness_judge)?;
        override_text(dir, "comparison_judge.txt", &mut set.comparison_judge)?;
        override_text(dir, "relevance_judge.txt", &mut set.relevance_judge)?;
        override_text(dir, "attributes_prompt.txt", &mut set.attributes)?;
        override_text(dir, "strategies_prompt.txt", &mut set.strategies)?;
        override_text(dir, "test_taker_prompt.txt", &mut set.test_taker)?;
        override_text(dir, "rationale_prompt.txt", &mut set.rationale)?;
        override_text(dir, "demand_rewrite_prompt.txt", &mut set.demand_rewrite)?;
        let mut levels = String::new();
        override_text(dir, "difficulty_levels.txt", &mut levels)?;
        if !levels.is_empty() {
            set.difficulty_levels = parse_levels(&levels);
        }
        Ok(set)
    }

    /// Description line for a 1-based difficulty level, if defined.
    pub fn difficulty_level(&self, level: u32) -> Option<&str> {
        if level == 0 {
            return None;
        }
        self.difficulty_levels
            .get(level as usize - 1)
            .map(String::as_str)
    }
}

fn parse_levels(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

fn override_text(dir: &Path, name: &str, slot: &mut String) -> Result<(), TemplateError> {
    let path = dir.join(name);
    if !path.exists() {
        return Ok(());
    }
    match std::fs::read_to_string(&path) {
        Ok(text) => {
            *slot = text;
            Ok(())
        }
        Err(source) => Err(TemplateError {
            name: name.to_string(),
            source,
        }),
    }
}

/// Substitute `{{name}}` placeholders for the provided `(name, value)` pairs.
///
/// The template is scanned once, left to right. Placeholders whose name is not
/// in `values` are copied through unchanged, and substituted values are never
/// rescanned, so a value may safely contain `{{...}}` text of its own.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("}}") {
            Some(end) => {
                let key = &after[..end];
                match values.iter().find(|(name, _)| *name == key) {
                    Some((_, value)) => {
                        out.push_str(value);
                        rest = &after[end + 2..];
                    }
                    None => {
                        out.push_str("{{");
                        rest = after;
                    }
                }
            }
            None => {
                out.push_str("{{");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}
