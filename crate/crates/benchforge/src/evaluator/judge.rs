//! LLM-judged criteria: faithfulness of each sample's rationale to its
//! question, and alignment of each question with the assessment demand.
//!
//! Judge replies end in `Judgement:` followed by 0, 0.5, or 1. The analysis
//! text before that marker is kept (as a token count) because verbose judges
//! systematically shift scores; the debiasing fit uses it as a covariate.

use std::path::Path;

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use crate::evaluator::EvaluatorError;
use crate::generator::render_options;
use crate::io::{read_jsonl_records, write_jsonl_records, FileError};
use crate::providers::{ChatRequest, Provider};
use crate::templates::{fill, TemplateSet};
use crate::types::{option_letter, Benchmark, Sample};

/// Which judged criterion a record scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeCriterion {
    Faithfulness,
    Alignment,
}

/// One judged sample: the score plus the evidence needed to debias it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRecord {
    pub sample_id: String,
    /// Identity of the generator that produced the judged sample.
    pub generator_id: String,
    pub criterion: JudgeCriterion,
    /// 0 (wrong / unrelated), 0.5 (partial), or 1 (endorsed).
    pub score: f64,
    /// Tokens of judge analysis preceding the final `Judgement:` marker,
    /// counted with the lexical-entropy tokenizer.
    pub rationale_length: u64,
    /// Full judge reply, kept for auditing.
    pub raw_text: String,
}

/// Extract (score, analysis token count) from a judge reply.
///
/// The score is the first numeric run after the *last* `Judgement:` marker
/// (judges sometimes restate the template earlier in their analysis) and must
/// be exactly 0, 0.5, or 1. The analysis is counted with the same tokenizer
/// the lexical-entropy metric uses, so lengths are comparable across metrics.
fn parse_judge_reply(text: &str) -> Result<(f64, u64), String> {
    const MARKER: &str = "Judgement:";
    let at = text
        .rfind(MARKER)
        .ok_or_else(|| format!("no `{MARKER}` marker in reply"))?;
    let analysis_words = crate::stats::tokenize(&text[..at]).len() as u64;
    let after = &text[at + MARKER.len()..];
    let start = after
        .find(|c: char| c.is_ascii_digit())
        .ok_or_else(|| format!("no digits after `{MARKER}`"))?;
    let run: String = after[start..]
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '.')
        .collect();
    let score: f64 = run
        .trim_end_matches('.')
        .parse()
        .map_err(|_| format!("unparseable score `{run}`"))?;
    if score != 0.0 && score != 0.5 && score != 1.0 {
        return Err(format!("score {score} is not one of 0, 0.5, 1"));
    }
    Ok((score, analysis_words))
}

/// The question as judges see it: stem plus lettered options.
fn question_block(sample: &Sample) -> String {
    format!(
        "{}\nOptions:\n{}",
        sample.question,
        render_options(&sample.options)
    )
}

/// The response a faithfulness judge checks: the rationale plus the labeled
/// option as its final answer.
fn response_block(sample: &Sample) -> String {
    format!(
        "{}\nFinal answer: {}. {}",
        sample.rationale,
        option_letter(sample.label).unwrap_or('?'),
        sample.options[sample.label]
    )
}

/// Run one judge prompt per sample concurrently, retrying unusable replies.
async fn judge_all(
    provider: &dyn Provider,
    criterion: JudgeCriterion,
    generator_id: &str,
    prompts: Vec<(String, String)>,
    parse_attempts: u32,
    workers: usize,
) -> Result<Vec<JudgeRecord>, EvaluatorError> {
    let attempts = parse_attempts.max(1);
    let futures = prompts.into_iter().map(|(sample_id, prompt)| async move {
        let request = ChatRequest::user(prompt);
        let mut last = String::new();
        for _ in 0..attempts {
            let reply = provider.chat(&request).await?;
            match parse_judge_reply(&reply.text) {
                Ok((score, rationale_length)) => {
                    return Ok(JudgeRecord {
                        sample_id,
                        generator_id: generator_id.to_string(),
                        criterion,
                        score,
                        rationale_length,
                        raw_text: reply.text,
                    })
                }
                Err(message) => last = message,
            }
        }
        Err(EvaluatorError::JudgeUnusable {
            sample_id,
            attempts,
            message: last,
        })
    });
    stream::iter(futures)
        .buffered(workers.max(1))
        .collect::<Vec<_>>()
        .await
        .into_iter()
        .collect()
}

/// Judge whether each sample's rationale correctly answers its question.
pub async fn judge_faithfulness(
    provider: &dyn Provider,
    templates: &TemplateSet,
    benchmark: &Benchmark,
    parse_attempts: u32,
    workers: usize,
) -> Result<Vec<JudgeRecord>, EvaluatorError> {
    let prompts = benchmark
        .samples
        .iter()
        .map(|s| {
            let prompt = fill(
                &templates.faithfulness_judge,
                &[
                    ("question", question_block(s).as_str()),
                    ("response", response_block(s).as_str()),
                ],
            );
            (s.id.clone(), prompt)
        })
        .collect();
    judge_all(
        provider,
        JudgeCriterion::Faithfulness,
        &benchmark.generator_id,
        prompts,
        parse_attempts,
        workers,
    )
    .await
}

/// Judge whether each question actually tests the demanded ability.
pub async fn judge_alignment(
    provider: &dyn Provider,
    templates: &TemplateSet,
    benchmark: &Benchmark,
    parse_attempts: u32,
    workers: usize,
) -> Result<Vec<JudgeRecord>, EvaluatorError> {
    let prompts = benchmark
        .samples
        .iter()
        .map(|s| {
            let prompt = fill(
                &templates.relevance_judge,
                &[
                    ("question", question_block(s).as_str()),
                    ("ability", benchmark.demand.text.as_str()),
                ],
            );
            (s.id.clone(), prompt)
        })
        .collect();
    judge_all(
        provider,
        JudgeCriterion::Alignment,
        &benchmark.generator_id,
        prompts,
        parse_attempts,
        workers,
    )
    .await
}

/// Fraction of faithfulness judgments that scored 0 — the estimated rate of
/// mislabeled samples, usable as the noise rate in reliability tests. None
/// when no faithfulness records are present.
pub fn noise_fraction(records: &[JudgeRecord]) -> Option<f64> {
    let faithfulness: Vec<&JudgeRecord> = records
        .iter()
        .filter(|r| r.criterion == JudgeCriterion::Faithfulness)
        .collect();
    if faithfulness.is_empty() {
        return None;
    }
    let zeros = faithfulness.iter().filter(|r| r.score == 0.0).count();
    Some(zeros as f64 / faithfulness.len() as f64)
}

/// Persist judge records, one JSON object per line.
pub fn write_judgments(path: &Path, records: &[JudgeRecord]) -> Result<(), FileError> {
    write_jsonl_records(path, records)
}

/// Load judge records written by [`write_judgments`].
pub fn read_judgments(path: &Path) -> Result<Vec<JudgeRecord>, FileError> {
    read_jsonl_records(path)
}
