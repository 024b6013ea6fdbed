//! Label conflict resolution: when repeated test-taking disagrees with a
//! sample's declared answer, a contrastive judge arbitrates between the
//! original rationale and a freshly argued case for the challenger.

use std::collections::BTreeMap;

use crate::generator::difficulty::render_options;
use crate::generator::parse::parse_comparison_verdict;
use crate::generator::GeneratorError;
use crate::providers::{ChatRequest, Provider};
use crate::templates::{fill, TemplateSet};
use crate::types::{option_letter, Sample};

/// How a sample's final label was settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// The vote agreed with the declared label (or produced no challenger).
    NoConflict,
    /// A contrastive judge arbitrated between label and challenger.
    ContrastiveJudge,
}

/// Record of one conflict-resolution decision.
#[derive(Debug, Clone)]
pub struct ConflictVerdict {
    /// Unique most-voted answer, if any (ties yield `None`).
    pub voted_answer: Option<usize>,
    /// Votes per option index over the parseable answers.
    pub vote_counts: BTreeMap<usize, u32>,
    /// Answers that named no option.
    pub unparsed: u32,
    /// Question-quality score reported by the judge, when one ran and parsed.
    pub judge_faithfulness: Option<f64>,
    /// Label the sample ended up with.
    pub final_label: usize,
    /// How the final label was settled.
    pub resolved_by: Resolution,
}

/// Tally parseable answers and find the challenger the vote puts up against
/// the declared label, if any.
fn tally(answers: &[Option<usize>], label: usize) -> (BTreeMap<usize, u32>, u32, Option<usize>, Option<usize>) {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    let mut unparsed = 0;
    for answer in answers {
        match answer {
            Some(i) => *counts.entry(*i).or_insert(0) += 1,
            None => unparsed += 1,
        }
    }
    let max = counts.values().copied().max().unwrap_or(0);
    let winners: Vec<usize> = counts
        .iter()
        .filter(|(_, c)| **c == max)
        .map(|(i, _)| *i)
        .collect();
    let voted = match winners.as_slice() {
        [single] => Some(*single),
        _ => None,
    };
    let challenger = if max == 0 || voted == Some(label) {
        None
    } else {
        // A tie, or a unique winner disagreeing with the label: the lowest
        // winning index other than the label challenges it.
        winners.iter().copied().find(|w| *w != label)
    };
    (counts, unparsed, voted, challenger)
}

fn render_candidate(rationale: &str, label: usize, options: &[String]) -> String {
    let letter = option_letter(label).unwrap_or('?');
    format!(
        "Reasoning: {rationale}\nFinal answer: {letter}. {}",
        options.get(label).map(String::as_str).unwrap_or("")
    )
}

/// Check the sample's label against repeated answers and arbitrate conflicts.
///
/// Majority agreement keeps the sample untouched. Otherwise a fresh rationale
/// is argued for the challenger and a contrastive judge picks the option it
/// believes correct: endorsing the challenger flips the sample's label and
/// rationale, anything else (including an unparseable judge after retries)
/// conservatively keeps the original.
pub async fn resolve_conflict(
    provider: &dyn Provider,
    templates: &TemplateSet,
    sample: &mut Sample,
    answers: &[Option<usize>],
    parse_attempts: u32,
    warnings: &mut Vec<String>,
) -> Result<ConflictVerdict, GeneratorError> {
    let (vote_counts, unparsed, voted_answer, challenger) = tally(answers, sample.label);
    let Some(challenger) = challenger else {
        return Ok(ConflictVerdict {
            voted_answer,
            vote_counts,
            unparsed,
            judge_faithfulness: None,
            final_label: sample.label,
            resolved_by: Resolution::NoConflict,
        });
    };

    let challenger_letter = option_letter(challenger).unwrap_or('?');
    let rationale_prompt = fill(
        &templates.rationale,
        &[
            ("question", sample.question.as_str()),
            ("options", render_options(&sample.options).as_str()),
            (
                "answer",
                format!("{challenger_letter}. {}", sample.options[challenger]).as_str(),
            ),
        ],
    );
    let reply = provider.chat(&ChatRequest::user(rationale_prompt)).await?;
    let challenger_rationale = reply
        .text
        .trim()
        .strip_prefix("Reasoning Path:")
        .map(str::trim)
        .unwrap_or(reply.text.trim())
        .to_string();

    let question_block = format!(
        "{}\nOptions:\n{}",
        sample.question,
        render_options(&sample.options)
    );
    let judge_prompt = fill(
        &templates.comparison_judge,
        &[
            ("question", question_block.as_str()),
            (
                "can1",
                render_candidate(&sample.rationale, sample.label, &sample.options).as_str(),
            ),
            (
                "can2",
                render_candidate(&challenger_rationale, challenger, &sample.options).as_str(),
            ),
        ],
    );
    let judge_request = ChatRequest::user(judge_prompt);
    let mut verdict = None;
    let mut last_error = String::new();
    for _ in 0..parse_attempts.max(1) {
        let reply = provider.chat(&judge_request).await?;
        match parse_comparison_verdict(&reply.text, sample.options.len()) {
            Ok(v) => {
                verdict = Some(v);
                break;
            }
            Err(e) => last_error = e,
        }
    }

    let mut judge_faithfulness = None;
    match verdict {
        Some(v) => {
            judge_faithfulness = v.faithfulness;
            if v.label == Some(challenger) {
                sample.label = challenger;
                sample.rationale = challenger_rationale;
            }
            // Any other endorsement (original label, a third option, or
            // "no correct option") keeps the sample as drafted.
        }
        None => warnings.push(format!(
            "sample {}: judge reply unusable after {} attempts ({last_error}); keeping original label",
            sample.id,
            parse_attempts.max(1),
        )),
    }

    Ok(ConflictVerdict {
        voted_answer,
        vote_counts,
        unparsed,
        judge_faithfulness,
        final_label: sample.label,
        resolved_by: Resolution::ContrastiveJudge,
    })
}
