//! Drafting: one call to the generation prompt, parsed and validated, with
//! whole-draft regeneration on failure.

use crate::generator::parse::{self, stage, ParsedDraft, StageFailure};
use crate::generator::GeneratorError;
use crate::providers::{ChatRequest, Provider};
use crate::types::{validate_sample, Sample};

/// Which generation template shaped the reply being drafted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DraftMode {
    /// Staged template: analyses, question, reasoning path, candidates, answer.
    Staged,
    /// Single-stage template: no reasoning path; analyses double as rationale.
    Direct,
}

/// Record of one stage check within one draft attempt.
#[derive(Debug, Clone)]
pub struct StageRecord {
    /// Stage name (see [`stage`]).
    pub stage: &'static str,
    /// Whether the stage accepted the reply.
    pub passed: bool,
    /// 1-based draft attempt this record belongs to.
    pub attempt: u32,
}

/// A successful draft and the log of stage checks that produced it.
#[derive(Debug, Clone)]
pub struct DraftOutcome {
    /// The drafted sample. Identity fields (`id`, attributes, difficulty)
    /// are filled by the pipeline, not here.
    pub sample: Sample,
    /// Stage checks across all attempts, in order.
    pub stage_log: Vec<StageRecord>,
}

const DRAFT_STAGES: [&str; 6] = [
    stage::ANALYSES,
    stage::QUESTION,
    stage::REASONING,
    stage::CANDIDATES,
    stage::RIGHT_OPTION,
    stage::VALIDATE,
];

/// Log `failed` as the failing stage, with every earlier stage passing.
fn log_attempt(log: &mut Vec<StageRecord>, attempt: u32, mode: DraftMode, failed: Option<&str>) {
    for name in DRAFT_STAGES {
        if mode == DraftMode::Direct && name == stage::REASONING {
            continue;
        }
        let is_failure = Some(name) == failed;
        log.push(StageRecord {
            stage: name,
            passed: !is_failure,
            attempt,
        });
        if is_failure {
            return;
        }
    }
}

fn draft_to_sample(draft: ParsedDraft, mode: DraftMode) -> Sample {
    let rationale = match mode {
        DraftMode::Staged => draft.reasoning.unwrap_or_default(),
        DraftMode::Direct => draft.analyses,
    };
    Sample::new("draft", draft.question, rationale, draft.options, draft.label)
}

/// Run one draft slot: call the generation prompt, parse, and validate,
/// regenerating from scratch up to `attempts` times.
pub async fn draft_sample(
    provider: &dyn Provider,
    prompt: &str,
    option_count: usize,
    attempts: u32,
    mode: DraftMode,
) -> Result<DraftOutcome, GeneratorError> {
    let attempts = attempts.max(1);
    let mut log = Vec::new();
    let mut last_failure = String::new();
    let request = ChatRequest::user(prompt);
    for attempt in 1..=attempts {
        let reply = provider.chat(&request).await?;
        let require_reasoning = mode == DraftMode::Staged;
        match parse::parse_draft(&reply.text, option_count, require_reasoning) {
            Ok(draft) => {
                let sample = draft_to_sample(draft, mode);
                let violations = validate_sample(&sample);
                if violations.is_empty() {
                    log_attempt(&mut log, attempt, mode, None);
                    return Ok(DraftOutcome {
                        sample,
                        stage_log: log,
                    });
                }
                log_attempt(&mut log, attempt, mode, Some(stage::VALIDATE));
                last_failure = format!("invalid sample: {}", violations.join("; "));
            }
            Err(StageFailure { stage, message }) => {
                log_attempt(&mut log, attempt, mode, Some(stage));
                last_failure = format!("stage `{stage}`: {message}");
            }
        }
    }
    Err(GeneratorError::DraftExhausted {
        attempts,
        last: last_failure,
    })
}
