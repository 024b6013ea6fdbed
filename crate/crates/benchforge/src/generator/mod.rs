//! Benchmark synthesis pipeline.
//!
//! The staged pipeline turns one assessment demand into a benchmark by, per
//! sample: drafting several candidates against attribute and difficulty
//! constraints, keeping the candidate that most diversifies the batch,
//! estimating difficulty by repeated test-taking, and arbitrating any
//! disagreement between the vote and the declared answer. A single-call
//! `direct` mode exists as the no-machinery baseline.

pub mod conflict;
pub mod difficulty;
pub mod diversity;
pub mod draft;
pub mod parse;

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use futures::stream::{self, StreamExt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

pub use conflict::{resolve_conflict, ConflictVerdict, Resolution};
pub use difficulty::{calibrated_difficulty, estimate_difficulty, render_options, select_references};
pub use diversity::{boost_diversity, sample_text};
pub use draft::{draft_sample, DraftMode, DraftOutcome, StageRecord};
pub use parse::{AttributeDimension, DifficultyStrategy};

use crate::providers::{ChatRequest, Provider, ProviderError};
use crate::templates::{fill, TemplateSet};
use crate::types::{now_utc_seconds, option_letter, truncate_to_seconds, AssessmentDemand, Benchmark, Sample};

/// Errors from the generation pipeline.
#[derive(Debug, Error)]
pub enum GeneratorError {
    /// The provider failed in a way its own retries could not absorb.
    #[error(transparent)]
    Provider(#[from] ProviderError),
    /// A structured reply stayed unusable through every parse attempt.
    #[error("failed to parse {context}: {message}")]
    Parse {
        context: &'static str,
        message: String,
    },
    /// Every regeneration of one draft slot was rejected.
    #[error("draft rejected after {attempts} attempts; last failure: {last}")]
    DraftExhausted { attempts: u32, last: String },
    /// More sample slots failed than the configured tolerance allows.
    #[error("{failed} of {total} sample slots failed, exceeding the tolerated fraction")]
    TooManyFailures { failed: usize, total: usize },
    /// The configuration or demand is unusable as given.
    #[error("invalid generator configuration: {0}")]
    Config(String),
}

/// Tuning knobs for benchmark synthesis.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// Number of samples to produce.
    pub sample_count: usize,
    /// Test-taking attempts per sample for difficulty estimation.
    pub t_attempts: u32,
    /// Reference samples attached to each generation prompt.
    pub reference_count: usize,
    /// Candidate drafts per sample, pruned by diversity boosting.
    pub candidate_count: usize,
    /// Total attempts per draft slot before it is abandoned.
    pub draft_attempts: u32,
    /// Total attempts per structured call (attributes, strategies, judge).
    pub parse_attempts: u32,
    /// Concurrent provider calls within one sample's fan-out phases.
    pub workers: usize,
    /// Seed for attribute choice and reference sampling.
    pub seed: u64,
    /// Benchmark timestamp override; `None` stamps the current time.
    pub created_at: Option<DateTime<Utc>>,
    /// Fraction of sample slots allowed to fail before the run aborts.
    pub max_failure_fraction: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            sample_count: 10,
            t_attempts: 10,
            reference_count: 8,
            candidate_count: 5,
            draft_attempts: 3,
            parse_attempts: 3,
            workers: 8,
            seed: 0,
            created_at: None,
            max_failure_fraction: 0.2,
        }
    }
}

/// A generated benchmark plus everything worth reporting about the run.
#[derive(Debug)]
pub struct GenerationOutcome {
    /// The finished benchmark.
    pub benchmark: Benchmark,
    /// One conflict verdict per accepted sample, in sample order. Empty in
    /// direct mode, which never estimates difficulty.
    pub verdicts: Vec<ConflictVerdict>,
    /// Non-fatal anomalies observed along the way.
    pub warnings: Vec<String>,
    /// Sample slots that produced nothing.
    pub failed_slots: usize,
}

fn validate(config: &GeneratorConfig, demand: &AssessmentDemand) -> Result<(), GeneratorError> {
    let mut problems = Vec::new();
    if config.sample_count == 0 {
        problems.push("sample_count must be at least 1".to_string());
    }
    if config.t_attempts == 0 {
        problems.push("t_attempts must be at least 1".to_string());
    }
    if config.candidate_count == 0 {
        problems.push("candidate_count must be at least 1".to_string());
    }
    if !(0.0..1.0).contains(&config.max_failure_fraction) {
        problems.push(format!(
            "max_failure_fraction must be in [0, 1), got {}",
            config.max_failure_fraction
        ));
    }
    if demand.option_count < 2 || demand.option_count > 26 {
        problems.push(format!(
            "option_count must be between 2 and 26, got {}",
            demand.option_count
        ));
    }
    if demand.text.trim().is_empty() {
        problems.push("demand text is empty".to_string());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(GeneratorError::Config(problems.join("; ")))
    }
}

/// Fixed description of what one query is, shared by both generation prompts.
const QUERY_DEFINE: &str = "Each query is one self-contained multiple-choice question. \
The question text must include every fact needed to answer it, must not depend on \
external material or on other questions, and must admit exactly one defensible answer \
among the provided options.";

fn option_define(option_count: usize) -> String {
    let last = option_letter(option_count - 1).unwrap_or('Z');
    format!(
        "Provide exactly {option_count} candidate options labeled with consecutive \
capital letters A through {last}, one per line, like \"A. <option text>\". Exactly one \
option is the correct answer; every other option must be plausible yet definitively \
wrong, and no two options may be identical."
    )
}

fn attribute_block(attributes: &BTreeMap<String, String>) -> String {
    if attributes.is_empty() {
        return "(none)".to_string();
    }
    attributes
        .iter()
        .map(|(name, value)| format!("{name}: {value}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn strategy_block(tier_lines: &[String]) -> String {
    if tier_lines.is_empty() {
        return "(none)".to_string();
    }
    tier_lines.join("\n")
}

fn demonstrations_block(references: &[Sample]) -> String {
    if references.is_empty() {
        return "(none)".to_string();
    }
    references
        .iter()
        .enumerate()
        .map(|(i, sample)| {
            format!(
                "Sample {}:\n{}\nOptions:\n{}",
                i + 1,
                sample.question,
                render_options(&sample.options)
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn candidates_demo(option_count: usize) -> String {
    (0..option_count)
        .map(|i| format!("{}. {{{{Candidate content}}}}", option_letter(i).unwrap_or('?')))
        .collect::<Vec<_>>()
        .join("\n")
}

fn staged_prompt(
    templates: &TemplateSet,
    demand: &AssessmentDemand,
    attributes: &BTreeMap<String, String>,
    tier_lines: &[String],
    references: &[Sample],
) -> String {
    fill(
        &templates.staged,
        &[
            ("original task", demand.text.as_str()),
            ("task define", demand.text.as_str()),
            ("query define", QUERY_DEFINE),
            ("option define", option_define(demand.option_count).as_str()),
            ("attribute define", attribute_block(attributes).as_str()),
            ("difficulty attribute define", strategy_block(tier_lines).as_str()),
            ("demonstrations", demonstrations_block(references).as_str()),
            ("OptionNum", demand.option_count.to_string().as_str()),
            ("CandidatesDemo", candidates_demo(demand.option_count).as_str()),
        ],
    )
}

async fn request_attributes(
    provider: &dyn Provider,
    templates: &TemplateSet,
    demand: &AssessmentDemand,
    attempts: u32,
) -> Result<(Vec<AttributeDimension>, Vec<String>), GeneratorError> {
    let request = ChatRequest::user(fill(
        &templates.attributes,
        &[("task define", demand.text.as_str())],
    ));
    let mut last = String::new();
    for _ in 0..attempts.max(1) {
        let reply = provider.chat(&request).await?;
        match parse::parse_attributes(&reply.text) {
            Ok(parsed) => return Ok(parsed),
            Err(message) => last = message,
        }
    }
    Err(GeneratorError::Parse {
        context: "attribute enumeration",
        message: last,
    })
}

async fn request_strategies(
    provider: &dyn Provider,
    templates: &TemplateSet,
    demand: &AssessmentDemand,
    attempts: u32,
) -> Result<(Vec<DifficultyStrategy>, Vec<String>), GeneratorError> {
    let request = ChatRequest::user(fill(
        &templates.strategies,
        &[("task define", demand.text.as_str())],
    ));
    let mut last = String::new();
    for _ in 0..attempts.max(1) {
        let reply = provider.chat(&request).await?;
        match parse::parse_strategies(&reply.text) {
            Ok(parsed) => return Ok(parsed),
            Err(message) => last = message,
        }
    }
    Err(GeneratorError::Parse {
        context: "difficulty strategies",
        message: last,
    })
}

/// Tier index for sample `slot` of `total`: a proportional ramp from the
/// easiest tier on early samples to the hardest on late ones.
fn tier_index(slot: usize, total: usize, tiers: usize) -> usize {
    ((slot * tiers) / total.max(1)).min(tiers.saturating_sub(1))
}

/// Synthesize a benchmark with the full staged pipeline.
pub async fn generate_benchmark(
    provider: &dyn Provider,
    templates: &TemplateSet,
    demand: &AssessmentDemand,
    config: &GeneratorConfig,
) -> Result<GenerationOutcome, GeneratorError> {
    validate(config, demand)?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut warnings = Vec::new();

    let (dimensions, attr_warnings) =
        request_attributes(provider, templates, demand, config.parse_attempts).await?;
    warnings.extend(attr_warnings);
    let (strategies, strategy_warnings) =
        request_strategies(provider, templates, demand, config.parse_attempts).await?;
    warnings.extend(strategy_warnings);

    let mut pool: Vec<Sample> = Vec::new();
    let mut pool_texts: Vec<String> = Vec::new();
    let mut verdicts: Vec<ConflictVerdict> = Vec::new();
    let mut failed = 0usize;
    let allowed_failures =
        (config.max_failure_fraction * config.sample_count as f64).floor() as usize;

    for slot in 0..config.sample_count {
        let mut attributes = BTreeMap::new();
        for dimension in &dimensions {
            let value = &dimension.values[rng.gen_range(0..dimension.values.len())];
            attributes.insert(dimension.name.clone(), value.clone());
        }
        let tier_lines: Vec<String> = strategies
            .iter()
            .map(|s| s.tiers[tier_index(slot, config.sample_count, s.tiers.len())].clone())
            .collect();
        let references = select_references(&mut pool, config.reference_count, &mut rng);
        let prompt = staged_prompt(templates, demand, &attributes, &tier_lines, &references);

        let drafts: Vec<Result<DraftOutcome, GeneratorError>> =
            stream::iter((0..config.candidate_count).map(|_| {
                draft_sample(
                    provider,
                    &prompt,
                    demand.option_count,
                    config.draft_attempts,
                    DraftMode::Staged,
                )
            }))
            .buffered(config.workers.max(1))
            .collect()
            .await;
        let mut candidates = Vec::new();
        for draft in drafts {
            match draft {
                Ok(outcome) => candidates.push(outcome.sample),
                Err(GeneratorError::Provider(e)) => return Err(GeneratorError::Provider(e)),
                Err(e) => warnings.push(format!("slot {slot}: draft failed: {e}")),
            }
        }
        if candidates.is_empty() {
            failed += 1;
            warnings.push(format!(
                "slot {slot}: all {} drafts failed",
                config.candidate_count
            ));
            if failed > allowed_failures {
                return Err(GeneratorError::TooManyFailures {
                    failed,
                    total: config.sample_count,
                });
            }
            continue;
        }

        let pick = boost_diversity(&pool_texts, &candidates).expect("candidates are non-empty");
        let mut sample = candidates.swap_remove(pick);
        sample.id = format!("s{:06}", pool.len());
        sample.attributes = attributes;
        sample.strategies = tier_lines;

        let (beta, answers) = estimate_difficulty(
            provider,
            templates,
            &sample,
            config.t_attempts,
            config.workers,
        )
        .await?;
        sample.difficulty_label = Some(beta);
        let verdict = resolve_conflict(
            provider,
            templates,
            &mut sample,
            &answers,
            config.parse_attempts,
            &mut warnings,
        )
        .await?;
        verdicts.push(verdict);
        pool_texts.push(sample_text(&sample));
        pool.push(sample);
    }

    Ok(GenerationOutcome {
        benchmark: assemble(demand, pool, provider, config),
        verdicts,
        warnings,
        failed_slots: failed,
    })
}

/// Synthesize a benchmark with one generation call per sample and a
/// proportional declared difficulty ramp. The baseline against which the
/// staged pipeline is compared.
pub async fn generate_direct(
    provider: &dyn Provider,
    templates: &TemplateSet,
    demand: &AssessmentDemand,
    config: &GeneratorConfig,
) -> Result<GenerationOutcome, GeneratorError> {
    validate(config, demand)?;
    let mut warnings = Vec::new();
    let mut pool: Vec<Sample> = Vec::new();
    let mut failed = 0usize;
    let allowed_failures =
        (config.max_failure_fraction * config.sample_count as f64).floor() as usize;

    for slot in 0..config.sample_count {
        let level = ((slot * 10) / config.sample_count + 1).min(10) as u32;
        let level_line = templates
            .difficulty_level(level)
            .map(str::to_string)
            .unwrap_or_else(|| format!("Level {level}"));
        let task = format!("{}\n\nDifficulty requirement: {level_line}", demand.text);
        let prompt = fill(
            &templates.direct,
            &[
                ("task define", task.as_str()),
                ("query define", QUERY_DEFINE),
                ("option define", option_define(demand.option_count).as_str()),
            ],
        );
        match draft_sample(
            provider,
            &prompt,
            demand.option_count,
            config.draft_attempts,
            DraftMode::Direct,
        )
        .await
        {
            Ok(outcome) => {
                let mut sample = outcome.sample;
                sample.id = format!("s{:06}", pool.len());
                sample.declared_level = Some(level);
                sample.difficulty_label = Some(level as f64 / 10.0);
                pool.push(sample);
            }
            Err(GeneratorError::Provider(e)) => return Err(GeneratorError::Provider(e)),
            Err(e) => {
                failed += 1;
                warnings.push(format!("slot {slot}: {e}"));
                if failed > allowed_failures {
                    return Err(GeneratorError::TooManyFailures {
                        failed,
                        total: config.sample_count,
                    });
                }
            }
        }
    }

    Ok(GenerationOutcome {
        benchmark: assemble(demand, pool, provider, config),
        verdicts: Vec::new(),
        warnings,
        failed_slots: failed,
    })
}

fn assemble(
    demand: &AssessmentDemand,
    samples: Vec<Sample>,
    provider: &dyn Provider,
    config: &GeneratorConfig,
) -> Benchmark {
    Benchmark {
        demand: demand.clone(),
        samples,
        generator_id: provider.descriptor(),
        created_at: config
            .created_at
            .map(truncate_to_seconds)
            .unwrap_or_else(now_utc_seconds),
        usage: provider.usage(),
    }
}

/// Rewrite a terse demand into a detailed one with a single provider call.
pub async fn rewrite_demand(
    provider: &dyn Provider,
    templates: &TemplateSet,
    demand_text: &str,
) -> Result<String, GeneratorError> {
    if demand_text.trim().is_empty() {
        return Err(GeneratorError::Config("demand text is empty".to_string()));
    }
    let request = ChatRequest::user(fill(
        &templates.demand_rewrite,
        &[("demand", demand_text)],
    ));
    let reply = provider.chat(&request).await?;
    let text = reply.text.trim();
    if text.is_empty() {
        return Err(GeneratorError::Parse {
            context: "demand rewrite",
            message: "provider returned an empty rewrite".to_string(),
        });
    }
    Ok(text.to_string())
}
