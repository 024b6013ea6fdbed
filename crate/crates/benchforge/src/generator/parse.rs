//! Parsers for the structured replies produced by generation and judging
//! prompts. Every parser degrades loudly: a malformed reply yields an error
//! naming the part that failed, never a silently wrong sample.

use crate::types::{letter_to_index, option_letter};

/// Section markers of the sample-generation templates, in expected order.
const MARKERS: [&str; 5] = [
    "##Analyses:##",
    "##Question:##",
    "##Reasoning Path:##",
    "##Candidates:##",
    "##Right Option:##",
];

/// A draft sample parsed out of one generation reply.
#[derive(Debug, Clone)]
pub struct ParsedDraft {
    /// Free-form analysis section preceding the sample.
    pub analyses: String,
    /// Question text.
    pub question: String,
    /// Step-by-step reasoning path; absent in single-stage replies.
    pub reasoning: Option<String>,
    /// Option texts, in letter order.
    pub options: Vec<String>,
    /// 0-based index of the declared right option.
    pub label: usize,
}

/// Pipeline stage names used in stage logs and failure reports.
pub mod stage {
    pub const ANALYSES: &str = "analyses";
    pub const QUESTION: &str = "question";
    pub const REASONING: &str = "reasoning";
    pub const CANDIDATES: &str = "candidates";
    pub const RIGHT_OPTION: &str = "right_option";
    pub const VALIDATE: &str = "validate";
}

/// A stage failure: which stage rejected the reply, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageFailure {
    /// Name of the failing stage (see [`stage`]).
    pub stage: &'static str,
    /// Human-readable reason.
    pub message: String,
}

impl StageFailure {
    fn new(stage: &'static str, message: impl Into<String>) -> Self {
        Self {
            stage,
            message: message.into(),
        }
    }
}

/// Extract the text between `marker` and the next known marker (or the end).
fn section<'a>(text: &'a str, marker: &str) -> Option<&'a str> {
    let start = text.find(marker)? + marker.len();
    let tail = &text[start..];
    let end = MARKERS
        .iter()
        .filter_map(|m| tail.find(m))
        .min()
        .unwrap_or(tail.len());
    Some(tail[..end].trim())
}

/// Parse a generation reply into a draft.
///
/// `require_reasoning` selects the staged template's shape (with a
/// `##Reasoning Path:##` section) over the single-stage one.
pub fn parse_draft(
    text: &str,
    option_count: usize,
    require_reasoning: bool,
) -> Result<ParsedDraft, StageFailure> {
    let analyses = section(text, "##Analyses:##")
        .ok_or_else(|| StageFailure::new(stage::ANALYSES, "missing ##Analyses:## section"))?;
    if analyses.is_empty() {
        return Err(StageFailure::new(stage::ANALYSES, "empty analyses section"));
    }
    let question = section(text, "##Question:##")
        .ok_or_else(|| StageFailure::new(stage::QUESTION, "missing ##Question:## section"))?;
    if question.is_empty() {
        return Err(StageFailure::new(stage::QUESTION, "empty question section"));
    }
    let reasoning = if require_reasoning {
        let r = section(text, "##Reasoning Path:##").ok_or_else(|| {
            StageFailure::new(stage::REASONING, "missing ##Reasoning Path:## section")
        })?;
        if r.is_empty() {
            return Err(StageFailure::new(stage::REASONING, "empty reasoning section"));
        }
        Some(r.to_string())
    } else {
        None
    };
    let candidates = section(text, "##Candidates:##")
        .ok_or_else(|| StageFailure::new(stage::CANDIDATES, "missing ##Candidates:## section"))?;
    let options = parse_candidates(candidates, option_count)
        .map_err(|m| StageFailure::new(stage::CANDIDATES, m))?;
    let right = section(text, "##Right Option:##").ok_or_else(|| {
        StageFailure::new(stage::RIGHT_OPTION, "missing ##Right Option:## section")
    })?;
    let label = first_option_token(right, option_count).ok_or_else(|| {
        StageFailure::new(
            stage::RIGHT_OPTION,
            format!("no option letter found in `{right}`"),
        )
    })?;
    Ok(ParsedDraft {
        analyses: analyses.to_string(),
        question: question.to_string(),
        reasoning,
        options,
        label,
    })
}

/// Parse a lettered candidate block into exactly `option_count` option texts.
///
/// Each option starts on a line `X. text` / `X) text` / `X: text` with letters
/// consecutive from `A`; later lines without the next letter prefix continue
/// the current option.
pub fn parse_candidates(block: &str, option_count: usize) -> Result<Vec<String>, String> {
    let mut options: Vec<String> = Vec::new();
    for raw in block.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(body) = option_prefix(line, options.len()) {
            options.push(body.trim().to_string());
        } else if let Some(last) = options.last_mut() {
            last.push(' ');
            last.push_str(line);
        } else {
            return Err(format!("candidate list must start with option A, got `{line}`"));
        }
    }
    if options.len() != option_count {
        return Err(format!(
            "expected {option_count} candidates, found {}",
            options.len()
        ));
    }
    for (i, option) in options.iter().enumerate() {
        if option.is_empty() {
            let letter = option_letter(i).unwrap_or('?');
            return Err(format!("candidate {letter} is empty"));
        }
    }
    for i in 0..options.len() {
        for j in (i + 1)..options.len() {
            if options[i] == options[j] {
                let a = option_letter(i).unwrap_or('?');
                let b = option_letter(j).unwrap_or('?');
                return Err(format!("candidates {a} and {b} are identical"));
            }
        }
    }
    Ok(options)
}

/// If `line` opens the option with index `next_index`, return its body.
fn option_prefix(line: &str, next_index: usize) -> Option<&str> {
    let expected = option_letter(next_index)?;
    let mut chars = line.chars();
    let first = chars.next()?;
    if first.to_ascii_uppercase() != expected {
        return None;
    }
    let rest = chars.as_str();
    let sep = rest.chars().next()?;
    if sep == '.' || sep == ')' || sep == ':' {
        Some(&rest[sep.len_utf8()..])
    } else {
        None
    }
}

/// ASCII-alphanumeric token runs of `text`, in order.
fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| !t.is_empty())
}

fn token_option_index(token: &str, option_count: usize) -> Option<usize> {
    if token.chars().count() != 1 {
        return None;
    }
    let index = letter_to_index(token.chars().next()?)?;
    (index < option_count).then_some(index)
}

/// First single-letter token naming an option within range.
pub fn first_option_token(text: &str, option_count: usize) -> Option<usize> {
    tokens(text).find_map(|t| token_option_index(t, option_count))
}

/// Last single-letter token naming an option within range.
///
/// Test-taker replies are asked to end with `Answer: X`, so the final
/// in-range letter is the committed answer even when the reasoning that
/// precedes it mentions other options.
pub fn last_option_token(text: &str, option_count: usize) -> Option<usize> {
    tokens(text)
        .filter_map(|t| token_option_index(t, option_count))
        .last()
}

/// One attribute dimension with its candidate values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDimension {
    /// Dimension name, e.g. "Topic Area".
    pub name: String,
    /// At least two concrete values.
    pub values: Vec<String>,
}

/// Parse an attribute-enumeration reply.
///
/// Dimensions with fewer than two values are dropped with a warning; an empty
/// result is an error carrying the raw reply.
pub fn parse_attributes(text: &str) -> Result<(Vec<AttributeDimension>, Vec<String>), String> {
    let mut dims: Vec<AttributeDimension> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix("Attribute:") {
            dims.push(AttributeDimension {
                name: name.trim().to_string(),
                values: Vec::new(),
            });
        } else if let Some(value) = line.strip_prefix('-') {
            if let Some(dim) = dims.last_mut() {
                let value = value.trim();
                if !value.is_empty() {
                    dim.values.push(value.to_string());
                }
            }
        }
    }
    let mut warnings = Vec::new();
    dims.retain(|d| {
        let keep = d.values.len() >= 2 && !d.name.is_empty();
        if !keep {
            warnings.push(format!(
                "dropped attribute dimension `{}`: needs a name and at least two values",
                d.name
            ));
        }
        keep
    });
    if dims.is_empty() {
        return Err(format!("no usable attribute dimensions in reply:\n{text}"));
    }
    Ok((dims, warnings))
}

/// One difficulty strategy: an ordered ladder of tiers, easiest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifficultyStrategy {
    /// Tier lines, each self-contained (e.g. "Required Reasoning Steps set as Single-step").
    pub tiers: Vec<String>,
}

/// Parse a difficulty-strategy reply.
///
/// Strategies with fewer than two tiers are dropped with a warning; an empty
/// result is an error carrying the raw reply.
pub fn parse_strategies(text: &str) -> Result<(Vec<DifficultyStrategy>, Vec<String>), String> {
    let mut strategies: Vec<DifficultyStrategy> = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("Strategy") && line.ends_with(':') {
            strategies.push(DifficultyStrategy { tiers: Vec::new() });
        } else if let Some(strategy) = strategies.last_mut() {
            strategy.tiers.push(line.to_string());
        }
    }
    let mut warnings = Vec::new();
    let mut index = 0;
    strategies.retain(|s| {
        index += 1;
        let keep = s.tiers.len() >= 2;
        if !keep {
            warnings.push(format!(
                "dropped difficulty strategy {index}: needs at least two tiers"
            ));
        }
        keep
    });
    if strategies.is_empty() {
        return Err(format!("no usable difficulty strategies in reply:\n{text}"));
    }
    Ok((strategies, warnings))
}

/// Verdict parsed from a comparison-judge reply.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonVerdict {
    /// Question-quality score the judge reported, if parseable.
    pub faithfulness: Option<f64>,
    /// Option index the judge endorsed; `None` means "no correct option".
    pub label: Option<usize>,
}

/// Parse `##Faithfulness:s##` / `##Label:X##` markers from a judge reply.
pub fn parse_comparison_verdict(
    text: &str,
    option_count: usize,
) -> Result<ComparisonVerdict, String> {
    let faithfulness = marker_content(text, "##Faithfulness:").and_then(|c| c.trim().parse().ok());
    let label_text = marker_content(text, "##Label:")
        .ok_or_else(|| "missing ##Label:...## marker".to_string())?;
    let trimmed = label_text.trim();
    let label = if trimmed.eq_ignore_ascii_case("none") {
        None
    } else {
        Some(first_option_token(trimmed, option_count).ok_or_else(|| {
            format!("label `{trimmed}` names no option within the first {option_count}")
        })?)
    };
    Ok(ComparisonVerdict {
        faithfulness,
        label,
    })
}

/// Content of the last `marker...##` occurrence in `text`.
fn marker_content<'a>(text: &'a str, marker: &str) -> Option<&'a str> {
    let start = text.rfind(marker)? + marker.len();
    let tail = &text[start..];
    let end = tail.find("##")?;
    Some(&tail[..end])
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAGED_REPLY: &str = "##Analyses:##\n1-1. The task needs a fraction question.\n\
##Question:## What is 1/2 + 1/4?\n##Reasoning Path:## Convert to quarters: 2/4 + 1/4 = 3/4.\n\
##Candidates:##\nA. 3/4\nB. 1/6\nC. 2/6\nD. 1/8\n##Right Option:##A";

    #[test]
    fn parses_complete_staged_reply() {
        let draft = parse_draft(STAGED_REPLY, 4, true).unwrap();
        assert_eq!(draft.question, "What is 1/2 + 1/4?");
        assert_eq!(draft.reasoning.as_deref(), Some("Convert to quarters: 2/4 + 1/4 = 3/4."));
        assert_eq!(draft.options, vec!["3/4", "1/6", "2/6", "1/8"]);
        assert_eq!(draft.label, 0);
        assert!(draft.analyses.starts_with("1-1."));
    }

    #[test]
    fn missing_reasoning_fails_only_when_required() {
        let reply = STAGED_REPLY.replace("##Reasoning Path:## Convert to quarters: 2/4 + 1/4 = 3/4.\n", "");
        let err = parse_draft(&reply, 4, true).unwrap_err();
        assert_eq!(err.stage, stage::REASONING);
        let draft = parse_draft(&reply, 4, false).unwrap();
        assert_eq!(draft.reasoning, None);
        assert_eq!(draft.label, 0);
    }

    #[test]
    fn stage_failures_name_the_failing_stage() {
        let err = parse_draft("no markers at all", 4, true).unwrap_err();
        assert_eq!(err.stage, stage::ANALYSES);
        let err = parse_draft("##Analyses:## x\n##Question:##\n##Candidates:##\nA. 1\nB. 2\nC. 3\nD. 4\n##Right Option:##A", 4, true)
            .unwrap_err();
        assert_eq!(err.stage, stage::QUESTION);
        let err = parse_draft(&STAGED_REPLY.replace("##Right Option:##A", "##Right Option:##Z"), 4, true)
            .unwrap_err();
        assert_eq!(err.stage, stage::RIGHT_OPTION);
    }

    #[test]
    fn candidates_support_separators_and_continuations() {
        let block = "A. first option\nspanning two lines\nB) second\nC: third\nD. fourth";
        let options = parse_candidates(block, 4).unwrap();
        assert_eq!(options[0], "first option spanning two lines");
        assert_eq!(options[1], "second");
        assert_eq!(options[2], "third");
    }

    #[test]
    fn candidates_reject_wrong_count_duplicates_and_bad_start() {
        assert!(parse_candidates("A. one\nB. two", 4)
            .unwrap_err()
            .contains("expected 4"));
        let err = parse_candidates("A. same\nB. same\nC. three\nD. four", 4).unwrap_err();
        assert!(err.contains("A and B"), "{err}");
        assert!(parse_candidates("B. starts wrong\nA. nope", 2)
            .unwrap_err()
            .contains("start with option A"));
    }

    #[test]
    fn option_tokens_scan_from_the_right_end() {
        let text = "I considered A and C, but the answer must be smaller.\nAnswer: B";
        assert_eq!(last_option_token(text, 4), Some(1));
        assert_eq!(first_option_token("The answer is C", 4), Some(2));
        assert_eq!(last_option_token("no letters here", 4), None);
        // Out-of-range letters never match.
        assert_eq!(last_option_token("Answer: F", 4), None);
        // Multi-letter words never match, even when they start with a letter in range.
        assert_eq!(last_option_token("Because of basic algebra", 4), None);
    }

    #[test]
    fn attribute_reply_round_trips_and_drops_thin_dimensions() {
        let reply = "Attribute: Topic Area\n- Fractions\n- Ratios\n\nAttribute: Thin\n- only one\n\nAttribute: Format\n- word problem\n- direct computation\n- diagram reading";
        let (dims, warnings) = parse_attributes(reply).unwrap();
        assert_eq!(dims.len(), 2);
        assert_eq!(dims[0].name, "Topic Area");
        assert_eq!(dims[0].values, vec!["Fractions", "Ratios"]);
        assert_eq!(dims[1].values.len(), 3);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("Thin"));
        assert!(parse_attributes("nothing structured").is_err());
    }

    #[test]
    fn strategy_reply_round_trips_and_drops_thin_strategies() {
        let reply = "Strategy 1:\nReasoning Steps set as Single-step\nReasoning Steps set as Multi-step\n\nStrategy 2:\nlonely tier\n\nStrategy 3:\nTopic is Common\nTopic is Uncommon\nTopic is Rare";
        let (strategies, warnings) = parse_strategies(reply).unwrap();
        assert_eq!(strategies.len(), 2);
        assert_eq!(strategies[0].tiers.len(), 2);
        assert_eq!(strategies[1].tiers[2], "Topic is Rare");
        assert_eq!(warnings.len(), 1);
        assert!(parse_strategies("free text").is_err());
    }

    #[test]
    fn comparison_verdict_parses_score_label_and_none() {
        let v = parse_comparison_verdict("Correctness Analysis ... ##Faithfulness:0.5##, ##Label:B##", 4).unwrap();
        assert_eq!(v.faithfulness, Some(0.5));
        assert_eq!(v.label, Some(1));
        let v = parse_comparison_verdict("##Faithfulness:0##, ##Label:None##", 4).unwrap();
        assert_eq!(v.label, None);
        // The last marker pair wins when the analysis quotes the template.
        let v = parse_comparison_verdict(
            "template says ##Label:A## but final: ##Faithfulness:1##, ##Label:C##",
            4,
        )
        .unwrap();
        assert_eq!(v.label, Some(2));
        assert!(parse_comparison_verdict("no markers", 4).is_err());
        assert!(parse_comparison_verdict("##Label:Q##", 4).is_err());
    }

    #[test]
    fn faithfulness_score_is_optional_in_comparison_verdicts() {
        let v = parse_comparison_verdict("##Label:A##", 4).unwrap();
        assert_eq!(v.faithfulness, None);
        assert_eq!(v.label, Some(0));
    }
}
