//! In-batch diversity boosting: among candidate drafts, keep the one that
//! raises the word entropy of the benchmark built so far the most.

use crate::stats::word_entropy;
use crate::types::Sample;

/// The text of a sample as seen by diversity scoring: question plus options.
pub fn sample_text(sample: &Sample) -> String {
    let mut text = sample.question.clone();
    for option in &sample.options {
        text.push('\n');
        text.push_str(option);
    }
    text
}

/// Index of the candidate whose addition maximizes the entropy gain over
/// `existing`. Ties resolve to the lowest index; an empty candidate list
/// yields `None`.
///
/// With no existing texts the gain baseline is zero, so the candidate with
/// the highest own entropy wins.
pub fn boost_diversity(existing: &[String], candidates: &[Sample]) -> Option<usize> {
    let base = if existing.is_empty() {
        0.0
    } else {
        word_entropy(existing).expect("existing corpus is non-empty")
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, candidate) in candidates.iter().enumerate() {
        let mut corpus: Vec<String> = existing.to_vec();
        corpus.push(sample_text(candidate));
        let gain = word_entropy(&corpus).expect("extended corpus is non-empty") - base;
        match best {
            Some((_, top)) if gain <= top => {}
            _ => best = Some((i, gain)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(question: &str, options: &[&str]) -> Sample {
        Sample::new(
            "s",
            question,
            "why",
            options.iter().map(|o| o.to_string()).collect(),
            0,
        )
    }

    #[test]
    fn text_concatenates_question_and_options() {
        let s = sample("What is 2+2?", &["4", "5"]);
        assert_eq!(sample_text(&s), "What is 2+2?\n4\n5");
    }

    #[test]
    fn prefers_the_candidate_with_fresh_vocabulary() {
        let existing = vec![
            "compute the sum of two fractions".to_string(),
            "compute the sum of two decimals".to_string(),
        ];
        let repeat = sample("compute the sum of two fractions", &["one", "two"]);
        let fresh = sample("estimate the volume of a rotated solid", &["pi", "tau"]);
        let picked = boost_diversity(&existing, &[repeat, fresh]).unwrap();
        assert_eq!(picked, 1);
    }

    #[test]
    fn empty_pool_selects_the_highest_entropy_candidate() {
        let repetitive = sample("one one one one", &["one", "one one"]);
        let varied = sample("every word here differs", &["alpha", "beta"]);
        let picked = boost_diversity(&[], &[repetitive, varied]).unwrap();
        assert_eq!(picked, 1);
    }

    #[test]
    fn ties_resolve_to_the_lowest_index() {
        let a = sample("same text", &["x", "y"]);
        let b = sample("same text", &["x", "y"]);
        assert_eq!(boost_diversity(&[], &[a, b]), Some(0));
    }

    #[test]
    fn empty_candidate_list_yields_none() {
        assert_eq!(boost_diversity(&["text".to_string()], &[]), None);
    }

    #[test]
    fn gain_matches_direct_entropy_difference() {
        let existing = vec!["alpha beta gamma".to_string()];
        let candidate = sample("delta epsilon", &["zeta"]);
        let with: Vec<String> = vec![existing[0].clone(), sample_text(&candidate)];
        let expected_gain = word_entropy(&with).unwrap() - word_entropy(&existing).unwrap();
        // Selecting among one candidate must reproduce exactly that gain ranking.
        assert_eq!(boost_diversity(&existing, &[candidate]), Some(0));
        assert!(expected_gain > 0.0);
    }
}
