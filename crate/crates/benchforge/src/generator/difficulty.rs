//! Difficulty estimation by repeated test-taking, and reference scheduling
//! that decays the priority of frequently reused anchors.

use futures::stream::{self, StreamExt};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::generator::parse::last_option_token;
use crate::generator::GeneratorError;
use crate::providers::{ChatRequest, Provider};
use crate::templates::{fill, TemplateSet};
use crate::types::{option_letter, Sample};

/// Render options as lettered lines for prompts.
pub fn render_options(options: &[String]) -> String {
    options
        .iter()
        .enumerate()
        .map(|(i, text)| format!("{}. {}", option_letter(i).unwrap_or('?'), text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Ask the provider to answer the sample `attempts` times and score the
/// fraction of answers that miss the labeled option.
///
/// An answer is a miss when it names a different option or cannot be parsed
/// at all. Returns the miss fraction and the per-attempt parsed answers in
/// call order.
pub async fn estimate_difficulty(
    provider: &dyn Provider,
    templates: &TemplateSet,
    sample: &Sample,
    attempts: u32,
    workers: usize,
) -> Result<(f64, Vec<Option<usize>>), GeneratorError> {
    let attempts = attempts.max(1);
    let prompt = fill(
        &templates.test_taker,
        &[
            ("question", sample.question.as_str()),
            ("options", render_options(&sample.options).as_str()),
        ],
    );
    let request = ChatRequest::user(prompt);
    let replies: Vec<_> = stream::iter((0..attempts).map(|_| provider.chat(&request)))
        .buffered(workers.max(1))
        .collect()
        .await;
    let mut answers = Vec::with_capacity(attempts as usize);
    for reply in replies {
        let reply = reply?;
        answers.push(last_option_token(&reply.text, sample.options.len()));
    }
    let misses = answers.iter().filter(|a| **a != Some(sample.label)).count();
    Ok((misses as f64 / attempts as f64, answers))
}

/// Difficulty after decaying for reuse: `difficulty * 0.9^(uses / r)`.
pub fn calibrated_difficulty(difficulty: f64, uses: u32, r: usize) -> f64 {
    difficulty * 0.9f64.powf(uses as f64 / r.max(1) as f64)
}

/// Pick up to `r` reference samples from the pool, favoring hard samples but
/// decaying those already used often.
///
/// The pool is ranked by calibrated difficulty; the top `2r` form the
/// candidate set, from which `r` are drawn uniformly without replacement and
/// shuffled. Each selected sample's `reference_uses` counter is incremented,
/// so repeated selection pushes a sample down the ranking over time.
pub fn select_references<R: Rng>(pool: &mut [Sample], r: usize, rng: &mut R) -> Vec<Sample> {
    if pool.is_empty() || r == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let key = |i: usize, pool: &[Sample]| {
        calibrated_difficulty(pool[i].difficulty_label.unwrap_or(0.0), pool[i].reference_uses, r)
    };
    order.sort_by(|&a, &b| {
        key(b, pool)
            .partial_cmp(&key(a, pool))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let candidates = &order[..(2 * r).min(order.len())];
    let take = r.min(candidates.len());
    let picked = rand::seq::index::sample(rng, candidates.len(), take);
    let mut chosen: Vec<usize> = picked.iter().map(|i| candidates[i]).collect();
    chosen.shuffle(rng);
    for &i in &chosen {
        pool[i].reference_uses += 1;
    }
    chosen.iter().map(|&i| pool[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::MockProvider;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn sample_with(difficulty: f64, uses: u32, id: &str) -> Sample {
        let mut s = Sample::new(
            id,
            format!("question {id}"),
            "because",
            vec!["x".to_string(), "y".to_string()],
            0,
        );
        s.difficulty_label = Some(difficulty);
        s.reference_uses = uses;
        s
    }

    #[test]
    fn calibration_decays_by_tenth_power_per_r_uses() {
        assert!((calibrated_difficulty(0.8, 0, 8) - 0.8).abs() < 1e-12);
        assert!((calibrated_difficulty(0.8, 8, 8) - 0.72).abs() < 1e-12);
        assert!((calibrated_difficulty(1.0, 16, 8) - 0.81).abs() < 1e-12);
        // Monotone: more uses, lower priority.
        assert!(calibrated_difficulty(0.5, 3, 8) > calibrated_difficulty(0.5, 4, 8));
    }

    #[test]
    fn selection_draws_only_from_the_top_two_r_by_calibrated_difficulty() {
        // 6 hard samples and 14 easy ones with r = 3: the candidate set is the
        // 6 hard ones exactly, so easy samples must never be selected.
        let mut pool: Vec<Sample> = (0..20)
            .map(|i| {
                let difficulty = if i < 6 { 0.9 } else { 0.1 };
                sample_with(difficulty, 0, &format!("s{i:02}"))
            })
            .collect();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..50 {
            for s in pool.iter_mut() {
                s.reference_uses = 0;
            }
            let refs = select_references(&mut pool, 3, &mut rng);
            assert_eq!(refs.len(), 3);
            for r in &refs {
                assert_eq!(r.difficulty_label, Some(0.9), "picked easy sample {}", r.id);
            }
        }
    }

    #[test]
    fn selection_increments_use_counters_and_decays_priority() {
        let mut pool = vec![
            sample_with(0.9, 0, "hard"),
            sample_with(0.5, 0, "mid"),
            sample_with(0.2, 0, "easy"),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        // r = 1 with a pool of 3: candidates are the top 2 by calibrated
        // difficulty. Repeated selection of "hard" decays it; after enough
        // uses its calibrated difficulty drops below "mid" and then "easy".
        let mut uses_seen = Vec::new();
        for _ in 0..30 {
            let refs = select_references(&mut pool, 1, &mut rng);
            assert_eq!(refs.len(), 1);
            uses_seen.push(refs[0].id.clone());
        }
        let hard_uses = pool.iter().find(|s| s.id == "hard").unwrap().reference_uses;
        let total: u32 = pool.iter().map(|s| s.reference_uses).sum();
        assert_eq!(total, 30);
        assert!(hard_uses < 30, "decay never rotated selection away from `hard`");
        assert!(uses_seen.iter().any(|id| id != "hard"));
    }

    #[test]
    fn selection_handles_small_pools_and_empty_pools() {
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let mut empty: Vec<Sample> = Vec::new();
        assert!(select_references(&mut empty, 4, &mut rng).is_empty());
        let mut tiny = vec![sample_with(0.4, 0, "only")];
        let refs = select_references(&mut tiny, 4, &mut rng);
        assert_eq!(refs.len(), 1);
        assert_eq!(tiny[0].reference_uses, 1);
    }

    #[test]
    fn selection_is_deterministic_for_a_fixed_seed() {
        let build = || -> Vec<String> {
            let mut pool: Vec<Sample> = (0..10)
                .map(|i| sample_with(0.1 * i as f64, 0, &format!("s{i}")))
                .collect();
            let mut rng = ChaCha12Rng::seed_from_u64(99);
            (0..5)
                .flat_map(|_| select_references(&mut pool, 3, &mut rng))
                .map(|s| s.id)
                .collect()
        };
        assert_eq!(build(), build());
    }

    #[tokio::test]
    async fn difficulty_is_the_miss_fraction_including_unparseable_answers() {
        let sample = Sample::new(
            "s1",
            "Pick the prime.",
            "7 is prime",
            vec!["9".into(), "7".into(), "21".into(), "27".into()],
            1,
        );
        let replies = vec![
            "Answer: B".to_string(),
            "I think it is 7.\nAnswer: B".to_string(),
            "Answer: A".to_string(),
            "no letter at all".to_string(),
            "Answer: B".to_string(),
        ];
        let provider = MockProvider::new(replies, 8);
        let (beta, answers) =
            estimate_difficulty(&provider, &TemplateSet::builtin(), &sample, 5, 2)
                .await
                .unwrap();
        assert!((beta - 0.4).abs() < 1e-12);
        assert_eq!(answers, vec![Some(1), Some(1), Some(0), None, Some(1)]);
    }

    #[tokio::test]
    async fn difficulty_prompt_carries_question_and_lettered_options() {
        let sample = Sample::new(
            "s1",
            "Which is even?",
            "2 is even",
            vec!["3".into(), "2".into()],
            1,
        );
        let provider = MockProvider::new(vec!["Answer: B".to_string()], 8);
        estimate_difficulty(&provider, &TemplateSet::builtin(), &sample, 1, 1)
            .await
            .unwrap();
        let prompts = provider.prompts();
        assert!(prompts[0].contains("Which is even?"));
        assert!(prompts[0].contains("A. 3"));
        assert!(prompts[0].contains("B. 2"));
    }
}
