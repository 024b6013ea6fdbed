//! Non-judged criteria: diversity, difficulty control, ranking agreement,
//! and per-item cost.

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};

use crate::evaluator::matrix::{shared_model_accuracies, CorrectnessMatrix};
use crate::evaluator::EvaluatorError;
use crate::generator::sample_text;
use crate::providers::Provider;
use crate::stats::{
    mean_pairwise_euclidean, mean_pairwise_hamming, pearson, spearman, word_entropy,
    CorrelationResult,
};
use crate::types::Benchmark;

/// Per-item generation cost in dollars and minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyValue {
    pub dollars_per_item: f64,
    pub minutes_per_item: f64,
}

/// Word entropy (bits) of the pooled question-and-option texts.
pub fn lexical_diversity(benchmark: &Benchmark) -> Result<f64, EvaluatorError> {
    let texts: Vec<String> = benchmark.samples.iter().map(sample_text).collect();
    Ok(word_entropy(&texts)?)
}

/// Mean pairwise Euclidean distance between question embeddings.
pub async fn semantic_diversity(
    provider: &dyn Provider,
    benchmark: &Benchmark,
    workers: usize,
) -> Result<f64, EvaluatorError> {
    let replies: Vec<_> = stream::iter(
        benchmark
            .samples
            .iter()
            .map(|s| provider.embed(&s.question)),
    )
    .buffered(workers.max(1))
    .collect()
    .await;
    let mut vectors = Vec::with_capacity(replies.len());
    for reply in replies {
        vectors.push(reply?);
    }
    Ok(mean_pairwise_euclidean(&vectors)?)
}

/// Mean pairwise Hamming distance between the samples' correctness patterns
/// across models: high when different samples trip up different models.
pub fn knowledge_coverage(matrix: &CorrectnessMatrix) -> Result<f64, EvaluatorError> {
    Ok(mean_pairwise_hamming(&matrix.sample_columns())?)
}

/// Difficulty labels in benchmark order, or an error naming samples that
/// lack one.
fn difficulty_labels(benchmark: &Benchmark) -> Result<Vec<f64>, EvaluatorError> {
    let missing: Vec<&str> = benchmark
        .samples
        .iter()
        .filter(|s| s.difficulty_label.is_none())
        .map(|s| s.id.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(EvaluatorError::Input(format!(
            "samples missing difficulty labels: {}",
            missing.join(", ")
        )));
    }
    Ok(benchmark
        .samples
        .iter()
        .map(|s| s.difficulty_label.expect("checked above"))
        .collect())
}

fn sample_ids(benchmark: &Benchmark) -> Vec<String> {
    benchmark.samples.iter().map(|s| s.id.clone()).collect()
}

/// Rank agreement between declared difficulty and observed error rates:
/// Spearman correlation of each sample's difficulty label with the fraction
/// of models that answered it wrong.
pub fn controllability(
    benchmark: &Benchmark,
    matrix: &CorrectnessMatrix,
) -> Result<CorrelationResult, EvaluatorError> {
    let labels = difficulty_labels(benchmark)?;
    let aligned = matrix.aligned_to_samples(&sample_ids(benchmark))?;
    Ok(spearman(&labels, &aligned.sample_error_rates())?)
}

/// Mean observed error rate over the hardest `fraction` of samples (by
/// difficulty label, ties broken by id): how much pressure the difficult end
/// of the benchmark actually exerts.
pub fn boundary_error_rate(
    benchmark: &Benchmark,
    matrix: &CorrectnessMatrix,
    fraction: f64,
) -> Result<f64, EvaluatorError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(EvaluatorError::Input(format!(
            "boundary fraction must be in (0, 1], got {fraction}"
        )));
    }
    if benchmark.samples.is_empty() {
        return Err(EvaluatorError::Input("benchmark has no samples".into()));
    }
    let labels = difficulty_labels(benchmark)?;
    let aligned = matrix.aligned_to_samples(&sample_ids(benchmark))?;
    let rates = aligned.sample_error_rates();

    let mut order: Vec<usize> = (0..benchmark.samples.len()).collect();
    order.sort_by(|&a, &b| {
        labels[b]
            .partial_cmp(&labels[a])
            .expect("difficulty labels are finite")
            .then_with(|| benchmark.samples[a].id.cmp(&benchmark.samples[b].id))
    });
    let take = (fraction * benchmark.samples.len() as f64).ceil() as usize;
    let take = take.clamp(1, benchmark.samples.len());
    Ok(order[..take].iter().map(|&i| rates[i]).sum::<f64>() / take as f64)
}

/// Agreement between the model ranking this benchmark induces and the one a
/// trusted reference induces: Pearson correlation of the shared models'
/// accuracies.
pub fn effectiveness(
    matrix: &CorrectnessMatrix,
    reference: &CorrectnessMatrix,
) -> Result<CorrelationResult, EvaluatorError> {
    let (ids, xs, ys) = shared_model_accuracies(matrix, reference);
    if ids.len() < 3 {
        return Err(EvaluatorError::Input(format!(
            "ranking agreement needs at least 3 shared models, found {}",
            ids.len()
        )));
    }
    Ok(pearson(&xs, &ys)?)
}

/// Ranking stability against a perturbed variant of the same benchmark — the
/// same accuracy-correlation computation as [`effectiveness`], pointed at a
/// variant matrix instead of a trusted reference.
pub fn robustness(
    matrix: &CorrectnessMatrix,
    variant: &CorrectnessMatrix,
) -> Result<CorrelationResult, EvaluatorError> {
    effectiveness(matrix, variant)
}

/// Generation cost per item, from the usage snapshot the benchmark carries.
pub fn efficiency(benchmark: &Benchmark) -> Result<EfficiencyValue, EvaluatorError> {
    let n = benchmark.samples.len();
    if n == 0 {
        return Err(EvaluatorError::Input(
            "cannot compute per-item cost of an empty benchmark".into(),
        ));
    }
    Ok(EfficiencyValue {
        dollars_per_item: benchmark.usage.dollars / n as f64,
        minutes_per_item: benchmark.usage.wall_seconds / 60.0 / n as f64,
    })
}
