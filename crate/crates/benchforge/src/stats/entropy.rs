//! Word-frequency entropy over a text corpus.

use std::collections::BTreeMap;

use super::StatsError;

/// Tokenize for counting: lowercase, then take maximal runs of alphanumeric
/// characters, so whitespace, punctuation, and symbols all separate tokens
/// and empty fragments vanish.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Pooled token counts across the corpus, in deterministic (sorted) order.
pub fn token_counts<S: AsRef<str>>(corpus: &[S]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for text in corpus {
        for tok in tokenize(text.as_ref()) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    counts
}

/// Entropy estimator selector. The plug-in estimator is the default; the
/// Miller-Madow variant adds the (V-1)/2N small-sample bias correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyEstimator {
    PlugIn,
    MillerMadow,
}

/// Plug-in (maximum likelihood) word entropy of the pooled corpus, in bits.
pub fn word_entropy<S: AsRef<str>>(corpus: &[S]) -> Result<f64, StatsError> {
    word_entropy_with(corpus, EntropyEstimator::PlugIn)
}

/// Word entropy with an explicit estimator choice.
pub fn word_entropy_with<S: AsRef<str>>(
    corpus: &[S],
    estimator: EntropyEstimator,
) -> Result<f64, StatsError> {
    let counts = token_counts(corpus);
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(StatsError::EmptyCorpus);
    }
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts.values() {
        let p = c as f64 / n;
        h -= p * p.log2();
    }
    // -0.0 from a single-token corpus is still zero entropy.
    let mut h = h.max(0.0);
    if estimator == EntropyEstimator::MillerMadow {
        h += (counts.len() as f64 - 1.0) / (2.0 * n) * std::f64::consts::LOG2_E;
    }
    Ok(h)
}
