//! Mean pairwise distances over a set of vectors: Euclidean for embeddings,
//! normalized Hamming for boolean answer patterns.

use super::StatsError;

/// Mean Euclidean distance over all unordered pairs.
///
/// Needs at least two vectors of one shared, nonzero dimension.
pub fn mean_pairwise_euclidean(vectors: &[Vec<f64>]) -> Result<f64, StatsError> {
    check_shape(vectors.len(), vectors.iter().map(Vec::len))?;
    if vectors.iter().flatten().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("pairwise distance input"));
    }
    let mut total = 0.0;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let d2: f64 = vectors[i]
                .iter()
                .zip(&vectors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            total += d2.sqrt();
        }
    }
    Ok(total / pair_count(vectors.len()))
}

/// Mean normalized Hamming distance (fraction of mismatching positions) over
/// all unordered pairs.
pub fn mean_pairwise_hamming(vectors: &[Vec<bool>]) -> Result<f64, StatsError> {
    check_shape(vectors.len(), vectors.iter().map(Vec::len))?;
    let dim = vectors[0].len() as f64;
    let mut total = 0.0;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let mismatches = vectors[i]
                .iter()
                .zip(&vectors[j])
                .filter(|(a, b)| a != b)
                .count();
            total += mismatches as f64 / dim;
        }
    }
    Ok(total / pair_count(vectors.len()))
}

fn pair_count(n: usize) -> f64 {
    (n * (n - 1) / 2) as f64
}

fn check_shape(count: usize, mut dims: impl Iterator<Item = usize>) -> Result<(), StatsError> {
    if count < 2 {
        return Err(StatsError::TooFewObservations {
            got: count,
            need: 2,
            context: "pairwise distance".into(),
        });
    }
    let first = dims.next().expect("count >= 2");
    if first == 0 {
        return Err(StatsError::DegenerateInput(
            "pairwise distance over zero-dimensional vectors".into(),
        ));
    }
    for (i, d) in dims.enumerate() {
        if d != first {
            return Err(StatsError::DimensionMismatch {
                index: i + 1,
                got: d,
                want: first,
            });
        }
    }
    Ok(())
}
