//! Ordinary least squares via Householder QR.
//!
//! The normal equations square the condition number, so the fit works on an
//! orthogonal factorization of the design matrix instead: A = QR, then
//! R beta = Q'y by back-substitution. Coefficient standard errors come from
//! the rows of R^-1, and p-values from the exact t distribution.

use std::collections::BTreeMap;

use super::special::students_t_two_sided_p;
use super::StatsError;

/// A named design matrix: one (name, column) pair per regressor.
///
/// Columns must share one length n with the response; no intercept is added
/// implicitly — callers that want one include a column of ones.
#[derive(Debug, Clone, Default)]
pub struct Design {
    columns: Vec<(String, Vec<f64>)>,
}

impl Design {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_column(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.columns.push((name.into(), values));
        self
    }

    pub fn push(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push((name.into(), values));
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }
}

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    /// Fitted coefficient per design column name.
    pub coefficients: BTreeMap<String, f64>,
    /// Residual standard deviation, sqrt(RSS / (n - k)).
    pub residual_stddev: f64,
    /// Number of observations.
    pub n: usize,
    /// Two-sided p-value per coefficient (exact t distribution, n - k df).
    pub p_values: BTreeMap<String, f64>,
}

/// Fit `y ~ design` by least squares.
///
/// Requires strictly more observations than columns. Numerically dependent
/// columns are rejected with the offending column named rather than silently
/// producing an unstable fit.
// Triangular solves index over `i+1..k` ranges; iterator forms would bury the
// matrix arithmetic.
#[allow(clippy::needless_range_loop)]
pub fn ols(design: &Design, y: &[f64]) -> Result<RegressionFit, StatsError> {
    let k = design.columns.len();
    if k == 0 {
        return Err(StatsError::DegenerateInput(
            "least squares needs at least one design column".into(),
        ));
    }
    let n = y.len();
    for (name, col) in &design.columns {
        if col.len() != n {
            return Err(StatsError::LengthMismatch {
                left: col.len(),
                right: n,
                context: format!("design column `{name}` vs response"),
            });
        }
    }
    if n <= k {
        return Err(StatsError::TooFewObservations {
            got: n,
            need: k + 1,
            context: "least squares (need n > k)".into(),
        });
    }
    for (name, col) in &design.columns {
        if col.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::DegenerateInput(format!(
                "design column `{name}` contains a non-finite value"
            )));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("least squares response"));
    }

    // Column-major working copy of A and y; Householder reflections are
    // applied in place.
    let mut a: Vec<Vec<f64>> = design.columns.iter().map(|(_, c)| c.clone()).collect();
    let mut qty = y.to_vec();
    let col_norms: Vec<f64> = a
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    for j in 0..k {
        // Householder vector for the subcolumn a[j][j..].
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        // A vanishing subcolumn means column j lies in the span of the
        // previous columns.
        if norm <= 1e-10 * col_norms[j].max(1e-30) {
            return Err(StatsError::Collinear {
                column: design.columns[j].0.clone(),
            });
        }
        let alpha = if a[j][j] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            // Apply I - 2 v v' / (v'v) to the trailing columns and to y.
            for col in a.iter_mut().skip(j + 1) {
                let dot: f64 = v.iter().zip(&col[j..]).map(|(vi, ci)| vi * ci).sum();
                let scale = 2.0 * dot / vnorm2;
                for (vi, ci) in v.iter().zip(col[j..].iter_mut()) {
                    *ci -= scale * vi;
                }
            }
            let dot: f64 = v.iter().zip(&qty[j..]).map(|(vi, yi)| vi * yi).sum();
            let scale = 2.0 * dot / vnorm2;
            for (vi, yi) in v.iter().zip(qty[j..].iter_mut()) {
                *yi -= scale * vi;
            }
        }
        a[j][j] = alpha;
        a[j][j + 1..].fill(0.0);
    }

    // R is the top k x k triangle (column-major in `a`).
    let r = |row: usize, col: usize| a[col][row];
    for (j, col_norm) in col_norms.iter().enumerate() {
        if r(j, j).abs() <= 1e-10 * col_norm.max(1e-30) {
            return Err(StatsError::Collinear {
                column: design.columns[j].0.clone(),
            });
        }
    }

    // Back-substitute R beta = (Q'y)[..k].
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = qty[i];
        for j in i + 1..k {
            acc -= r(i, j) * beta[j];
        }
        beta[i] = acc / r(i, i);
    }

    let rss: f64 = qty[k..].iter().map(|v| v * v).sum();
    let df = n - k;
    let sigma2 = rss / df as f64;
    let residual_stddev = sigma2.sqrt();

    // Invert R (upper triangular); var(beta_i) = sigma^2 * ||row i of R^-1||^2.
    let mut rinv = vec![vec![0.0; k]; k];
    for i in (0..k).rev() {
        rinv[i][i] = 1.0 / r(i, i);
        for j in i + 1..k {
            let mut acc = 0.0;
            for m in i + 1..=j {
                acc += r(i, m) * rinv[m][j];
            }
            rinv[i][j] = -acc / r(i, i);
        }
    }

    let mut coefficients = BTreeMap::new();
    let mut p_values = BTreeMap::new();
    for (i, (name, _)) in design.columns.iter().enumerate() {
        let se = (sigma2 * rinv[i].iter().map(|v| v * v).sum::<f64>()).sqrt();
        let p = if se > 0.0 {
            students_t_two_sided_p(beta[i] / se, df)
        } else {
            // Exact fit: the coefficient is determined, not estimated.
            0.0
        };
        coefficients.insert(name.clone(), beta[i]);
        p_values.insert(name.clone(), p);
    }

    Ok(RegressionFit {
        coefficients,
        residual_stddev,
        n,
        p_values,
    })
}
