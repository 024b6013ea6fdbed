//! Correlation measures: Pearson, Spearman (midranks for ties), and partial
//! correlation with a single control variable.

use super::ols::{ols, Design};
use super::special::students_t_two_sided_p;
use super::StatsError;

/// A correlation coefficient with its two-sided significance level.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_value: f64,
}

fn check_pair(x: &[f64], y: &[f64], context: &str) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
            context: context.into(),
        });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewObservations {
            got: x.len(),
            need: 3,
            context: context.into(),
        });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite("correlation input"));
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Centered second moments: (sum (x-mx)(y-my), sum (x-mx)^2, sum (y-my)^2).
fn moments(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy, sxx, syy)
}

/// Shared core: r plus a two-sided p-value from the t distribution with the
/// caller's degrees of freedom (n-2 plain, n-3 with one control partialled
/// out).
fn correlation_with_df(x: &[f64], y: &[f64], df: usize) -> Result<CorrelationResult, StatsError> {
    let (sxy, sxx, syy) = moments(x, y);
    if sxx <= 0.0 {
        return Err(StatsError::DegenerateInput(
            "first sequence is constant".into(),
        ));
    }
    if syy <= 0.0 {
        return Err(StatsError::DegenerateInput(
            "second sequence is constant".into(),
        ));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    // r carries O(eps) rounding from the square roots, so 1 - r^2 within a
    // few eps of zero is numerically exact dependence, not a finite t.
    let p_value = if (1.0 - r * r) <= 4.0 * f64::EPSILON {
        0.0
    } else {
        let t = r * (df as f64 / (1.0 - r * r)).sqrt();
        students_t_two_sided_p(t, df)
    };
    Ok(CorrelationResult { r, p_value })
}

/// Pearson product-moment correlation with a two-sided p-value (t test,
/// n-2 degrees of freedom).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, "pearson")?;
    correlation_with_df(x, y, x.len() - 2)
}

/// Ranks with ties replaced by the mean of the positions they occupy.
pub fn midranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, "spearman")?;
    let rx = midranks(x);
    let ry = midranks(y);
    correlation_with_df(&rx, &ry, x.len() - 2)
}

/// Correlation between `x` and `y` after removing the linear influence of
/// `control` from both (residuals of each on [1, control], then Pearson with
/// n-3 degrees of freedom).
///
/// If either variable is numerically fully explained by the control, there
/// is nothing left to correlate and the input is reported as degenerate.
pub fn partial_correlation(
    x: &[f64],
    y: &[f64],
    control: &[f64],
) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, "partial correlation")?;
    if control.len() != x.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: control.len(),
            context: "partial correlation control".into(),
        });
    }
    if x.len() < 4 {
        return Err(StatsError::TooFewObservations {
            got: x.len(),
            need: 4,
            context: "partial correlation".into(),
        });
    }
    let rx = residualize(x, control, "x")?;
    let ry = residualize(y, control, "y")?;
    correlation_with_df(&rx, &ry, x.len() - 3)
}

fn residualize(v: &[f64], control: &[f64], label: &str) -> Result<Vec<f64>, StatsError> {
    let design = Design::new()
        .with_column("intercept", vec![1.0; v.len()])
        .with_column("control", control.to_vec());
    let fit = ols(&design, v)?;
    let b0 = fit.coefficients["intercept"];
    let b1 = fit.coefficients["control"];
    let resid: Vec<f64> = v
        .iter()
        .zip(control)
        .map(|(vi, ci)| vi - b0 - b1 * ci)
        .collect();
    // Compare what survives against the original spread: if the control
    // absorbs (numerically) everything, the partial correlation is undefined.
    let (_, svv, _) = moments(v, v);
    let (_, srr, _) = moments(&resid, &resid);
    if srr.sqrt() <= 1e-9 * svv.sqrt() {
        return Err(StatsError::DegenerateInput(format!(
            "`{label}` is numerically fully explained by the control variable"
        )));
    }
    Ok(resid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn standard_normals(n: usize, rng: &mut ChaCha12Rng) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect()
    }

    #[test]
    fn pearson_worked_example() {
        // Hand computation: centered cross products give r = 1.0 / 1.25 = 0.8,
        // and with n = 4 the two-sided tail works out to exactly 0.2
        // (t^2 = 32/9, P = 1 - t/sqrt(t^2+2) applied two-sided).
        let got = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((got.r - 0.8).abs() < 1e-12, "r = {}", got.r);
        assert!((got.p_value - 0.2).abs() < 1e-9, "p = {}", got.p_value);
    }

    #[test]
    fn pearson_exact_linearity() {
        let got = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!((got.r - 1.0).abs() < 1e-12);
        assert_eq!(got.p_value, 0.0);
        let neg = pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
        assert!((neg.r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_affine_invariance() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let x = standard_normals(40, &mut rng);
        let y = standard_normals(40, &mut rng);
        let base = pearson(&x, &y).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| 3.5 * v + 11.0).collect();
        let ys: Vec<f64> = y.iter().map(|v| 0.25 * v - 2.0).collect();
        let scaled = pearson(&xs, &ys).unwrap();
        assert!((base.r - scaled.r).abs() < 1e-12);
        // Flipping the sign of one side flips r.
        let yneg: Vec<f64> = y.iter().map(|v| -v).collect();
        let flipped = pearson(&x, &yneg).unwrap();
        assert!((base.r + flipped.r).abs() < 1e-12);
    }

    #[test]
    fn pearson_rejects_degenerate_and_mismatched() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::DegenerateInput(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewObservations { .. })
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(StatsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn midranks_handle_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(midranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(midranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn spearman_monotone_extremes() {
        let x: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let up: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let down: Vec<f64> = x.iter().map(|v| -v * v * v).collect();
        assert!((spearman(&x, &up).unwrap().r - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &down).unwrap().r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_tied_example() {
        // Ranks of x are [1, 2.5, 2.5, 4]; Pearson against [1,2,3,4] gives
        // 1.125 / sqrt(1.125 * 1.25) = 3/sqrt(10).
        let got = spearman(&[1.0, 2.0, 2.0, 3.0], &[10.0, 20.0, 30.0, 40.0]).unwrap();
        let want = 3.0 / 10.0f64.sqrt();
        assert!((got.r - want).abs() < 1e-12, "r = {}", got.r);
    }

    #[test]
    fn spearman_invariant_to_monotone_transforms() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let x = standard_normals(30, &mut rng);
        let y = standard_normals(30, &mut rng);
        let base = spearman(&x, &y).unwrap();
        let xt: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        let yt: Vec<f64> = y.iter().map(|v| v.tanh()).collect();
        let transformed = spearman(&xt, &yt).unwrap();
        assert!((base.r - transformed.r).abs() < 1e-12);
    }

    #[test]
    fn partial_correlation_removes_shared_control() {
        // x and y depend on each other only through the control; after
        // partialling it out the leftover correlation is indistinguishable
        // from noise.
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let n = 500;
        let c = standard_normals(n, &mut rng);
        let ex = standard_normals(n, &mut rng);
        let ey = standard_normals(n, &mut rng);
        let x: Vec<f64> = (0..n).map(|i| c[i] + 0.1 * ex[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| c[i] + 0.1 * ey[i]).collect();

        let raw = pearson(&x, &y).unwrap();
        assert!(raw.r > 0.95, "raw r = {}", raw.r);
        assert!(raw.p_value < 1e-12);

        let part = partial_correlation(&x, &y, &c).unwrap();
        assert!(part.r.abs() < 0.1, "partial r = {}", part.r);
        assert!(part.p_value > 0.05, "partial p = {}", part.p_value);
    }

    #[test]
    fn partial_correlation_independent_noise_is_insignificant() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 500;
        let x = standard_normals(n, &mut rng);
        let y = standard_normals(n, &mut rng);
        let c = standard_normals(n, &mut rng);
        let part = partial_correlation(&x, &y, &c).unwrap();
        assert!(part.p_value > 0.05, "p = {}", part.p_value);
    }

    #[test]
    fn partial_correlation_flags_fully_explained_variable() {
        let c: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let err = partial_correlation(&c.clone(), &y, &c).unwrap_err();
        assert!(matches!(err, StatsError::DegenerateInput(_)), "{err:?}");
    }
}
