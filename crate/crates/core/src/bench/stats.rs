//! Small statistics helpers for comparing runs.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::cspace::planner_rng;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Standard error of the mean (sample standard deviation / √n).
pub fn stderr(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Bootstrap {
    /// `mean(a) - mean(b)` on the observed samples.
    pub diff: f64,
    /// One-sided lower confidence bound on the difference.
    pub lower: f64,
}

impl Bootstrap {
    /// The interval `[lower, ∞)` excludes 0.
    pub fn excludes_zero(&self) -> bool {
        self.lower > 0.0
    }
}

/// Percentile bootstrap of `mean(a) - mean(b)` with independent resampling
/// of both groups; `level` is the one-sided confidence (e.g. 0.95).
pub fn bootstrap_mean_diff(a: &[f64], b: &[f64], resamples: usize, level: f64, seed: u64) -> Bootstrap {
    let diff = mean(a) - mean(b);
    let mut rng = planner_rng(seed, 0x4253);
    let draw = |x: &[f64], rng: &mut crate::cspace::PlannerRng| {
        (0..x.len()).map(|_| x[rng.random_range(0..x.len())]).sum::<f64>() / x.len() as f64
    };
    let mut diffs: Vec<f64> = (0..resamples).map(|_| draw(a, &mut rng) - draw(b, &mut rng)).collect();
    diffs.sort_by(f64::total_cmp);
    let k = (((1.0 - level) * resamples as f64).floor() as usize).min(resamples.saturating_sub(1));
    Bootstrap { diff, lower: diffs[k] }
}

/// Ranks starting at 1; ties share their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Spearman {
    pub rho: f64,
    /// One-sided p-value for a negative association.
    pub p_negative: f64,
}

/// Spearman rank correlation with a Student-t approximation of the
/// one-sided p-value for `rho < 0`.
pub fn spearman(x: &[f64], y: &[f64]) -> Spearman {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let rho = pearson(&ranks(x), &ranks(y));
    if n < 3 {
        return Spearman { rho, p_negative: 1.0 };
    }
    let df = (n - 2) as f64;
    let p_negative = if rho <= -1.0 {
        0.0
    } else if rho >= 1.0 {
        1.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        StudentsT::new(0.0, 1.0, df).map(|d| d.cdf(t)).unwrap_or(f64::NAN)
    };
    Spearman { rho, p_negative }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_relative_eq!(stderr(&[1.0, 2.0, 3.0]), (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        assert_eq!(stderr(&[5.0]), 0.0);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_relative_eq!(spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).rho, -1.0);
        assert_eq!(spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).p_negative, 0.0);
        // Classic textbook pair: d² sum = 2 over n = 5 gives 1 - 6*2/120 = 0.9.
        let s = spearman(&x, &[2.0, 1.0, 3.0, 4.0, 5.0]);
        assert_relative_eq!(s.rho, 0.9, epsilon = 1e-12);
        assert!(s.p_negative > 0.9);
    }

    #[test]
    fn bootstrap_separates_shifted_groups() {
        let a: Vec<f64> = (0..64).map(|i| 1.0 + (i % 7) as f64 * 0.1).collect();
        let b: Vec<f64> = (0..64).map(|i| (i % 5) as f64 * 0.1).collect();
        let r = bootstrap_mean_diff(&a, &b, 2000, 0.95, 1);
        assert!(r.excludes_zero() && r.lower < r.diff);
        let r = bootstrap_mean_diff(&a, &a, 2000, 0.95, 1);
        assert!(!r.excludes_zero());
    }
}
