use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GuideError, Result};
use crate::metric::oracle::OracleField;
use crate::tree::SearchTree;

/// How raw suboptimality and remaining-work scores are scaled into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Per-tree min-max; constant columns map to 0.
    #[default]
    MinMax,
    /// Divide by the largest finite value in the tree.
    GlobalMax,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::MinMax => "min-max",
            Normalization::GlobalMax => "global-max",
        })
    }
}

impl FromStr for Normalization {
    type Err = GuideError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-max" | "minmax" => Ok(Normalization::MinMax),
            "global-max" | "globalmax" => Ok(Normalization::GlobalMax),
            _ => Err(GuideError::UnknownName {
                kind: "normalization",
                name: s.into(),
                valid: "min-max, global-max".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetParams {
    /// Temperature on suboptimality.
    pub delta: f64,
    /// Temperature on remaining work.
    pub tau: f64,
    /// Probability floor of the smoothed target.
    pub eps: f64,
    pub normalization: Normalization,
}

impl Default for TargetParams {
    fn default() -> Self {
        TargetParams { delta: 0.1, tau: 0.1, eps: 1e-4, normalization: Normalization::MinMax }
    }
}

/// Raw per-node scores; `+∞` marks nodes the oracle cannot connect to the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeScores {
    pub delta: Vec<f64>,
    pub tau: Vec<f64>,
}

/// Suboptimality `cost_from_root(v) + d(v, t) - d(s, t)` (clamped at 0) and
/// remaining work `d(v, t)` for the first `len` nodes of `tree`.
pub fn node_scores(tree: &SearchTree, len: usize, field: &OracleField) -> NodeScores {
    let tau: Vec<f64> = tree.poses()[..len].iter().map(|p| field.query(p)).collect();
    let start_tau = tau[0];
    let delta = (0..len).map(|v| suboptimality(tree.cost_from_root(v), tau[v], start_tau)).collect();
    NodeScores { delta, tau }
}

pub(crate) fn suboptimality(cost_from_root: f64, tau: f64, start_tau: f64) -> f64 {
    if !tau.is_finite() {
        return f64::INFINITY;
    }
    let d = cost_from_root + tau - start_tau;
    if d.is_finite() {
        d.max(0.0)
    } else {
        // Unreachable start: every finite-τ node is equally suboptimal.
        0.0
    }
}

/// Smoothed softmin target over tree nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    pub probs: Vec<f64>,
    /// Normalized suboptimality per node.
    pub delta: Vec<f64>,
    /// Normalized remaining work per node.
    pub tau: Vec<f64>,
    /// Additive smoothing mass, in the same units as `z`.
    pub gamma: f64,
    /// Partition function of the unsmoothed softmin.
    pub z: f64,
    pub params: TargetParams,
}

impl TargetDistribution {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn normalize(raw: &[f64], mode: Normalization) -> Vec<f64> {
    let finite = raw.iter().copied().filter(|x| x.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    raw.iter()
        .map(|&x| {
            if !x.is_finite() {
                return 1.0;
            }
            match mode {
                Normalization::MinMax if hi > lo => (x - lo) / (hi - lo),
                Normalization::MinMax => 0.0,
                Normalization::GlobalMax if hi > 0.0 => (x / hi).clamp(0.0, 1.0),
                Normalization::GlobalMax => 0.0,
            }
        })
        .collect()
}

/// Additive mass that lifts the smallest of `weights / Σ weights` to `eps`.
pub fn smoothing_gamma(weights: &[f64], eps: f64) -> f64 {
    let z: f64 = weights.iter().sum();
    let n = weights.len() as f64;
    let w_min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    // max_u Z (eps - Q(u)) / (1 - eps |T|) is attained at the smallest weight.
    ((eps * z - w_min) / (1.0 - eps * n)).max(0.0)
}

/// `(w + γ) / (Σ w + γ |T|)`.
pub fn smooth(weights: &[f64], gamma: f64) -> Vec<f64> {
    let z: f64 = weights.iter().sum();
    let denom = z + gamma * weights.len() as f64;
    weights.iter().map(|w| (w + gamma) / denom).collect()
}

/// Builds the ε-floored softmin target from raw scores.
pub fn target_distribution(delta: &[f64], tau: &[f64], params: &TargetParams) -> Result<TargetDistribution> {
    if delta.len() != tau.len() || delta.is_empty() {
        return Err(GuideError::InvalidParameter("score vectors must be non-empty and equal length".into()));
    }
    if !(params.delta > 0.0) || !(params.tau > 0.0) {
        return Err(GuideError::InvalidParameter("temperatures must be > 0".into()));
    }
    let n = delta.len();
    if !(params.eps > 0.0) || params.eps * n as f64 >= 1.0 {
        return Err(GuideError::InvalidParameter(format!(
            "need 0 < eps and eps*|T| < 1, got eps={} |T|={n}",
            params.eps
        )));
    }
    let dn = normalize(delta, params.normalization);
    let tn = normalize(tau, params.normalization);
    let s: Vec<f64> = dn.iter().zip(&tn).map(|(d, t)| d / params.delta + t / params.tau).collect();
    let s_min = s.iter().copied().fold(f64::INFINITY, f64::min);
    // Shifted weights keep the largest at 1; γ and Z scale by the same factor.
    let w: Vec<f64> = s.iter().map(|x| (-(x - s_min)).exp()).collect();
    let gamma = smoothing_gamma(&w, params.eps);
    let probs = smooth(&w, gamma);
    let scale = (-s_min).exp();
    let z: f64 = w.iter().sum();
    Ok(TargetDistribution { probs, delta: dn, tau: tn, gamma: gamma * scale, z: z * scale, params: *params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_scores_give_uniform() {
        let t = target_distribution(&[0.3; 5], &[2.0; 5], &TargetParams::default()).unwrap();
        for p in &t.probs {
            assert_relative_eq!(*p, 0.2, epsilon = 1e-15);
        }
        assert_eq!(t.gamma, 0.0);
    }

    #[test]
    fn two_node_softmin_and_gamma() {
        // Oracle: direct evaluation of e^{-s}/Z with s = (0, 10).
        let e0 = 1.0f64;
        let e1 = (-10.0f64).exp();
        let z = e0 + e1;
        let q = [e0 / z, e1 / z];
        assert_relative_eq!(q[0], 0.9999546, epsilon = 1e-7);
        assert_relative_eq!(q[1], 4.5398e-5, epsilon = 1e-9);
        let eps = 1e-4;
        let gamma_oracle = z * (eps - q[1]) / (1.0 - 2.0 * eps);
        assert_relative_eq!(gamma_oracle, 5.461e-5, epsilon = 1e-8);

        let params = TargetParams { eps, ..TargetParams::default() };
        let t = target_distribution(&[0.0, 1.0], &[5.0, 5.0], &params).unwrap();
        assert_relative_eq!(t.z, z, epsilon = 1e-15);
        assert_relative_eq!(t.gamma, gamma_oracle, epsilon = 1e-15);
        assert_relative_eq!(t.probs[1], eps, epsilon = 1e-15);
        assert_relative_eq!(t.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-15);

        // Large ε floor only kicks in when needed.
        let loose = TargetParams { eps: 1e-6, ..TargetParams::default() };
        let t = target_distribution(&[0.0, 1.0], &[5.0, 5.0], &loose).unwrap();
        assert_eq!(t.gamma, 0.0);
        assert_relative_eq!(t.probs[0], q[0], epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = TargetParams { eps: 0.5, ..TargetParams::default() };
        assert!(target_distribution(&[0.0, 1.0], &[0.0, 1.0], &p).is_err());
        let p = TargetParams { delta: 0.0, ..TargetParams::default() };
        assert!(target_distribution(&[0.0], &[0.0], &p).is_err());
    }

    #[test]
    fn unreachable_nodes_score_worst() {
        let t = target_distribution(&[0.0, 0.5, f64::INFINITY], &[1.0, 2.0, f64::INFINITY], &TargetParams::default())
            .unwrap();
        assert_eq!(t.delta[2], 1.0);
        assert_eq!(t.tau[2], 1.0);
        assert!(t.probs[2] <= t.probs[1]);
    }

    #[test]
    fn colder_temperatures_steepen() {
        let d = [0.0, 0.2, 0.9, 0.4];
        let tau = [0.7, 0.1, 0.3, 0.5];
        let warm = TargetParams { delta: 0.4, tau: 0.4, eps: 1e-6, ..TargetParams::default() };
        let cold = TargetParams { delta: 0.2, tau: 0.2, ..warm };
        let a = target_distribution(&d, &tau, &warm).unwrap();
        let b = target_distribution(&d, &tau, &cold).unwrap();
        let max = |t: &TargetDistribution| t.probs.iter().copied().fold(0.0, f64::max);
        assert!(max(&b) > max(&a));
    }

    #[test]
    fn global_max_normalization() {
        let p = TargetParams { normalization: Normalization::GlobalMax, ..TargetParams::default() };
        let t = target_distribution(&[0.0, 2.0], &[1.0, 4.0], &p).unwrap();
        assert_eq!(t.delta, vec![0.0, 1.0]);
        assert_eq!(t.tau, vec![0.25, 1.0]);
    }
}
