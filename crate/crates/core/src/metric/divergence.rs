use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GuideError, Result};
use crate::metric::target::TargetDistribution;

/// `Σ p ln(p/q)` with `0 ln 0 = 0`; `+∞` when `q` misses support of `p`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must have equal length");
    let mut s = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            s += pi * (pi / qi).ln();
        }
    }
    // Rounding can push an exact zero slightly negative.
    s.max(0.0)
}

/// Jensen-Shannon divergence against the elementwise mean; bounded by `ln 2`.
pub fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions must have equal length");
    let mut s = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            s += 0.5 * pi * (pi / m).ln();
        }
        if qi > 0.0 {
            s += 0.5 * qi * (qi / m).ln();
        }
    }
    s.clamp(0.0, std::f64::consts::LN_2)
}

pub fn distribution_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeMode {
    /// Negative log-likelihood of the selected node under the target.
    #[default]
    Nll,
    Kl,
    Js,
}

impl SeMode {
    pub fn needs_distribution(self) -> bool {
        !matches!(self, SeMode::Nll)
    }
}

impl fmt::Display for SeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeMode::Nll => "nll",
            SeMode::Kl => "kl",
            SeMode::Js => "js",
        })
    }
}

impl FromStr for SeMode {
    type Err = GuideError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nll" => Ok(SeMode::Nll),
            "kl" => Ok(SeMode::Kl),
            "js" => Ok(SeMode::Js),
            _ => Err(GuideError::UnknownName { kind: "metric", name: s.into(), valid: "nll, kl, js".into() }),
        }
    }
}

/// Scores one selection against the target built for the same tree snapshot.
pub fn sampling_efficiency(
    mode: SeMode,
    selected: usize,
    distribution: Option<&[f64]>,
    target: &TargetDistribution,
) -> Result<f64> {
    match mode {
        SeMode::Nll => Ok((-target.probs[selected].ln()).max(0.0)),
        SeMode::Kl | SeMode::Js => {
            let p = distribution.ok_or_else(|| GuideError::MissingDistribution(mode.to_string()))?;
            if p.len() != target.probs.len() {
                return Err(GuideError::InvalidParameter("distribution and target differ in length".into()));
            }
            Ok(if mode == SeMode::Kl { kl_divergence(p, &target.probs) } else { js_divergence(p, &target.probs) })
        }
    }
}
