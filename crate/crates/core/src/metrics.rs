//! Metric functions `f` and codebook objective estimators
//! `J = E_h[f(max_k |W[k]ᴴh|²)]`.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::Codebook;
use crate::error::{Error, Result};

/// Default sigmoid steepness for the coverage surrogate.
pub const DEFAULT_ALPHA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `f(x) = x`
    AvgGain,
    /// `f(x) = log2(1 + x)`
    Rate,
    /// `f(x) = 1 / (1 + exp(-α (x - γ)))`
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub kind: MetricKind,
    /// Coverage threshold γ on the absolute gain scale.
    pub gamma: f64,
    /// Sigmoid steepness α.
    pub alpha: f64,
    /// Linear `P_tot / N_0`, used when reporting rates.
    pub snr: f64,
}

impl Metric {
    pub fn avg_gain() -> Self {
        Self {
            kind: MetricKind::AvgGain,
            gamma: 0.0,
            alpha: DEFAULT_ALPHA,
            snr: 1.0,
        }
    }

    pub fn rate() -> Self {
        Self {
            kind: MetricKind::Rate,
            ..Self::avg_gain()
        }
    }

    pub fn coverage(gamma: f64, alpha: f64) -> Result<Self> {
        let m = Self {
            kind: MetricKind::Coverage,
            gamma,
            alpha,
            ..Self::avg_gain()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_snr(mut self, snr: f64) -> Self {
        self.snr = snr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == MetricKind::Coverage {
            if !(self.gamma.is_finite() && self.gamma >= 0.0) {
                return Err(Error::config(
                    "gamma",
                    format!("must be >= 0, got {}", self.gamma),
                ));
            }
            if !(self.alpha.is_finite() && self.alpha > 0.0) {
                return Err(Error::config(
                    "alpha",
                    format!("must be > 0, got {}", self.alpha),
                ));
            }
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::config(
                "snr",
                format!("must be > 0, got {}", self.snr),
            ));
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            MetricKind::AvgGain => x,
            MetricKind::Rate => x.ln_1p() / LN_2,
            MetricKind::Coverage => sigmoid(self.alpha * (x - self.gamma)),
        }
    }

    /// `f'(x)`.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match self.kind {
            MetricKind::AvgGain => 1.0,
            MetricKind::Rate => 1.0 / ((1.0 + x) * LN_2),
            MetricKind::Coverage => {
                // 1 - s taken as sigmoid(-z) so the tails do not cancel to zero
                let z = self.alpha * (x - self.gamma);
                self.alpha * sigmoid(z) * sigmoid(-z)
            }
        }
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Noiseless max-combining gain `max_k |W[k]ᴴh|²` and its lowest attaining index.
pub fn effective_gain(cb: &Codebook, h: &[Complex64]) -> Result<(f64, usize)> {
    if h.len() != cb.dim() {
        return Err(Error::domain(format!(
            "channel length {} does not match codeword length {}",
            h.len(),
            cb.dim()
        )));
    }
    Ok(cb.best_gain(h))
}

fn check_samples<S: AsRef<[Complex64]>>(cb: &Codebook, samples: &[S]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::domain("sample list is empty"));
    }
    if let Some(i) = samples.iter().position(|h| h.as_ref().len() != cb.dim()) {
        return Err(Error::domain(format!(
            "sample {i} has length {} but codewords have length {}",
            samples[i].as_ref().len(),
            cb.dim()
        )));
    }
    Ok(())
}

/// Effective gains of every sample, in sample order.
pub fn effective_gains<S: AsRef<[Complex64]> + Sync>(
    cb: &Codebook,
    samples: &[S],
) -> Result<Vec<f64>> {
    check_samples(cb, samples)?;
    Ok(samples
        .par_iter()
        .map(|h| cb.best_gain(h.as_ref()).0)
        .collect())
}

/// Sample mean of `f(effective gain)`.
pub fn estimate_objective<S: AsRef<[Complex64]> + Sync>(
    cb: &Codebook,
    samples: &[S],
    m: &Metric,
) -> Result<f64> {
    let values: Vec<f64> = effective_gains(cb, samples)?
        .into_iter()
        .map(|g| m.value(g))
        .collect();
    Ok(mean(&values))
}

/// Fraction of samples whose effective gain is strictly below `gamma`.
pub fn outage_fraction<S: AsRef<[Complex64]> + Sync>(
    cb: &Codebook,
    samples: &[S],
    gamma: f64,
) -> Result<f64> {
    let gains = effective_gains(cb, samples)?;
    Ok(fraction_below(&gains, gamma))
}

/// Fraction of `values` strictly below `threshold`; 0 for an empty slice.
pub fn fraction_below(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v < threshold).count() as f64 / values.len() as f64
}

/// Pairwise sum; result depends only on the slice contents and order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Pairwise mean; NaN for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}
