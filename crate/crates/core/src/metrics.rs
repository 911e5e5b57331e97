//! Forecast-quality kernels: Seasonal Naive, MASE, quantile-loss CRPS and
//! sample-to-quantile conversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::quantile_sorted;

pub const QUANTILE_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
pub const MEDIAN_INDEX: usize = 4;

/// Nine quantile tracks per forecast step, levels `0.1..=0.9`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileForecast {
    pub values: Vec<[f64; 9]>,
}

impl QuantileForecast {
    /// Checks finiteness and monotonicity along the level axis.
    pub fn new(values: Vec<[f64; 9]>) -> Result<Self> {
        for (step, q) in values.iter().enumerate() {
            if let Some(level) = monotonicity_violation(q) {
                return Err(Error::InvalidInput(format!(
                    "quantiles at step {} are not monotone at level {level}",
                    step + 1
                )));
            }
        }
        Ok(Self { values })
    }

    /// Every level equals the point forecast.
    pub fn degenerate(points: &[f64]) -> Self {
        Self {
            values: points.iter().map(|p| [*p; 9]).collect(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn median(&self) -> Vec<f64> {
        self.values.iter().map(|q| q[MEDIAN_INDEX]).collect()
    }

    pub fn level(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|q| q[k]).collect()
    }
}

/// First level whose value is non-finite or below the previous level.
pub fn monotonicity_violation(q: &[f64; 9]) -> Option<f64> {
    for k in 0..9 {
        if !q[k].is_finite() || (k > 0 && q[k] < q[k - 1]) {
            return Some(QUANTILE_LEVELS[k]);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalNaive {
    pub forecast: QuantileForecast,
    pub period_used: usize,
    /// Set when the context was shorter than the period and the last value
    /// was repeated instead.
    pub diagnostic: Option<String>,
}

/// Repeats the last full season of `context` across `horizon` steps, with all
/// quantile levels equal to the point forecast.
pub fn seasonal_naive(context: &[f64], period: usize, horizon: usize) -> Result<SeasonalNaive> {
    if context.is_empty() {
        return Err(Error::InvalidInput("seasonal naive needs a non-empty context".into()));
    }
    let (s, diagnostic) = if period >= 1 && context.len() >= period {
        (period, None)
    } else {
        (
            1,
            Some(format!(
                "context length {} shorter than period {period}; using last value",
                context.len()
            )),
        )
    };
    let base = context.len() - s;
    let points: Vec<f64> = (0..horizon).map(|t| context[base + t % s]).collect();
    Ok(SeasonalNaive {
        forecast: QuantileForecast::degenerate(&points),
        period_used: s,
        diagnostic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaseDenominator {
    /// Seasonal differences inside the window (`H > s`).
    InWindow,
    /// Differences against the context season before the window (`H <= s`).
    ContextLookback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaseResult {
    /// `None` when the denominator is zero or could not be formed.
    pub value: Option<f64>,
    pub numerator: f64,
    pub denominator: f64,
    pub path: MaseDenominator,
}

/// MASE of point forecast `yhat` against truth `y`.
///
/// For `H > s` the scale is `(1/(H-s)) Σ_{j>s} |Y_j - Y_{j-s}|`; otherwise
/// `(1/H) Σ_j |Y_j - Z_{j-s}|` where `Z` continues `y` backwards into
/// `context`.
pub fn mase(y: &[f64], yhat: &[f64], period: usize, context: &[f64]) -> MaseResult {
    let h = y.len();
    let s = period.max(1);
    let numerator = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / h as f64;
    let (denominator, path) = if h > s {
        let d = (s..h).map(|j| (y[j] - y[j - s]).abs()).sum::<f64>() / (h - s) as f64;
        (d, MaseDenominator::InWindow)
    } else if context.len() >= s {
        let base = context.len() - s;
        let d = (0..h).map(|j| (y[j] - context[base + j]).abs()).sum::<f64>() / h as f64;
        (d, MaseDenominator::ContextLookback)
    } else {
        (f64::NAN, MaseDenominator::ContextLookback)
    };
    let value = (denominator > 0.0 && h > 0).then(|| numerator / denominator);
    MaseResult {
        value,
        numerator,
        denominator,
        path,
    }
}

/// Pinball loss `Λ_α(q, y) = (α - 1{y < q})(y - q)`.
pub fn pinball(alpha: f64, q: f64, y: f64) -> f64 {
    let indicator = if y < q { 1.0 } else { 0.0 };
    (alpha - indicator) * (y - q)
}

/// Weighted quantile loss per level; `None` when `Σ|Y| = 0`.
pub fn weighted_quantile_losses(y: &[f64], qf: &QuantileForecast) -> Option<[f64; 9]> {
    let scale: f64 = y.iter().map(|v| v.abs()).sum();
    if !(scale > 0.0) {
        return None;
    }
    let mut out = [0.0; 9];
    for (k, alpha) in QUANTILE_LEVELS.iter().enumerate() {
        let loss: f64 = y.iter().zip(&qf.values).map(|(yi, q)| pinball(*alpha, q[k], *yi)).sum();
        out[k] = 2.0 * loss / scale;
    }
    Some(out)
}

/// CRPS as the mean weighted quantile loss over the nine levels.
pub fn crps(y: &[f64], qf: &QuantileForecast) -> Option<f64> {
    weighted_quantile_losses(y, qf).map(|w| w.iter().sum::<f64>() / 9.0)
}

/// Per-step quantiles of sample paths by linear interpolation at `(n-1)·p`.
pub fn samples_to_quantiles(samples: &[Vec<f64>]) -> Result<QuantileForecast> {
    let mut values = Vec::with_capacity(samples.len());
    for (step, s) in samples.iter().enumerate() {
        if s.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "step {} has {} samples; at least 2 are required",
                step + 1,
                s.len()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("step {} has non-finite samples", step + 1)));
        }
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        values.push(QUANTILE_LEVELS.map(|p| quantile_sorted(&sorted, p)));
    }
    Ok(QuantileForecast { values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowScore {
    pub mase: Option<f64>,
    pub crps: Option<f64>,
    pub mase_denominator: MaseDenominator,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// MASE on the median track and CRPS on all levels for one window.
pub fn score_window(y: &[f64], qf: &QuantileForecast, period: usize, context: &[f64]) -> WindowScore {
    let m = mase(y, &qf.median(), period, context);
    let c = crps(y, qf);
    let mut diagnostics = Vec::new();
    if m.value.is_none() {
        diagnostics.push("mase undefined: zero scale".to_string());
    }
    if c.is_none() {
        diagnostics.push("crps undefined: truth sums to zero".to_string());
    }
    WindowScore {
        mase: m.value,
        crps: c,
        mase_denominator: m.path,
        diagnostics,
    }
}
