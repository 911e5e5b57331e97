//! Augmented Dickey–Fuller unit-root test, constant-only regression.
//!
//! The lag order is fixed by the Schwert rule `⌊12 (L/100)^{1/4}⌋` and the
//! p-value comes from MacKinnon's (1994) approximate response surface for
//! one integrated variable with a constant.

use serde::{Deserialize, Serialize};

use crate::stats::{normal_cdf, ols};

pub const MIN_ADF_LENGTH: usize = 20;
pub const STATIONARITY_ALPHA: f64 = 0.05;

// MacKinnon (1994) tau-statistic surface, constant-only case, N = 1.
const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;
const TAU_SMALL_P: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_LARGE_P: [f64; 4] = [1.7339, 0.93202, -0.12745, -0.010368];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub p_value: f64,
    pub lags: usize,
    pub nobs: usize,
}

impl AdfResult {
    pub fn is_stationary(&self) -> bool {
        self.p_value < STATIONARITY_ALPHA
    }
}

pub fn schwert_lags(len: usize) -> usize {
    (12.0 * (len as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Approximate p-value of an ADF tau statistic (constant, no trend).
pub fn mackinnon_p_value(tau: f64) -> f64 {
    if tau > TAU_MAX {
        return 1.0;
    }
    if tau < TAU_MIN {
        return 0.0;
    }
    let poly = |c: &[f64]| c.iter().rev().fold(0.0, |acc, k| acc * tau + k);
    if tau <= TAU_STAR {
        normal_cdf(poly(&TAU_SMALL_P))
    } else {
        normal_cdf(poly(&TAU_LARGE_P))
    }
}

/// Regresses `Δx_t` on `x_{t-1}`, `Δx_{t-1..=t-p}` and a constant and returns
/// the t-statistic of the level coefficient. `None` for series shorter than
/// [`MIN_ADF_LENGTH`] or a singular design (e.g. a constant series).
pub fn adf_test(x: &[f64]) -> Option<AdfResult> {
    if x.len() < MIN_ADF_LENGTH {
        return None;
    }
    let lags = schwert_lags(x.len());
    let diff: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    if diff.len() <= lags {
        return None;
    }
    let rows: Vec<usize> = (lags..diff.len()).collect();
    let nobs = rows.len();

    let y: Vec<f64> = rows.iter().map(|&i| diff[i]).collect();
    let mut columns = Vec::with_capacity(lags + 2);
    columns.push(rows.iter().map(|&i| x[i]).collect::<Vec<f64>>());
    for lag in 1..=lags {
        columns.push(rows.iter().map(|&i| diff[i - lag]).collect());
    }
    columns.push(vec![1.0; nobs]);

    let fit = ols(&columns, &y)?;
    let se = fit.std_errors[0];
    if !(se > 0.0) || !se.is_finite() {
        return None;
    }
    let statistic = fit.coefficients[0] / se;
    Some(AdfResult {
        statistic,
        p_value: mackinnon_p_value(statistic),
        lags,
        nobs,
    })
}
