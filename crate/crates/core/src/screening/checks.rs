//! Per-variate quality checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::config::ScreeningConfig;
use super::outliers::{iqr_outlier_scan, Imputation};
use crate::corpus::Variate;
use crate::error::{Error, Result};
use crate::stats;

/// A value distribution is "dominated" when its five most frequent values
/// cover at least this share of the points.
pub const TOPK_DOMINANCE_LIMIT: f64 = 0.5;
/// Normalized value entropy below this marks a (near-)constant signal.
pub const ENTROPY_LIMIT: f64 = 0.1;
/// Ljung–Box significance level; all p-values above it mean white noise.
pub const WHITE_NOISE_ALPHA: f64 = 0.05;

/// Share of the five most frequent values and the normalized entropy of the
/// empirical value distribution. A single distinct value has entropy 0.
pub fn dominance_and_entropy(x: &[f64]) -> (f64, f64) {
    assert!(!x.is_empty(), "dominance of an empty series");
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for v in x {
        // fold -0.0 onto 0.0
        let key = if *v == 0.0 { 0.0f64 } else { *v };
        *counts.entry(key.to_bits()).or_default() += 1;
    }
    let n = x.len() as f64;
    let mut freq: Vec<usize> = counts.into_values().collect();
    freq.sort_unstable_by(|a, b| b.cmp(a));
    let topk = freq.iter().take(5).sum::<usize>() as f64 / n;
    let entropy = if freq.len() < 2 {
        0.0
    } else {
        let h: f64 = freq
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.ln()
            })
            .sum();
        (h / (freq.len() as f64).ln()).clamp(0.0, 1.0)
    };
    (topk, entropy)
}

/// Sample autocorrelations `ρ̂_1..=ρ̂_max_lag`.
pub fn autocorrelations(x: &[f64], max_lag: usize) -> Vec<f64> {
    let m = stats::mean(x);
    let centred: Vec<f64> = x.iter().map(|v| v - m).collect();
    let denom: f64 = centred.iter().map(|v| v * v).sum();
    (1..=max_lag)
        .map(|k| centred[k..].iter().zip(&centred).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect()
}

/// Ljung–Box p-values, one per lag in `lags`, without any degrees-of-freedom
/// correction.
pub fn ljung_box(x: &[f64], lags: &[usize]) -> Result<Vec<f64>> {
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if max_lag == 0 || x.len() <= max_lag {
        return Err(Error::InvalidInput(format!(
            "Ljung-Box needs more than {max_lag} observations, got {}",
            x.len()
        )));
    }
    if stats::variance(x) <= 0.0 {
        return Err(Error::DegenerateSeries("zero variance".into()));
    }
    let n = x.len() as f64;
    let acf = autocorrelations(x, max_lag);
    let mut q = 0.0;
    let mut cumulative = Vec::with_capacity(max_lag);
    for (k, r) in acf.iter().enumerate() {
        q += r * r / (n - (k + 1) as f64);
        cumulative.push(n * (n + 2.0) * q);
    }
    Ok(lags
        .iter()
        .map(|&h| stats::chi2_sf(cumulative[h - 1], h as f64))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    DataType,
    Length,
    MissingRate,
    SignalExistence,
    WhiteNoise,
    ExtremeOutliers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthCheck {
    pub length: usize,
    pub min_length: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingCheck {
    pub missing_rate: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalCheck {
    pub topk_dom: f64,
    pub normalized_entropy: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteNoiseCheck {
    pub lags: Vec<usize>,
    pub p_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierCheck {
    pub window: usize,
    pub transitional: Vec<usize>,
    pub extreme: Vec<usize>,
    pub extreme_fraction: f64,
    pub passed: bool,
}

/// Outcome of every executed check; `None` means the check never ran
/// because an earlier one ended the screening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub numeric: bool,
    pub length: Option<LengthCheck>,
    pub missing: Option<MissingCheck>,
    pub signal: Option<SignalCheck>,
    pub white_noise: Option<WhiteNoiseCheck>,
    pub outliers: Option<OutlierCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariateQuality {
    pub variate: String,
    pub predictable: bool,
    /// Failing checks in execution order.
    pub failed: Vec<CheckName>,
    pub checks: CheckRecord,
    pub imputation_log: Vec<Imputation>,
    /// Filled and outlier-cleaned values; absent when no numeric values exist.
    pub cleaned: Option<Vec<f64>>,
}

/// Forward fill, then backward fill for a leading gap. `None` if nothing
/// was observed.
pub fn fill_missing(values: &[f64], missing: &[bool]) -> Option<Vec<f64>> {
    let first = missing.iter().position(|m| !m)?;
    let mut out = Vec::with_capacity(values.len());
    let mut last = values[first];
    for (v, m) in values.iter().zip(missing) {
        if !m {
            last = *v;
        }
        out.push(last);
    }
    Some(out)
}

/// Runs the five checks in order: data type, integrity (length and missing
/// rate), signal existence, white noise, extreme outliers.
///
/// Length and missing-rate failures do not stop the later checks; signal,
/// white-noise and outlier failures do.
pub fn univariate_quality_check(
    variate: &Variate,
    cfg: &ScreeningConfig,
    min_length: usize,
    period: usize,
) -> VariateQuality {
    let mut quality = VariateQuality {
        variate: variate.name.clone(),
        predictable: false,
        failed: Vec::new(),
        checks: CheckRecord {
            numeric: variate.numeric,
            length: None,
            missing: None,
            signal: None,
            white_noise: None,
            outliers: None,
        },
        imputation_log: Vec::new(),
        cleaned: None,
    };

    // data type
    if !variate.numeric {
        quality.failed.push(CheckName::DataType);
        return quality;
    }

    // integrity
    let len = variate.len();
    let length = LengthCheck {
        length: len,
        min_length,
        passed: len >= min_length,
    };
    if !length.passed {
        quality.failed.push(CheckName::Length);
    }
    quality.checks.length = Some(length);
    let missing_rate = variate.missing_count() as f64 / len as f64;
    let missing = MissingCheck {
        missing_rate,
        threshold: cfg.tau_miss,
        passed: missing_rate <= cfg.tau_miss,
    };
    if !missing.passed {
        quality.failed.push(CheckName::MissingRate);
    }
    quality.checks.missing = Some(missing);

    let Some(filled) = fill_missing(&variate.values, &variate.missing) else {
        return quality;
    };

    // signal existence
    let (topk_dom, normalized_entropy) = dominance_and_entropy(&filled);
    let signal = SignalCheck {
        topk_dom,
        normalized_entropy,
        passed: !(topk_dom >= TOPK_DOMINANCE_LIMIT || normalized_entropy < ENTROPY_LIMIT),
    };
    let signal_ok = signal.passed;
    quality.checks.signal = Some(signal);
    if !signal_ok {
        quality.failed.push(CheckName::SignalExistence);
        quality.cleaned = Some(filled);
        return quality;
    }

    // white noise
    let white_noise = match ljung_box(&filled, &cfg.lb_lags) {
        Ok(p_values) => {
            let min_p = p_values.iter().copied().fold(f64::INFINITY, f64::min);
            WhiteNoiseCheck {
                lags: cfg.lb_lags.clone(),
                p_values,
                error: None,
                passed: min_p <= WHITE_NOISE_ALPHA,
            }
        }
        Err(e) => WhiteNoiseCheck {
            lags: cfg.lb_lags.clone(),
            p_values: Vec::new(),
            error: Some(e.to_string()),
            passed: false,
        },
    };
    let white_ok = white_noise.passed;
    quality.checks.white_noise = Some(white_noise);
    if !white_ok {
        quality.failed.push(CheckName::WhiteNoise);
        quality.cleaned = Some(filled);
        return quality;
    }

    // sliding-window IQR outliers
    let scan = iqr_outlier_scan(&filled, cfg, period);
    let extreme_fraction = scan.extreme.len() as f64 / len as f64;
    let passed = extreme_fraction <= cfg.tau_ext;
    quality.checks.outliers = Some(OutlierCheck {
        window: scan.window,
        transitional: scan.transitional,
        extreme: scan.extreme,
        extreme_fraction,
        passed,
    });
    if !passed {
        quality.failed.push(CheckName::ExtremeOutliers);
        quality.cleaned = Some(filled);
        return quality;
    }
    quality.imputation_log = scan.imputations;
    quality.cleaned = Some(scan.cleaned);
    quality.predictable = quality.failed.is_empty();
    quality
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn cfg() -> ScreeningConfig {
        ScreeningConfig::default()
    }

    /// Direct evaluation of the Ljung–Box formula, independent of the
    /// cumulative loop above.
    fn lb_oracle(x: &[f64], h: usize) -> f64 {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        let mut q = 0.0;
        for k in 1..=h {
            let mut ck = 0.0;
            for t in k..n {
                ck += (x[t] - m) * (x[t - k] - m);
            }
            let r = ck / c0;
            q += r * r / (n - k) as f64;
        }
        q *= (n * (n + 2)) as f64;
        statrs::function::gamma::gamma_ur(h as f64 / 2.0, q / 2.0)
    }

    #[test]
    fn dominance_examples() {
        assert_eq!(dominance_and_entropy(&[3.0; 50]), (1.0, 0.0));

        let five: Vec<f64> = (0..100).map(|i| (i % 5) as f64).collect();
        let (topk, h) = dominance_and_entropy(&five);
        assert_eq!(topk, 1.0);
        assert!((h - 1.0).abs() < 1e-12);

        let distinct: Vec<f64> = (0..1000).map(f64::from).collect();
        let (topk, h) = dominance_and_entropy(&distinct);
        assert!((topk - 0.005).abs() < 1e-15);
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ljung_box_alternating_series() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((autocorrelations(&x, 1)[0] + 0.99).abs() < 1e-12);
        let p = ljung_box(&x, &[10]).unwrap();
        assert!(p[0] < 1e-10);
        assert!((p[0] - lb_oracle(&x, 10)).abs() < 1e-15);
    }

    #[test]
    fn ljung_box_matches_reference_values() {
        // x_t = sin(0.3 t) + 0.5 cos(1.7 t), t = 0..199
        let x: Vec<f64> = (0..200)
            .map(|t| (0.3 * t as f64).sin() + 0.5 * (1.7 * t as f64).cos())
            .collect();
        let p = ljung_box(&x, &[10, 20]).unwrap();
        for (h, got) in [10, 20].iter().zip(&p) {
            let want = lb_oracle(&x, *h);
            assert!((got - want).abs() <= 1e-12 * want.max(1e-300), "{got} vs {want}");
        }
    }

    #[test]
    fn ljung_box_matches_frozen_values() {
        // statsmodels acorr_ljungbox(x, lags=[10, 20]) on x_t = (t² · a mod b) / b
        let cases: [(u64, u64, [f64; 2]); 3] = [
            (7919, 1009, [0.7405959466400271, 0.8524319454583318]),
            (104729, 997, [0.6061604254111527, 0.45639889314778714]),
            (15485863, 10007, [0.0907606796208484, 0.0497172849832148]),
        ];
        for (a, b, want) in cases {
            let x: Vec<f64> = (0..300u64).map(|t| ((t * t * a) % b) as f64 / b as f64).collect();
            let p = ljung_box(&x, &[10, 20]).unwrap();
            for (got, w) in p.iter().zip(want) {
                assert!((got - w).abs() < 1e-10, "{got} vs {w}");
            }
        }
    }

    #[test]
    fn ljung_box_ar1_and_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = vec![0.0f64; 500];
        for t in 1..500 {
            let e: f64 = rng.sample(StandardNormal);
            x[t] = 0.9 * x[t - 1] + e;
        }
        let p = ljung_box(&x, &[10, 20]).unwrap();
        assert!(p.iter().all(|v| *v < 1e-8), "{p:?}");

        assert!(matches!(
            ljung_box(&[2.0; 100], &[10]),
            Err(Error::DegenerateSeries(_))
        ));
    }

    #[test]
    fn constant_series_fails_signal_check() {
        let v = Variate::from_values("c", vec![4.2; 5000]);
        let q = univariate_quality_check(&v, &cfg(), 2000, 24);
        assert!(!q.predictable);
        assert_eq!(q.failed, vec![CheckName::SignalExistence]);
        assert_eq!(q.checks.signal.as_ref().unwrap().topk_dom, 1.0);
        assert!(q.checks.white_noise.is_none());
    }

    #[test]
    fn gaussian_noise_fails_white_noise_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        let min_p = [10, 20].map(|h| lb_oracle(&x, h)).into_iter().fold(1.0, f64::min);
        let q = univariate_quality_check(&Variate::from_values("n", x), &cfg(), 1000, 24);
        assert_eq!(min_p > 0.05, q.failed.contains(&CheckName::WhiteNoise));
        assert!(q.failed.contains(&CheckName::WhiteNoise), "seeded instance min p = {min_p}");
    }

    #[test]
    fn noisy_sine_is_predictable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..2000)
            .map(|t| {
                let e: f64 = rng.sample(StandardNormal);
                (2.0 * std::f64::consts::PI * t as f64 / 24.0).sin() + 0.05 * e
            })
            .collect();
        let q = univariate_quality_check(&Variate::from_values("s", x.clone()), &cfg(), 1000, 24);
        assert!(q.predictable, "{:?}", q.failed);
        assert!(q.imputation_log.is_empty());
        assert_eq!(q.cleaned.as_deref(), Some(&x[..]));
    }

    #[test]
    fn short_series_keeps_running_later_checks() {
        let x: Vec<f64> = (0..200).map(|t| (t as f64 * 0.2).sin()).collect();
        let q = univariate_quality_check(&Variate::from_values("s", x), &cfg(), 1000, 24);
        assert!(!q.predictable);
        assert_eq!(q.failed, vec![CheckName::Length]);
        assert!(q.checks.outliers.is_some());
    }

    #[test]
    fn missing_values_are_filled_and_rated() {
        let mut x: Vec<f64> = (0..100).map(|t| (t as f64 * 0.3).sin()).collect();
        x[0] = f64::NAN;
        x[50] = f64::NAN;
        let v = Variate::from_values("m", x.clone());
        let q = univariate_quality_check(&v, &cfg(), 10, 24);
        assert!((q.checks.missing.as_ref().unwrap().missing_rate - 0.02).abs() < 1e-15);
        let cleaned = q.cleaned.unwrap();
        assert_eq!(cleaned[0], x[1]);
        assert_eq!(cleaned[50], x[49]);
    }

    #[test]
    fn non_numeric_and_empty_variates() {
        let mut v = Variate::from_values("t", vec![1.0, 2.0, 3.0]);
        v.numeric = false;
        let q = univariate_quality_check(&v, &cfg(), 1, 1);
        assert_eq!(q.failed, vec![CheckName::DataType]);
        assert!(q.cleaned.is_none());

        let empty = Variate::from_options("e", &[None, None, None]);
        let q = univariate_quality_check(&empty, &cfg(), 1, 1);
        assert_eq!(q.failed, vec![CheckName::MissingRate]);
        assert!(q.cleaned.is_none());
    }
}
