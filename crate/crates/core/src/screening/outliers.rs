//! Sliding-window IQR outlier detection.
//!
//! For every point the centred window (clipped at the series boundaries)
//! provides a local median `m_t` and interquartile range `IQR_t`. The scaled
//! deviation `d_t = |x_t - m_t| / IQR_t` classifies points as transitional
//! (`k_trans < d_t < k_ext`, flagged only) or extreme (`d_t >= k_ext`,
//! replaced by the preceding valid observation).

use serde::{Deserialize, Serialize};

use super::config::ScreeningConfig;
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputation {
    pub index: usize,
    pub old: f64,
    pub new: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierScan {
    pub window: usize,
    pub transitional: Vec<usize>,
    pub extreme: Vec<usize>,
    pub cleaned: Vec<f64>,
    pub imputations: Vec<Imputation>,
}

/// Sorted multiset over the current window.
struct SortedWindow(Vec<f64>);

impl SortedWindow {
    fn insert(&mut self, v: f64) {
        let pos = self.0.partition_point(|x| x.total_cmp(&v).is_lt());
        self.0.insert(pos, v);
    }

    fn remove(&mut self, v: f64) {
        let pos = self.0.partition_point(|x| x.total_cmp(&v).is_lt());
        debug_assert!(self.0[pos].total_cmp(&v).is_eq());
        self.0.remove(pos);
    }
}

/// Scaled deviations `d_t` for every index, using a centred window of
/// `window` points. A zero IQR yields 0 when the point equals the median and
/// infinity otherwise.
pub fn scaled_deviations(x: &[f64], window: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let half = window.max(1) / 2;
    let mut sorted = SortedWindow(Vec::with_capacity(window + 1));
    let (mut lo, mut hi) = (0usize, 0usize); // current window is [lo, hi)
    let mut d = Vec::with_capacity(n);
    for t in 0..n {
        let want_lo = t.saturating_sub(half);
        let want_hi = (t + half + 1).min(n);
        while hi < want_hi {
            sorted.insert(x[hi]);
            hi += 1;
        }
        while lo < want_lo {
            sorted.remove(x[lo]);
            lo += 1;
        }
        let w = &sorted.0;
        let median = quantile_sorted(w, 0.5);
        let iqr = quantile_sorted(w, 0.75) - quantile_sorted(w, 0.25);
        let dev = (x[t] - median).abs();
        d.push(if iqr > 0.0 {
            dev / iqr
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    d
}

/// Classifies points of a fully-filled series and imputes extreme ones.
pub fn iqr_outlier_scan(x: &[f64], cfg: &ScreeningConfig, period: usize) -> OutlierScan {
    let window = cfg.iqr_window.resolve(x.len(), period);
    let d = scaled_deviations(x, window);
    let mut transitional = Vec::new();
    let mut extreme = Vec::new();
    for (t, dt) in d.iter().enumerate() {
        if *dt >= cfg.k_ext {
            extreme.push(t);
        } else if *dt > cfg.k_trans {
            transitional.push(t);
        }
    }

    let mut is_extreme = vec![false; x.len()];
    for &t in &extreme {
        is_extreme[t] = true;
    }
    let mut cleaned = x.to_vec();
    let mut imputations = Vec::with_capacity(extreme.len());
    // Leading extremes have no predecessor and take the next valid value.
    let first_valid = is_extreme.iter().position(|e| !e).map(|i| x[i]);
    let mut previous: Option<f64> = None;
    for t in 0..x.len() {
        if !is_extreme[t] {
            previous = Some(x[t]);
            continue;
        }
        if let Some(new) = previous.or(first_valid) {
            cleaned[t] = new;
            imputations.push(Imputation { index: t, old: x[t], new });
        }
    }

    OutlierScan {
        window,
        transitional,
        extreme,
        cleaned,
        imputations,
    }
}
