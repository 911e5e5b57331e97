//! Seasonal-trend decomposition by Loess (Cleveland et al., 1990).
//!
//! Straight port of the reference inner/outer loop with local-linear fits and
//! no jumps. The remainder is defined as `x - trend - seasonal`, so the
//! reconstruction is exact by construction.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StlParams {
    pub period: usize,
    pub seasonal_window: usize,
    pub trend_window: usize,
    pub low_pass_window: usize,
    pub inner_iterations: usize,
    /// Robustness passes after the first fit.
    pub outer_iterations: usize,
}

fn next_odd(v: usize) -> usize {
    if v % 2 == 0 {
        v + 1
    } else {
        v
    }
}

impl StlParams {
    /// Defaults for a series of `len` points: periodic-like seasonal window
    /// `10·len + 1`, trend window the smallest odd integer at least
    /// `1.5·m / (1 - 1.5 / seasonal_window)`, low-pass window the smallest odd
    /// integer above `m`, two inner iterations and one robustness pass.
    pub fn for_series(len: usize, period: usize) -> Self {
        let seasonal_window = next_odd(10 * len + 1);
        let trend = (1.5 * period as f64 / (1.0 - 1.5 / seasonal_window as f64)).ceil() as usize;
        Self {
            period,
            seasonal_window,
            trend_window: next_odd(trend.max(3)),
            low_pass_window: next_odd(period + 1),
            inner_iterations: 2,
            outer_iterations: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StlMode {
    Seasonal,
    /// Too short or non-seasonal: `S = 0`, `T` a Loess smooth of the input.
    TrendOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StlDecomposition {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub remainder: Vec<f64>,
    pub period: usize,
    pub mode: StlMode,
}

/// Local-linear (or local-constant) Loess estimate at position `xs` using
/// points `nleft..=nright`. Returns `None` when all weights vanish.
#[allow(clippy::too_many_arguments)]
fn loess_point(
    y: &[f64],
    window: usize,
    degree: usize,
    xs: f64,
    nleft: usize,
    nright: usize,
    w: &mut [f64],
    robustness: Option<&[f64]>,
) -> Option<f64> {
    let n = y.len();
    let range = n as f64 - 1.0;
    let mut h = (xs - nleft as f64).max(nright as f64 - xs);
    if window > n {
        h += ((window - n) / 2) as f64;
    }
    let h9 = 0.999 * h;
    let h1 = 0.001 * h;

    let mut a = 0.0;
    for j in nleft..=nright {
        w[j] = 0.0;
        let r = (j as f64 - xs).abs();
        if r <= h9 {
            w[j] = if r <= h1 { 1.0 } else { (1.0 - (r / h).powi(3)).powi(3) };
            if let Some(rw) = robustness {
                w[j] *= rw[j];
            }
            a += w[j];
        }
    }
    if a <= 0.0 {
        return None;
    }
    for wj in &mut w[nleft..=nright] {
        *wj /= a;
    }
    if h > 0.0 && degree > 0 {
        let a: f64 = (nleft..=nright).map(|j| w[j] * j as f64).sum();
        let mut b = xs - a;
        let c: f64 = (nleft..=nright).map(|j| w[j] * (j as f64 - a).powi(2)).sum();
        if c.sqrt() > 0.001 * range {
            b /= c;
            for j in nleft..=nright {
                w[j] *= b * (j as f64 - a) + 1.0;
            }
        }
    }
    Some((nleft..=nright).map(|j| w[j] * y[j]).sum())
}

/// Loess smooth of `y` evaluated at every index.
pub fn loess_smooth(y: &[f64], window: usize, degree: usize, robustness: Option<&[f64]>) -> Vec<f64> {
    let n = y.len();
    if n < 2 {
        return y.to_vec();
    }
    let mut w = vec![0.0; n];
    let mut out = vec![0.0; n];
    if window >= n {
        for (i, o) in out.iter_mut().enumerate() {
            *o = loess_point(y, window, degree, i as f64, 0, n - 1, &mut w, robustness).unwrap_or(y[i]);
        }
    } else {
        let half = (window + 1) / 2;
        let (mut nleft, mut nright) = (0usize, window - 1);
        for (i, o) in out.iter_mut().enumerate() {
            if i + 1 > half && nright != n - 1 {
                nleft += 1;
                nright += 1;
            }
            *o = loess_point(y, window, degree, i as f64, nleft, nright, &mut w, robustness).unwrap_or(y[i]);
        }
    }
    out
}

/// Smooths each cycle-subseries and extends it by one point on each side.
/// Output has `n + 2·period` entries.
fn smooth_cycle_subseries(y: &[f64], period: usize, window: usize, robustness: Option<&[f64]>) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n + 2 * period];
    for j in 0..period {
        let idx: Vec<usize> = (j..n).step_by(period).collect();
        let k = idx.len();
        let sub: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let sub_rw: Option<Vec<f64>> = robustness.map(|rw| idx.iter().map(|&i| rw[i]).collect());
        let smoothed = loess_smooth(&sub, window, 1, sub_rw.as_deref());
        let mut w = vec![0.0; k];
        let nright = window.min(k) - 1;
        let first = loess_point(&sub, window, 1, -1.0, 0, nright, &mut w, sub_rw.as_deref()).unwrap_or(smoothed[0]);
        let nleft = k.saturating_sub(window);
        let last =
            loess_point(&sub, window, 1, k as f64, nleft, k - 1, &mut w, sub_rw.as_deref()).unwrap_or(smoothed[k - 1]);
        out[j] = first;
        for (m, v) in smoothed.iter().enumerate() {
            out[(m + 1) * period + j] = *v;
        }
        out[(k + 1) * period + j] = last;
    }
    out
}

fn moving_average(x: &[f64], len: usize) -> Vec<f64> {
    let n_out = x.len() + 1 - len;
    let mut out = Vec::with_capacity(n_out);
    let mut sum: f64 = x[..len].iter().sum();
    out.push(sum / len as f64);
    for i in 1..n_out {
        sum += x[i + len - 1] - x[i - 1];
        out.push(sum / len as f64);
    }
    out
}

fn robustness_weights(y: &[f64], fit: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = y.iter().zip(fit).map(|(a, b)| (a - b).abs()).collect();
    let mut sorted = r.clone();
    sorted.sort_by(f64::total_cmp);
    let n = r.len();
    let (m1, m2) = (n / 2, n - n / 2 - 1);
    let cmad = 3.0 * (sorted[m1] + sorted[m2]);
    let (c9, c1) = (0.999 * cmad, 0.001 * cmad);
    r.iter()
        .map(|&ri| {
            if ri <= c1 {
                1.0
            } else if ri <= c9 {
                (1.0 - (ri / cmad).powi(2)).powi(2)
            } else {
                0.0
            }
        })
        .collect()
}

/// Runs STL with explicit parameters. Requires `period >= 2` and
/// `x.len() >= 2·period + 1`.
pub fn stl_with_params(x: &[f64], params: &StlParams) -> StlDecomposition {
    let n = x.len();
    let np = params.period;
    assert!(np >= 2 && n > 2 * np, "seasonal STL needs period >= 2 and 2m+1 points");
    let ns = next_odd(params.seasonal_window.max(3));
    let nt = next_odd(params.trend_window.max(3));
    let nl = next_odd(params.low_pass_window.max(3));

    let mut trend = vec![0.0; n];
    let mut seasonal = vec![0.0; n];
    let mut rw: Option<Vec<f64>> = None;
    for pass in 0..=params.outer_iterations {
        for _ in 0..params.inner_iterations {
            let detrended: Vec<f64> = x.iter().zip(&trend).map(|(a, b)| a - b).collect();
            let cycle = smooth_cycle_subseries(&detrended, np, ns, rw.as_deref());
            let low = moving_average(&moving_average(&moving_average(&cycle, np), np), 3);
            let low = loess_smooth(&low, nl, 1, None);
            for i in 0..n {
                seasonal[i] = cycle[np + i] - low[i];
            }
            let deseason: Vec<f64> = x.iter().zip(&seasonal).map(|(a, b)| a - b).collect();
            trend = loess_smooth(&deseason, nt, 1, rw.as_deref());
        }
        if pass < params.outer_iterations {
            let fit: Vec<f64> = trend.iter().zip(&seasonal).map(|(a, b)| a + b).collect();
            rw = Some(robustness_weights(x, &fit));
        }
    }

    let remainder = (0..n).map(|i| x[i] - trend[i] - seasonal[i]).collect();
    StlDecomposition {
        trend,
        seasonal,
        remainder,
        period: np,
        mode: StlMode::Seasonal,
    }
}

/// Loess window used when no seasonal component can be extracted.
pub fn trend_only_window(len: usize, period: usize) -> usize {
    let w = next_odd((1.5 * period as f64).ceil() as usize).max(7);
    if len >= 3 {
        w.min(if len % 2 == 0 { len - 1 } else { len })
    } else {
        w
    }
}

/// Decomposes `x` into trend, seasonal and remainder with default
/// parameters. Falls back to trend-only mode when `m = 1` or the series is
/// shorter than `2m + 1`.
pub fn stl_decompose(x: &[f64], period: usize) -> StlDecomposition {
    let n = x.len();
    if period >= 2 && n > 2 * period {
        return stl_with_params(x, &StlParams::for_series(n, period));
    }
    let trend = loess_smooth(x, trend_only_window(n, period), 1, None);
    let remainder = x.iter().zip(&trend).map(|(a, b)| a - b).collect();
    StlDecomposition {
        trend,
        seasonal: vec![0.0; n],
        remainder,
        period,
        mode: StlMode::TrendOnly,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_windows() {
        let p = StlParams::for_series(2400, 24);
        assert_eq!(p.seasonal_window, 24_001);
        assert_eq!(p.trend_window, 37);
        assert_eq!(p.low_pass_window, 25);
        assert_eq!(StlParams::for_series(100, 7).trend_window, 11);
    }

    #[test]
    fn loess_reproduces_lines() {
        let y: Vec<f64> = (0..40).map(|i| 2.0 * i as f64 - 3.0).collect();
        for window in [5, 11, 39, 81] {
            let s = loess_smooth(&y, window, 1, None);
            for (a, b) in s.iter().zip(&y) {
                assert!((a - b).abs() < 1e-9, "window {window}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn moving_average_lengths() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(moving_average(&x, 3), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn trend_only_fallback() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64).sqrt()).collect();
        let d = stl_decompose(&x, 24);
        assert_eq!(d.mode, StlMode::TrendOnly);
        assert!(d.seasonal.iter().all(|s| *s == 0.0));
        let d1 = stl_decompose(&x, 1);
        assert_eq!(d1.mode, StlMode::TrendOnly);
    }

    fn reference_series() -> Vec<f64> {
        let mut x: Vec<f64> = (0..150)
            .map(|t| {
                let tf = t as f64;
                3.0 * (2.0 * std::f64::consts::PI * tf / 12.0).sin() + 0.05 * tf + ((t * 7919) % 17) as f64 / 17.0 - 0.5
            })
            .collect();
        x[40] += 6.0;
        x
    }

    #[test]
    fn matches_reference_decomposition() {
        // frozen from statsmodels STL(period=12, seasonal=1501, trend=19, low_pass=13)
        let x = reference_series();
        let idx = [0, 40, 75, 149];
        let cases = [
            (
                0,
                [-0.12529593, 2.55349171, 3.74112612, 7.52973985],
                [-0.09678539, 3.26855003, 2.86839536, 1.65515293],
            ),
            (
                1,
                [-0.05518398, 1.97722762, 3.73823635, 7.50061685],
                [-0.04283227, 2.6557128, 2.90491976, 1.66525223],
            ),
        ];
        for (outer, trend, seasonal) in cases {
            let mut p = StlParams::for_series(150, 12);
            assert_eq!((p.seasonal_window, p.trend_window, p.low_pass_window), (1501, 19, 13));
            p.outer_iterations = outer;
            let d = stl_with_params(&x, &p);
            for (k, &i) in idx.iter().enumerate() {
                assert!((d.trend[i] - trend[k]).abs() < 1e-7, "outer {outer} trend[{i}] {} vs {}", d.trend[i], trend[k]);
                assert!((d.seasonal[i] - seasonal[k]).abs() < 1e-7, "outer {outer} seasonal[{i}] {}", d.seasonal[i]);
            }
        }
    }
}
