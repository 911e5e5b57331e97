//! Decomposition-based features F1–F5.

use super::stl::StlDecomposition;
use crate::stats::{pearson, variance};

/// A feature value with a flag for degenerate inputs (zero variance and
/// similar), in which case the value defaults to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub degenerate: bool,
}

impl Flagged {
    fn ok(value: f64) -> Self {
        Self { value, degenerate: false }
    }

    fn degenerate() -> Self {
        Self { value: 0.0, degenerate: true }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn strength(component: &[f64], remainder: &[f64]) -> Flagged {
    let total = variance(&add(component, remainder));
    if !(total > 0.0) {
        return Flagged::degenerate();
    }
    Flagged::ok((1.0 - variance(remainder) / total).clamp(0.0, 1.0))
}

/// F1 = max(0, 1 - Var(R) / Var(T + R)).
pub fn trend_strength(dec: &StlDecomposition) -> Flagged {
    strength(&dec.trend, &dec.remainder)
}

/// F3 = max(0, 1 - Var(R) / Var(S + R)).
pub fn seasonality_strength(dec: &StlDecomposition) -> Flagged {
    strength(&dec.seasonal, &dec.remainder)
}

/// Orthonormal linear and quadratic polynomials over `t = 1..=len`, built by
/// Gram–Schmidt on `[1, t, t²]`.
pub fn orthonormal_polynomials(len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = len as f64;
    let t: Vec<f64> = (1..=len).map(|i| i as f64).collect();
    let unit = |v: Vec<f64>| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let t_mean = (n + 1.0) / 2.0;
    let p1 = unit(t.iter().map(|x| x - t_mean).collect());
    let sq: Vec<f64> = t.iter().map(|x| x * x).collect();
    let sq_mean = sq.iter().sum::<f64>() / n;
    let mut p2: Vec<f64> = sq.iter().map(|x| x - sq_mean).collect();
    let proj = dot(&p2, &p1);
    for (v, p) in p2.iter_mut().zip(&p1) {
        *v -= proj * p;
    }
    (p1, unit(p2))
}

/// F2: coefficient of the linear term when the trend is regressed on
/// orthonormal polynomials of time. With an orthonormal design the least
/// squares coefficient is the projection `<T, P1>`.
pub fn trend_linearity(dec: &StlDecomposition) -> f64 {
    let len = dec.trend.len();
    if len < 3 {
        return 0.0;
    }
    let (p1, _) = orthonormal_polynomials(len);
    dec.trend.iter().zip(&p1).map(|(a, b)| a * b).sum()
}

/// F4: mean pairwise Pearson correlation between the `K = ⌊L/m⌋` full
/// seasonal cycles. Cycles with zero variance are skipped.
pub fn seasonality_correlation(dec: &StlDecomposition) -> Flagged {
    let m = dec.period;
    if m < 2 {
        return Flagged::degenerate();
    }
    let k = dec.seasonal.len() / m;
    if k < 2 {
        return Flagged::degenerate();
    }
    let cycles: Vec<&[f64]> = dec.seasonal[..k * m].chunks(m).collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..k {
        for j in i + 1..k {
            if let Some(r) = pearson(cycles[i], cycles[j]) {
                sum += r;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Flagged::degenerate();
    }
    Flagged::ok((sum / count as f64).clamp(-1.0, 1.0))
}

/// F5: lag-one autocorrelation of the remainder.
pub fn residual_acf1(dec: &StlDecomposition) -> Flagged {
    let r = &dec.remainder;
    if r.len() < 2 {
        return Flagged::degenerate();
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let denom: f64 = r.iter().map(|v| (v - mean).powi(2)).sum();
    if !(denom > 0.0) {
        return Flagged::degenerate();
    }
    let num: f64 = r.windows(2).map(|w| (w[1] - mean) * (w[0] - mean)).sum();
    Flagged::ok((num / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::stl::StlMode;
    use crate::stats::ols;

    fn dec(trend: Vec<f64>, seasonal: Vec<f64>, remainder: Vec<f64>, period: usize) -> StlDecomposition {
        StlDecomposition {
            trend,
            seasonal,
            remainder,
            period,
            mode: StlMode::Seasonal,
        }
    }

    fn zeros(n: usize) -> Vec<f64> {
        vec![0.0; n]
    }

    #[test]
    fn symmetric_parabola_has_no_linear_term() {
        let l = 101;
        let t: Vec<f64> = (1..=l).map(|i| (i as f64 - (l as f64 + 1.0) / 2.0).powi(2)).collect();
        let b1 = trend_linearity(&dec(t, zeros(l), zeros(l), 1));
        assert!(b1.abs() < 1e-9, "{b1}");
    }

    #[test]
    fn linearity_sign_and_oracle() {
        let l = 100;
        let down: Vec<f64> = (0..l).map(|i| -(i as f64)).collect();
        assert!(trend_linearity(&dec(down, zeros(l), zeros(l), 1)) < 0.0);

        let t: Vec<f64> = (1..=l).map(|i| 2.0 * i as f64).collect();
        let b1 = trend_linearity(&dec(t.clone(), zeros(l), zeros(l), 1));
        let centred_norm = (1..=l).map(|i| (i as f64 - 50.5).powi(2)).sum::<f64>().sqrt();
        assert!((b1 - 2.0 * centred_norm).abs() < 1e-9);

        // oracle: least squares on [1, P1, P2] directly
        let (p1, p2) = orthonormal_polynomials(l);
        let fit = ols(&[vec![1.0; l], p1, p2], &t).unwrap();
        assert!((fit.coefficients[1] - b1).abs() < 1e-9);
    }

    #[test]
    fn polynomials_are_orthonormal() {
        let (p1, p2) = orthonormal_polynomials(37);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        assert!((dot(&p1, &p1) - 1.0).abs() < 1e-12);
        assert!((dot(&p2, &p2) - 1.0).abs() < 1e-12);
        assert!(dot(&p1, &p2).abs() < 1e-12);
        assert!(p1.iter().sum::<f64>().abs() < 1e-12);
        assert!(p2.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn seasonal_cycle_correlations() {
        let cycle = [1.0, 3.0, 2.0, 5.0];
        let repeated: Vec<f64> = cycle.iter().cycle().take(40).copied().collect();
        let f4 = seasonality_correlation(&dec(zeros(40), repeated, zeros(40), 4));
        assert!((f4.value - 1.0).abs() < 1e-12);

        let mut anti = cycle.to_vec();
        anti.extend(cycle.iter().map(|v| -v));
        let f4 = seasonality_correlation(&dec(zeros(8), anti, zeros(8), 4));
        assert!((f4.value + 1.0).abs() < 1e-12);

        // pairwise correlations {1, 0, 0}: s1 = s2, s3 orthogonal to both
        let s1 = [1.0, -1.0, 1.0, -1.0];
        let s3 = [1.0, 1.0, -1.0, -1.0];
        let s: Vec<f64> = s1.iter().chain(&s1).chain(&s3).copied().collect();
        let f4 = seasonality_correlation(&dec(zeros(12), s, zeros(12), 4));
        assert!((f4.value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_cycles_degenerate() {
        let f4 = seasonality_correlation(&dec(zeros(48), zeros(48), zeros(48), 24));
        assert!(f4.degenerate);
        assert_eq!(f4.value, 0.0);
    }

    #[test]
    fn residual_autocorrelation() {
        let l = 1000;
        let alt: Vec<f64> = (0..l).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f5 = residual_acf1(&dec(zeros(l), zeros(l), alt, 1));
        // closed form with zero mean: -(L-1)/L
        assert!((f5.value + (l as f64 - 1.0) / l as f64).abs() < 1e-12);

        let flat = residual_acf1(&dec(zeros(10), zeros(10), vec![2.0; 10], 1));
        assert!(flat.degenerate);
    }

    #[test]
    fn strength_extremes() {
        let l = 200;
        let ramp: Vec<f64> = (0..l).map(f64::from).collect();
        let tiny: Vec<f64> = (0..l).map(|i| 1e-6 * ((i * 7919) % 13) as f64).collect();
        assert!(trend_strength(&dec(ramp, zeros(l as usize), tiny.clone(), 1)).value > 0.999);
        let flat_trend = trend_strength(&dec(vec![5.0; l as usize], zeros(l as usize), tiny, 1));
        assert!(flat_trend.value < 1e-9);
        assert_eq!(seasonality_strength(&dec(zeros(4), zeros(4), zeros(4), 1)), Flagged { value: 0.0, degenerate: true });
    }
}
