use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::structure::Flagged;
use crate::stats::mean;

pub const MIN_SPECTRAL_LENGTH: usize = 16;

/// One-sided periodogram of the mean-removed series at Fourier frequencies
/// `k = 1..=⌊L/2⌋` (the zero frequency is excluded).
pub fn periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = mean(x);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[1..=n / 2].iter().map(|c| c.norm_sqr() / n as f64).collect()
}

/// F6: Shannon entropy of the normalized periodogram divided by
/// `log(#bins)`, so values lie in `[0, 1]`.
pub fn spectral_entropy(x: &[f64]) -> Flagged {
    if x.len() < MIN_SPECTRAL_LENGTH {
        return Flagged { value: 0.0, degenerate: true };
    }
    let p = periodogram(x);
    let total: f64 = p.iter().sum();
    if !(total > 0.0) || p.len() < 2 {
        return Flagged { value: 0.0, degenerate: true };
    }
    let h: f64 = p
        .iter()
        .map(|v| v / total)
        .filter(|f| *f > 0.0)
        .map(|f| -f * f.ln())
        .sum();
    Flagged {
        value: (h / (p.len() as f64).ln()).clamp(0.0, 1.0),
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    /// Direct DFT, O(n²).
    fn dft_periodogram(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        (1..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                    re += (v - m) * a.cos();
                    im += (v - m) * a.sin();
                }
                (re * re + im * im) / n as f64
            })
            .collect()
    }

    #[test]
    fn fft_matches_direct_dft() {
        let x: Vec<f64> = (0..77).map(|t| ((t * t) % 17) as f64 - 0.3 * t as f64).collect();
        for (a, b) in periodogram(&x).iter().zip(dft_periodogram(&x)) {
            assert!((a - b).abs() < 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn sine_is_low_entropy() {
        let x: Vec<f64> = (0..2400)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 24.0).sin())
            .collect();
        assert!(spectral_entropy(&x).value <= 0.2);
    }

    #[test]
    fn white_noise_is_high_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..4096).map(|_| rng.sample(StandardNormal)).collect();
        let f6 = spectral_entropy(&x);
        assert!(f6.value >= 0.9, "{}", f6.value);
        let scaled: Vec<f64> = x.iter().map(|v| 5.0 * v).collect();
        assert!((spectral_entropy(&scaled).value - f6.value).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(spectral_entropy(&[1.0; 64]).degenerate);
        assert!(spectral_entropy(&[1.0, 2.0, 3.0]).degenerate);
    }
}
