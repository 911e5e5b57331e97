//! Quality screening of a few hand-made variates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tsbench::corpus::Variate;
use tsbench::screening::{iqr_outlier_scan, univariate_quality_check, ScreeningConfig};

fn main() {
    let cfg = ScreeningConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noise: Vec<f64> = (0..1200).map(|_| StandardNormal.sample(&mut rng)).collect();
    let seasonal: Vec<f64> = (0..1200)
        .map(|t| (std::f64::consts::TAU * t as f64 / 24.0).sin() * 5.0 + 0.1 * noise[t])
        .collect();
    let mut spiky = seasonal.clone();
    spiky[600] += 400.0;

    for (name, values) in [
        ("constant", vec![3.0; 1200]),
        ("white_noise", noise),
        ("seasonal", seasonal),
        ("seasonal_with_spike", spiky.clone()),
    ] {
        let q = univariate_quality_check(&Variate::from_values(name, values), &cfg, 1000, 24);
        println!(
            "{name:<20} predictable={:<5} failed={:?} imputed={}",
            q.predictable,
            q.failed,
            q.imputation_log.len()
        );
    }

    let scan = iqr_outlier_scan(&spiky, &cfg, 24);
    for m in &scan.imputations {
        println!("index {} imputed {:.2} -> {:.2}", m.index, m.old, m.new);
    }
}
