//! Seasonal Naive, MASE and quantile-loss CRPS on a single window.

use tsbench::metrics::{crps, mase, samples_to_quantiles, seasonal_naive, QuantileForecast};

fn main() -> tsbench::Result<()> {
    let context: Vec<f64> = (0..48).map(|t| 10.0 + (t % 12) as f64).collect();
    let truth: Vec<f64> = (48..60).map(|t| 10.5 + (t % 12) as f64).collect();

    let snaive = seasonal_naive(&context, 12, truth.len())?;
    let m = mase(&truth, &snaive.forecast.median(), 12, &context);
    println!("S-Naive: MASE {:?} via {:?}, CRPS {:?}", m.value, m.path, crps(&truth, &snaive.forecast));

    let samples: Vec<Vec<f64>> = truth
        .iter()
        .map(|y| (0..200).map(|k| y + (k as f64 - 99.5) / 50.0).collect())
        .collect();
    let qf: QuantileForecast = samples_to_quantiles(&samples)?;
    let m = mase(&truth, &qf.median(), 12, &context);
    println!("sampled model: MASE {:?}, CRPS {:?}", m.value, crps(&truth, &qf));
    Ok(())
}
