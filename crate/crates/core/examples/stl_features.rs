//! STL decomposition and the seven structural features of a synthetic variate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tsbench::features::{features_of, stl_decompose};

fn main() -> tsbench::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x: Vec<f64> = (0..480)
        .map(|t| {
            let tf = t as f64;
            let e: f64 = StandardNormal.sample(&mut rng);
            0.05 * tf + 3.0 * (std::f64::consts::TAU * tf / 24.0).sin() + 0.3 * e
        })
        .collect();
    let dec = stl_decompose(&x, 24);
    let max_err = (0..x.len())
        .map(|t| (x[t] - dec.trend[t] - dec.seasonal[t] - dec.remainder[t]).abs())
        .fold(0.0, f64::max);
    println!("STL mode {:?}, reconstruction error {max_err:e}", dec.mode);

    let f = features_of(&x, 24)?;
    println!("{}", serde_json::to_string_pretty(&f)?);
    Ok(())
}
