//! Median-based pattern codes and masked retrieval.

use tsbench::features::{encode_rows, retrieve_indices, PatternQuery};

fn main() -> tsbench::Result<()> {
    let rows: Vec<[f64; 6]> = (0..9)
        .map(|i| {
            let v = i as f64;
            [v / 10.0, v - 4.0, 1.0 - v / 10.0, (v * 0.7).sin(), (v * 1.3).cos(), v / 9.0]
        })
        .collect();
    let stationary: Vec<bool> = (0..9).map(|i| i % 3 == 0).collect();
    let (medians, codes) = encode_rows(&rows, &stationary)?;
    println!("medians: {}", serde_json::to_string(&medians)?);
    for (i, c) in codes.iter().enumerate() {
        println!("variate {i}: {c}");
    }
    let query = PatternQuery::from_mask_bits("F1,F7", "10")?;
    println!("query {query} -> {:?}", retrieve_indices(&codes, &query));
    Ok(())
}
