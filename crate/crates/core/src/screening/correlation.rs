use serde::{Deserialize, Serialize};

use crate::stats::pearson;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedPair {
    pub a: String,
    pub b: String,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub a: String,
    pub b: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationScan {
    pub flagged: Vec<CorrelatedPair>,
    pub skipped: Vec<SkippedPair>,
}

/// Pearson correlation of every column pair over jointly observed points
/// (non-finite entries count as missing). Pairs with `|r| > tau_corr` are
/// flagged for review; nothing is dropped here.
pub fn correlation_check(columns: &[(&str, &[f64])], tau_corr: f64) -> CorrelationScan {
    let mut scan = CorrelationScan::default();
    for (j, (name_a, a)) in columns.iter().enumerate() {
        for (name_b, b) in &columns[j + 1..] {
            let (xa, xb): (Vec<f64>, Vec<f64>) = a
                .iter()
                .zip(b.iter())
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| (*x, *y))
                .unzip();
            let skip = |reason: &str| SkippedPair {
                a: name_a.to_string(),
                b: name_b.to_string(),
                reason: reason.to_string(),
            };
            if xa.len() < 3 {
                scan.skipped.push(skip("fewer than 3 jointly observed points"));
                continue;
            }
            match pearson(&xa, &xb) {
                Some(r) if r.abs() > tau_corr => scan.flagged.push(CorrelatedPair {
                    a: name_a.to_string(),
                    b: name_b.to_string(),
                    r,
                }),
                Some(_) => {}
                None => scan.skipped.push(skip("zero-variance column")),
            }
        }
    }
    scan
}
