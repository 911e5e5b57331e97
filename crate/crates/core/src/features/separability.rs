//! How well the median split separates each continuous feature.

use serde::{Deserialize, Serialize};

use super::patterns::FEATURE_NAMES;
use crate::stats::{mean, median, normal_cdf, pearson, sample_variance};

/// Separation statistics for two groups. Variances are unbiased sample
/// variances; `None` fields are undefined (zero variance or tiny groups).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSeparation {
    pub n_high: usize,
    pub n_low: usize,
    pub mean_high: f64,
    pub mean_low: f64,
    pub fisher: Option<f64>,
    pub cohens_d: Option<f64>,
    pub mann_whitney_u: f64,
    pub mann_whitney_p: Option<f64>,
    pub undefined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSeparation {
    pub feature: String,
    pub median: f64,
    #[serde(flatten)]
    pub stats: GroupSeparation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub population: usize,
    pub features: Vec<FeatureSeparation>,
    pub correlation_names: Vec<String>,
    /// Pearson matrix; `None` where a column has zero variance.
    pub correlation: Vec<Vec<Option<f64>>>,
}

fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = avg;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Two-sided Mann–Whitney U test with the normal approximation, tie
/// correction and continuity correction. Returns `(U_a, p)`.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> (f64, Option<f64>) {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = average_ranks(&pooled);
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    if a.is_empty() || b.is_empty() {
        return (u1, None);
    }
    let u = u1.max(n1 * n2 - u1);
    let n = n1 + n2;
    let mu = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if !(var > 0.0) {
        return (u1, None);
    }
    let z = (u - mu - 0.5) / var.sqrt();
    (u1, Some((2.0 * normal_cdf(-z)).min(1.0)))
}

/// Fisher score, Cohen's d and Mann–Whitney for `high` versus `low`.
pub fn group_separation(high: &[f64], low: &[f64]) -> GroupSeparation {
    let (u, p) = mann_whitney(high, low);
    let (n1, n2) = (high.len(), low.len());
    let mut out = GroupSeparation {
        n_high: n1,
        n_low: n2,
        mean_high: if n1 > 0 { mean(high) } else { f64::NAN },
        mean_low: if n2 > 0 { mean(low) } else { f64::NAN },
        fisher: None,
        cohens_d: None,
        mann_whitney_u: u,
        mann_whitney_p: p,
        undefined: true,
    };
    if n1 < 2 || n2 < 2 {
        return out;
    }
    let (v1, v2) = (sample_variance(high), sample_variance(low));
    let pooled = ((n1 - 1) as f64 * v1 + (n2 - 1) as f64 * v2) / (n1 + n2 - 2) as f64;
    if !(pooled > 0.0) {
        return out;
    }
    let diff = out.mean_high - out.mean_low;
    out.fisher = Some(diff * diff / (v1 + v2));
    out.cohens_d = Some(diff / pooled.sqrt());
    out.undefined = false;
    out
}

/// Median-split separability of the six continuous features (F2 on `|β1|`)
/// plus their pairwise Pearson correlation matrix. `columns[k]` holds feature
/// `k` across the population.
pub fn separability_report(columns: &[Vec<f64>; 6]) -> SeparabilityReport {
    let population = columns[0].len();
    let features = columns
        .iter()
        .zip(FEATURE_NAMES)
        .map(|(col, name)| {
            let med = if col.is_empty() { f64::NAN } else { median(col) };
            let (high, low): (Vec<f64>, Vec<f64>) = col.iter().partition(|v| **v > med);
            FeatureSeparation {
                feature: name.to_string(),
                median: med,
                stats: group_separation(&high, &low),
            }
        })
        .collect();
    let correlation = (0..6)
        .map(|i| {
            (0..6)
                .map(|j| {
                    let r = pearson(&columns[i], &columns[j]);
                    if i == j {
                        r.map(|_| 1.0)
                    } else if i < j {
                        r
                    } else {
                        pearson(&columns[j], &columns[i])
                    }
                })
                .collect()
        })
        .collect();
    SeparabilityReport {
        population,
        features,
        correlation_names: FEATURE_NAMES[..6].iter().map(|s| s.to_string()).collect(),
        correlation,
    }
}
