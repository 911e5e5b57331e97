//! Automated quality assurance and curator-driven finalization.
//!
//! [`run_screening`] executes the per-variate checks, the within-series
//! correlation check and, for equal-length univariate datasets, the
//! cross-series correlation check, collecting everything into a
//! [`QualityReport`]. Flagged correlations are advisory: removal only happens
//! through an explicit [`DecisionSet`] passed to [`apply_decisions`].

mod checks;
mod config;
mod correlation;
mod decisions;
mod outliers;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{DatasetSpec, SnapCollision};

pub use checks::{
    autocorrelations, dominance_and_entropy, fill_missing, ljung_box, univariate_quality_check, CheckName, CheckRecord,
    LengthCheck, MissingCheck, OutlierCheck, SignalCheck, VariateQuality, WhiteNoiseCheck, ENTROPY_LIMIT,
    TOPK_DOMINANCE_LIMIT, WHITE_NOISE_ALPHA,
};
pub use config::{IqrWindow, ScreeningConfig};
pub use correlation::{correlation_check, CorrelatedPair, CorrelationScan, SkippedPair};
pub use decisions::{apply_decisions, Decision, DecisionAction, DecisionSet, DecisionTarget, Finalized, Provenance};
pub use outliers::{iqr_outlier_scan, scaled_deviations, Imputation, OutlierScan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesQuality {
    pub series_id: String,
    pub length: usize,
    pub collisions: Vec<SnapCollision>,
    pub variates: Vec<VariateQuality>,
    /// Within-series variate pairs; empty for univariate series.
    pub correlation: CorrelationScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub dataset_id: String,
    pub series: Vec<SeriesQuality>,
    /// Cross-series pairs; `None` unless every series is
    /// univariate and all lengths agree.
    pub cross_series: Option<CorrelationScan>,
}

impl QualityReport {
    pub fn variate(&self, series_id: &str, variate: &str) -> Option<&VariateQuality> {
        self.series
            .iter()
            .find(|s| s.series_id == series_id)?
            .variates
            .iter()
            .find(|v| v.variate == variate)
    }

    /// `(series_id, variate)` of every variate that failed a check.
    pub fn unpredictable(&self) -> Vec<(&str, &str)> {
        self.series
            .iter()
            .flat_map(|s| {
                s.variates
                    .iter()
                    .filter(|v| !v.predictable)
                    .map(move |v| (s.series_id.as_str(), v.variate.as_str()))
            })
            .collect()
    }
}

/// Screens every variate of a loaded dataset. Timestamp rectification has
/// already happened at load time; its collisions are carried into the report.
pub fn run_screening(dataset: &DatasetSpec, cfg: &ScreeningConfig) -> QualityReport {
    let min_length = cfg.min_length(dataset.freq.code);
    let period = dataset.freq.seasonal_period;

    let series = dataset
        .series
        .par_iter()
        .map(|s| {
            let variates = s
                .variates
                .par_iter()
                .map(|v| univariate_quality_check(v, cfg, min_length, period))
                .collect();
            let correlation = if s.width() > 1 {
                let columns: Vec<(&str, &[f64])> = s.variates.iter().map(|v| (v.name.as_str(), &v.values[..])).collect();
                correlation_check(&columns, cfg.tau_corr)
            } else {
                CorrelationScan::default()
            };
            SeriesQuality {
                series_id: s.series_id.clone(),
                length: s.len(),
                collisions: s.collisions.clone(),
                variates,
                correlation,
            }
        })
        .collect();

    let univariate_equal = dataset.series.len() > 1
        && dataset.series.iter().all(|s| s.width() == 1)
        && dataset.series.windows(2).all(|w| w[0].len() == w[1].len());
    let cross_series = univariate_equal.then(|| {
        let columns: Vec<(&str, &[f64])> = dataset
            .series
            .iter()
            .map(|s| (s.series_id.as_str(), &s.variates[0].values[..]))
            .collect();
        correlation_check(&columns, cfg.tau_corr)
    });

    QualityReport {
        dataset_id: dataset.dataset_id.clone(),
        series,
        cross_series,
    }
}
