//! STL decomposition, the seven structural features, pattern codes and
//! separability analysis.
//!
//! Feature vectors are computed per variate with [`compute_feature_vector`]
//! (parallel over a corpus in [`compute_feature_table`]); [`encode_patterns`]
//! then thresholds the whole population at once.

mod adf;
mod patterns;
mod separability;
mod spectral;
mod stl;
mod structure;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DatasetSpec;
use crate::error::{Error, Result};

pub use adf::{adf_test, mackinnon_p_value, schwert_lags, AdfResult, MIN_ADF_LENGTH, STATIONARITY_ALPHA};
pub use patterns::{
    encode_rows, retrieve_indices, FeatureMedians, PatternCode, PatternQuery, FEATURE_COUNT, FEATURE_NAMES,
};
pub use separability::{group_separation, mann_whitney, separability_report, FeatureSeparation, GroupSeparation, SeparabilityReport};
pub use spectral::{periodogram, spectral_entropy, MIN_SPECTRAL_LENGTH};
pub use stl::{loess_smooth, stl_decompose, stl_with_params, trend_only_window, StlDecomposition, StlMode, StlParams};
pub use structure::{
    orthonormal_polynomials, residual_acf1, seasonality_correlation, seasonality_strength, trend_linearity,
    trend_strength, Flagged,
};

/// Test splits at least this long are used on their own; shorter ones fall
/// back to the full variate.
pub const MIN_TEST_SPLIT: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowDescriptor {
    #[serde(rename = "test-split")]
    TestSplit,
    #[serde(rename = "full-variate")]
    FullVariate,
}

impl WindowDescriptor {
    pub fn for_test_length(test_length: usize) -> Self {
        if test_length >= MIN_TEST_SPLIT {
            Self::TestSplit
        } else {
            Self::FullVariate
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::TestSplit => "test-split",
            Self::FullVariate => "full-variate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub trend_strength: f64,
    /// Signed β1.
    pub trend_linearity: f64,
    pub seasonality_strength: f64,
    pub seasonality_correlation: f64,
    pub residual_acf1: f64,
    pub complexity: f64,
    pub stationarity: bool,
    pub adf_p_value: Option<f64>,
    /// Names of features that fell back to 0.
    pub degenerate: Vec<String>,
    pub window_descriptor: WindowDescriptor,
    pub window_length: usize,
    pub stl_mode: StlMode,
}

impl FeatureVector {
    /// The six continuous values used for encoding, F2 as `|β1|`.
    pub fn encoded(&self) -> [f64; 6] {
        [
            self.trend_strength,
            self.trend_linearity.abs(),
            self.seasonality_strength,
            self.seasonality_correlation,
            self.residual_acf1,
            self.complexity,
        ]
    }

    /// Range checks on every feature.
    pub fn in_range(&self) -> bool {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let signed = |v: f64| (-1.0..=1.0).contains(&v);
        unit(self.trend_strength)
            && unit(self.seasonality_strength)
            && unit(self.complexity)
            && signed(self.seasonality_correlation)
            && signed(self.residual_acf1)
            && self.trend_linearity.is_finite()
    }
}

/// Features of a fully imputed series `x` with seasonal period `period`.
pub fn features_of(x: &[f64], period: usize) -> Result<FeatureVector> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot compute features of an empty series".into()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "value at index {i} is not finite; variates must be imputed before feature extraction"
        )));
    }
    let dec = stl_decompose(x, period);
    let mut degenerate = Vec::new();
    let mut take = |name: &str, f: Flagged| {
        if f.degenerate {
            degenerate.push(name.to_string());
        }
        f.value
    };
    let f1 = take(FEATURE_NAMES[0], trend_strength(&dec));
    let f3 = take(FEATURE_NAMES[2], seasonality_strength(&dec));
    let f4 = take(FEATURE_NAMES[3], seasonality_correlation(&dec));
    let f5 = take(FEATURE_NAMES[4], residual_acf1(&dec));
    let f6 = take(FEATURE_NAMES[5], spectral_entropy(x));
    let adf = adf_test(x);
    if adf.is_none() {
        degenerate.push(FEATURE_NAMES[6].to_string());
    }
    Ok(FeatureVector {
        trend_strength: f1,
        trend_linearity: trend_linearity(&dec),
        seasonality_strength: f3,
        seasonality_correlation: f4,
        residual_acf1: f5,
        complexity: f6,
        stationarity: adf.is_some_and(|r| r.is_stationary()),
        adf_p_value: adf.map(|r| r.p_value),
        degenerate,
        window_descriptor: WindowDescriptor::FullVariate,
        window_length: x.len(),
        stl_mode: dec.mode,
    })
}

/// Features of one variate, using its test split when that split has at
/// least [`MIN_TEST_SPLIT`] points and the full variate otherwise.
pub fn compute_feature_vector(dataset: &DatasetSpec, series_id: &str, variate: &str) -> Result<FeatureVector> {
    let series = dataset
        .series(series_id)
        .ok_or_else(|| Error::UnknownId(format!("{}/{series_id}", dataset.dataset_id)))?;
    let v = series
        .variate(variate)
        .ok_or_else(|| Error::UnknownId(format!("{}/{series_id}/{variate}", dataset.dataset_id)))?;
    let descriptor = WindowDescriptor::for_test_length(dataset.test_length);
    let x = match descriptor {
        WindowDescriptor::TestSplit => &v.values[dataset.test_start(series)..],
        WindowDescriptor::FullVariate => &v.values[..],
    };
    let mut fv = features_of(x, dataset.freq.seasonal_period).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{}/{series_id}/{variate}: {msg}", dataset.dataset_id)),
        other => other,
    })?;
    fv.window_descriptor = descriptor;
    Ok(fv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub dataset_id: String,
    pub series_id: String,
    pub variate: String,
    #[serde(flatten)]
    pub features: FeatureVector,
    pub code: Option<PatternCode>,
}

impl FeatureRow {
    pub fn key(&self) -> (&str, &str, &str) {
        (&self.dataset_id, &self.series_id, &self.variate)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

const CSV_HEADER: &str = "dataset_id,series_id,variate,trend_strength,trend_linearity,trend_linearity_abs,\
seasonality_strength,seasonality_correlation,residual_acf1,complexity,stationarity,adf_p_value,\
degenerate,window_descriptor,window_length,stl_mode,code";

impl FeatureTable {
    pub fn find(&self, dataset: &str, series: &str, variate: &str) -> Option<&FeatureRow> {
        self.rows.iter().find(|r| r.key() == (dataset, series, variate))
    }

    pub fn codes(&self) -> Vec<Option<PatternCode>> {
        self.rows.iter().map(|r| r.code).collect()
    }

    /// Columns of the six encoded features across all rows.
    pub fn encoded_columns(&self) -> [Vec<f64>; 6] {
        std::array::from_fn(|k| self.rows.iter().map(|r| r.features.encoded()[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let f = &r.features;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.dataset_id,
                r.series_id,
                r.variate,
                f.trend_strength,
                f.trend_linearity,
                f.trend_linearity.abs(),
                f.seasonality_strength,
                f.seasonality_correlation,
                f.residual_acf1,
                f.complexity,
                u8::from(f.stationarity),
                f.adf_p_value.map(|p| p.to_string()).unwrap_or_default(),
                f.degenerate.join(";"),
                f.window_descriptor.as_str(),
                f.window_length,
                match f.stl_mode {
                    StlMode::Seasonal => "seasonal",
                    StlMode::TrendOnly => "trend_only",
                },
                r.code.map(|c| c.to_string()).unwrap_or_default(),
            );
        }
        out
    }
}

/// Feature vectors for every variate of every dataset, in corpus order.
pub fn compute_feature_table(datasets: &[DatasetSpec]) -> Result<FeatureTable> {
    let keys: Vec<(&DatasetSpec, &str, &str)> = datasets
        .iter()
        .flat_map(|d| {
            d.series
                .iter()
                .flat_map(move |s| s.variates.iter().map(move |v| (d, s.series_id.as_str(), v.name.as_str())))
        })
        .collect();
    let rows = keys
        .par_iter()
        .map(|(d, s, v)| {
            compute_feature_vector(d, s, v).map(|features| FeatureRow {
                dataset_id: d.dataset_id.clone(),
                series_id: s.to_string(),
                variate: v.to_string(),
                features,
                code: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable { rows })
}

/// Computes population medians and assigns a pattern code to every row.
pub fn encode_patterns(table: &mut FeatureTable) -> Result<FeatureMedians> {
    let rows: Vec<[f64; 6]> = table.rows.iter().map(|r| r.features.encoded()).collect();
    let stationary: Vec<bool> = table.rows.iter().map(|r| r.features.stationarity).collect();
    let (medians, codes) = encode_rows(&rows, &stationary)?;
    for (row, code) in table.rows.iter_mut().zip(codes) {
        row.code = Some(code);
    }
    Ok(medians)
}
