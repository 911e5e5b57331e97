use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::FrequencyCode;
use crate::error::{Error, Result};

/// Length of the centred IQR window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IqrWindow {
    /// `min(L, max(51, 2m + 1))`
    #[default]
    Auto,
    Fixed(usize),
}

impl IqrWindow {
    pub fn resolve(self, len: usize, period: usize) -> usize {
        match self {
            IqrWindow::Auto => len.min(51.max(2 * period + 1)),
            IqrWindow::Fixed(w) => w.min(len),
        }
    }
}

impl Serialize for IqrWindow {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            IqrWindow::Auto => s.serialize_str("auto"),
            IqrWindow::Fixed(w) => s.serialize_u64(*w as u64),
        }
    }
}

impl<'de> Deserialize<'de> for IqrWindow {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Width(usize),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Width(w) => Ok(IqrWindow::Fixed(w)),
            Repr::Tag(t) if t == "auto" => Ok(IqrWindow::Auto),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!(
                "iqr_window must be an odd integer or \"auto\", got {t:?}"
            ))),
        }
    }
}

/// Thresholds for the automated quality checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreeningConfig {
    /// Maximum tolerated missing rate.
    pub tau_miss: f64,
    /// Minimum series length per frequency.
    pub tau_len: BTreeMap<FrequencyCode, usize>,
    /// Absolute Pearson correlation above which a pair is flagged.
    pub tau_corr: f64,
    /// Maximum tolerated fraction of extreme outliers.
    pub tau_ext: f64,
    pub k_trans: f64,
    pub k_ext: f64,
    pub lb_lags: Vec<usize>,
    pub iqr_window: IqrWindow,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        let tau_len = FrequencyCode::ALL
            .into_iter()
            .map(|code| {
                let min = match code {
                    c if c.is_sub_hourly() => 2000,
                    FrequencyCode::Hourly => 1000,
                    FrequencyCode::Daily | FrequencyCode::BusinessDaily => 300,
                    FrequencyCode::Weekly => 100,
                    FrequencyCode::Monthly => 60,
                    _ => 40,
                };
                (code, min)
            })
            .collect();
        Self {
            tau_miss: 0.3,
            tau_len,
            tau_corr: 0.95,
            tau_ext: 0.05,
            k_trans: 5.0,
            k_ext: 9.0,
            lb_lags: vec![10, 20],
            iqr_window: IqrWindow::Auto,
        }
    }
}

impl ScreeningConfig {
    pub fn min_length(&self, code: FrequencyCode) -> usize {
        self.tau_len.get(&code).copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("screening config: {m}")));
        if !(0.0..=1.0).contains(&self.tau_miss) {
            return bad(format!("tau_miss {} outside [0, 1]", self.tau_miss));
        }
        if !(self.tau_corr > 0.0 && self.tau_corr <= 1.0) {
            return bad(format!("tau_corr {} outside (0, 1]", self.tau_corr));
        }
        if !(0.0..=1.0).contains(&self.tau_ext) {
            return bad(format!("tau_ext {} outside [0, 1]", self.tau_ext));
        }
        if !(self.k_trans > 0.0 && self.k_trans < self.k_ext) {
            return bad(format!("need 0 < k_trans < k_ext, got {} and {}", self.k_trans, self.k_ext));
        }
        if self.lb_lags.is_empty() || self.lb_lags.contains(&0) || self.lb_lags.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("lb_lags {:?} must be non-empty, positive and ascending", self.lb_lags));
        }
        if let IqrWindow::Fixed(w) = self.iqr_window {
            if w < 5 || w % 2 == 0 {
                return bad(format!("iqr_window {w} must be an odd integer >= 5"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_round_trip() {
        let cfg = ScreeningConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.min_length(FrequencyCode::Min15), 2000);
        assert_eq!(cfg.min_length(FrequencyCode::Quarterly), 40);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"iqr_window\":\"auto\""));
        assert_eq!(serde_json::from_str::<ScreeningConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: ScreeningConfig = serde_json::from_str(r#"{"k_ext": 12, "iqr_window": 31}"#).unwrap();
        assert_eq!(cfg.k_ext, 12.0);
        assert_eq!(cfg.iqr_window, IqrWindow::Fixed(31));
        assert_eq!(cfg.tau_corr, 0.95);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = ScreeningConfig { k_trans: 10.0, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg = ScreeningConfig { lb_lags: vec![20, 10], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg = ScreeningConfig { iqr_window: IqrWindow::Fixed(20), ..Default::default() };
        assert!(cfg.validate().is_err());
        assert!(serde_json::from_str::<ScreeningConfig>(r#"{"iqr_window": "wide"}"#).is_err());
    }

    #[test]
    fn auto_window_spans_a_cycle() {
        assert_eq!(IqrWindow::Auto.resolve(10_000, 24), 51);
        assert_eq!(IqrWindow::Auto.resolve(10_000, 96), 193);
        assert_eq!(IqrWindow::Auto.resolve(30, 24), 30);
    }
}
