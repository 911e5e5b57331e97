use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supported sampling frequencies, tagged with pandas-style codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrequencyCode {
    #[serde(rename = "5T")]
    Min5,
    #[serde(rename = "10T")]
    Min10,
    #[serde(rename = "15T")]
    Min15,
    #[serde(rename = "20T")]
    Min20,
    #[serde(rename = "30T")]
    Min30,
    #[serde(rename = "H")]
    Hourly,
    #[serde(rename = "D")]
    Daily,
    #[serde(rename = "B")]
    BusinessDaily,
    #[serde(rename = "W")]
    Weekly,
    #[serde(rename = "M")]
    Monthly,
    #[serde(rename = "Q")]
    Quarterly,
}

impl FrequencyCode {
    pub const ALL: [FrequencyCode; 11] = [
        FrequencyCode::Min5,
        FrequencyCode::Min10,
        FrequencyCode::Min15,
        FrequencyCode::Min20,
        FrequencyCode::Min30,
        FrequencyCode::Hourly,
        FrequencyCode::Daily,
        FrequencyCode::BusinessDaily,
        FrequencyCode::Weekly,
        FrequencyCode::Monthly,
        FrequencyCode::Quarterly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FrequencyCode::Min5 => "5T",
            FrequencyCode::Min10 => "10T",
            FrequencyCode::Min15 => "15T",
            FrequencyCode::Min20 => "20T",
            FrequencyCode::Min30 => "30T",
            FrequencyCode::Hourly => "H",
            FrequencyCode::Daily => "D",
            FrequencyCode::BusinessDaily => "B",
            FrequencyCode::Weekly => "W",
            FrequencyCode::Monthly => "M",
            FrequencyCode::Quarterly => "Q",
        }
    }

    /// Seasonal period `m`, also used as the MASE periodicity `s`.
    pub fn seasonal_period(self) -> usize {
        match self {
            FrequencyCode::Min5 => 288,
            FrequencyCode::Min10 => 144,
            FrequencyCode::Min15 => 96,
            FrequencyCode::Min20 => 72,
            FrequencyCode::Min30 => 48,
            FrequencyCode::Hourly => 24,
            FrequencyCode::Daily => 7,
            FrequencyCode::BusinessDaily => 5,
            FrequencyCode::Weekly => 52,
            FrequencyCode::Monthly => 12,
            FrequencyCode::Quarterly => 4,
        }
    }

    pub fn step(self) -> Step {
        const MIN: i64 = 60;
        match self {
            FrequencyCode::Min5 => Step::Fixed(Duration::seconds(5 * MIN)),
            FrequencyCode::Min10 => Step::Fixed(Duration::seconds(10 * MIN)),
            FrequencyCode::Min15 => Step::Fixed(Duration::seconds(15 * MIN)),
            FrequencyCode::Min20 => Step::Fixed(Duration::seconds(20 * MIN)),
            FrequencyCode::Min30 => Step::Fixed(Duration::seconds(30 * MIN)),
            FrequencyCode::Hourly => Step::Fixed(Duration::hours(1)),
            FrequencyCode::Daily => Step::Fixed(Duration::days(1)),
            FrequencyCode::BusinessDaily => Step::BusinessDay,
            FrequencyCode::Weekly => Step::Fixed(Duration::weeks(1)),
            FrequencyCode::Monthly => Step::Months(1),
            FrequencyCode::Quarterly => Step::Months(3),
        }
    }

    pub fn is_sub_hourly(self) -> bool {
        matches!(
            self,
            FrequencyCode::Min5
                | FrequencyCode::Min10
                | FrequencyCode::Min15
                | FrequencyCode::Min20
                | FrequencyCode::Min30
        )
    }
}

impl fmt::Display for FrequencyCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrequencyCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FrequencyCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnsupportedFrequency(s.to_string()))
    }
}

/// Spacing between consecutive grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Fixed(Duration),
    BusinessDay,
    Months(u32),
}

impl Step {
    /// Approximate length in seconds, used only for ordering steps.
    pub fn approx_seconds(self) -> f64 {
        match self {
            Step::Fixed(d) => d.num_seconds() as f64,
            Step::BusinessDay => 86_400.0 * 7.0 / 5.0,
            Step::Months(k) => f64::from(k) * 30.436_875 * 86_400.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "FrequencyCode", into = "FrequencyCode")]
pub struct FrequencySpec {
    pub code: FrequencyCode,
    pub step: Step,
    pub seasonal_period: usize,
}

impl FrequencySpec {
    pub fn new(code: FrequencyCode) -> Self {
        Self {
            code,
            step: code.step(),
            seasonal_period: code.seasonal_period(),
        }
    }

    pub fn parse(code: &str) -> Result<Self> {
        code.parse().map(Self::new)
    }
}

impl From<FrequencyCode> for FrequencySpec {
    fn from(code: FrequencyCode) -> Self {
        Self::new(code)
    }
}

impl From<FrequencySpec> for FrequencyCode {
    fn from(spec: FrequencySpec) -> Self {
        spec.code
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum DeltaClass {
    Seconds(i64),
    Months(i32),
}

impl DeltaClass {
    fn approx_seconds(self) -> f64 {
        match self {
            DeltaClass::Seconds(s) => s as f64,
            DeltaClass::Months(k) => Step::Months(k as u32).approx_seconds(),
        }
    }
}

pub(crate) fn month_number(date: NaiveDate) -> i32 {
    date.year() * 12 + date.month0() as i32
}

pub(crate) fn is_month_end(date: NaiveDate) -> bool {
    date.succ_opt().is_none_or(|next| next.month() != date.month())
}

fn classify(a: NaiveDateTime, b: NaiveDateTime) -> DeltaClass {
    let months = month_number(b.date()) - month_number(a.date());
    let same_time = a.time() == b.time();
    let aligned = a.day() == b.day() || (is_month_end(a.date()) && is_month_end(b.date()));
    if months >= 1 && same_time && aligned {
        DeltaClass::Months(months)
    } else {
        DeltaClass::Seconds((b - a).num_seconds())
    }
}

fn is_weekday(ts: &NaiveDateTime) -> bool {
    !matches!(ts.weekday(), Weekday::Sat | Weekday::Sun)
}

/// Infers the sampling frequency from the modal spacing between timestamps.
///
/// Ties between equally frequent spacings resolve toward the smaller step.
pub fn infer_frequency(timestamps: &[NaiveDateTime]) -> Result<FrequencySpec> {
    if timestamps.len() < 3 {
        return Err(Error::UnsupportedFrequency(format!(
            "at least 3 timestamps are required, got {}",
            timestamps.len()
        )));
    }
    if timestamps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "timestamps must be strictly increasing".into(),
        ));
    }

    let mut counts: HashMap<DeltaClass, usize> = HashMap::new();
    for w in timestamps.windows(2) {
        *counts.entry(classify(w[0], w[1])).or_default() += 1;
    }
    let (modal, _) = counts
        .iter()
        .max_by(|(da, ca), (db, cb)| {
            ca.cmp(cb)
                .then_with(|| db.approx_seconds().total_cmp(&da.approx_seconds()))
        })
        .expect("at least two deltas");

    let code = match *modal {
        DeltaClass::Seconds(300) => FrequencyCode::Min5,
        DeltaClass::Seconds(600) => FrequencyCode::Min10,
        DeltaClass::Seconds(900) => FrequencyCode::Min15,
        DeltaClass::Seconds(1200) => FrequencyCode::Min20,
        DeltaClass::Seconds(1800) => FrequencyCode::Min30,
        DeltaClass::Seconds(3600) => FrequencyCode::Hourly,
        DeltaClass::Seconds(86_400) => {
            let weekend_gap = counts.contains_key(&DeltaClass::Seconds(3 * 86_400));
            if weekend_gap && timestamps.iter().all(is_weekday) {
                FrequencyCode::BusinessDaily
            } else {
                FrequencyCode::Daily
            }
        }
        DeltaClass::Seconds(604_800) => FrequencyCode::Weekly,
        DeltaClass::Months(1) => FrequencyCode::Monthly,
        DeltaClass::Months(3) => FrequencyCode::Quarterly,
        DeltaClass::Seconds(s) => {
            return Err(Error::UnsupportedFrequency(format!(
                "modal spacing of {s} seconds"
            )))
        }
        DeltaClass::Months(k) => {
            return Err(Error::UnsupportedFrequency(format!(
                "modal spacing of {k} months"
            )))
        }
    };
    Ok(FrequencySpec::new(code))
}
