//! Seven-bit pattern codes and masked pattern queries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stats::median;

pub const FEATURE_COUNT: usize = 7;
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "trend_strength",
    "trend_linearity",
    "seasonality_strength",
    "seasonality_correlation",
    "residual_acf1",
    "complexity",
    "stationarity",
];

/// Bits ordered F1..F7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PatternCode(pub [bool; FEATURE_COUNT]);

impl PatternCode {
    pub fn bit(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }
}

impl fmt::Display for PatternCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for PatternCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != FEATURE_COUNT {
            return Err(Error::InvalidInput(format!("pattern code `{s}` must have 7 bits")));
        }
        let mut bits = [false; FEATURE_COUNT];
        for (b, c) in bits.iter_mut().zip(chars) {
            *b = match c {
                '0' => false,
                '1' => true,
                _ => return Err(Error::InvalidInput(format!("pattern code `{s}` contains `{c}`"))),
            };
        }
        Ok(Self(bits))
    }
}

impl Serialize for PatternCode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PatternCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Population medians of the six continuous features (F2 on `|β1|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMedians {
    pub trend_strength: f64,
    pub trend_linearity: f64,
    pub seasonality_strength: f64,
    pub seasonality_correlation: f64,
    pub residual_acf1: f64,
    pub complexity: f64,
    pub population: usize,
}

impl FeatureMedians {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.trend_strength,
            self.trend_linearity,
            self.seasonality_strength,
            self.seasonality_correlation,
            self.residual_acf1,
            self.complexity,
        ]
    }
}

/// Thresholds each of the six continuous columns at its population median
/// (strictly greater means 1) and copies the stationarity flag into bit 7.
///
/// `rows[i]` holds the six encoded values of variate `i`.
pub fn encode_rows(rows: &[[f64; 6]], stationary: &[bool]) -> Result<(FeatureMedians, Vec<PatternCode>)> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("pattern encoding needs at least one feature vector".into()));
    }
    if rows.len() != stationary.len() {
        return Err(Error::InvalidInput("stationarity flags do not match the feature rows".into()));
    }
    let mut med = [0.0; 6];
    for (k, m) in med.iter_mut().enumerate() {
        let column: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        *m = median(&column);
    }
    let codes = rows
        .iter()
        .zip(stationary)
        .map(|(r, &st)| {
            let mut bits = [false; FEATURE_COUNT];
            for k in 0..6 {
                bits[k] = r[k] > med[k];
            }
            bits[6] = st;
            PatternCode(bits)
        })
        .collect();
    let medians = FeatureMedians {
        trend_strength: med[0],
        trend_linearity: med[1],
        seasonality_strength: med[2],
        seasonality_correlation: med[3],
        residual_acf1: med[4],
        complexity: med[5],
        population: rows.len(),
    };
    Ok((medians, codes))
}

/// Masked match over pattern codes: positions with `mask[k]` must equal
/// `values[k]`, the others are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PatternQuery {
    pub mask: [bool; FEATURE_COUNT],
    pub values: [bool; FEATURE_COUNT],
}

impl PatternQuery {
    /// Matches only this exact code.
    pub fn exact(code: PatternCode) -> Self {
        Self {
            mask: [true; FEATURE_COUNT],
            values: code.0,
        }
    }

    /// Constrains a single feature (0-based index) to `value`.
    pub fn single(feature: usize, value: bool) -> Self {
        let mut q = Self::default();
        q.mask[feature] = true;
        q.values[feature] = value;
        q
    }

    /// Builds a query from separate mask and bit arguments. The mask is either
    /// a 7-character bit string (`0010001`) or a list of feature names
    /// (`F3,F7`); the bits are either 7 positional characters or one bit per
    /// listed feature (`10`).
    pub fn from_mask_bits(mask: &str, bits: &str) -> Result<Self> {
        let is_bitstring = |s: &str| s.len() == FEATURE_COUNT && s.chars().all(|c| c == '0' || c == '1');
        let features: Vec<usize> = if is_bitstring(mask) {
            mask.chars().enumerate().filter(|(_, c)| *c == '1').map(|(k, _)| k).collect()
        } else {
            mask.split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.trim_start_matches(['F', 'f'])
                        .parse::<usize>()
                        .ok()
                        .filter(|n| (1..=FEATURE_COUNT).contains(n))
                        .map(|n| n - 1)
                        .ok_or_else(|| Error::InvalidInput(format!("unknown feature `{t}` in mask")))
                })
                .collect::<Result<_>>()?
        };
        let mut q = Self::default();
        if is_bitstring(bits) && (is_bitstring(mask) || features.len() != FEATURE_COUNT) {
            for &k in &features {
                q.mask[k] = true;
                q.values[k] = bits.as_bytes()[k] == b'1';
            }
            return Ok(q);
        }
        let listed: Vec<char> = bits.chars().filter(|c| !matches!(c, ',' | ' ')).collect();
        if listed.len() != features.len() {
            return Err(Error::InvalidInput(format!(
                "bits `{bits}` do not match the {} masked features",
                features.len()
            )));
        }
        for (&k, c) in features.iter().zip(listed) {
            q.mask[k] = true;
            q.values[k] = match c {
                '1' => true,
                '0' => false,
                _ => return Err(Error::InvalidInput(format!("bit `{c}` is not 0 or 1"))),
            };
        }
        Ok(q)
    }

    pub fn matches(&self, code: &PatternCode) -> bool {
        (0..FEATURE_COUNT).all(|k| !self.mask[k] || code.0[k] == self.values[k])
    }

    pub fn is_unconstrained(&self) -> bool {
        !self.mask.iter().any(|m| *m)
    }
}

/// Rendered as a 7-character string where `-` marks an unconstrained bit,
/// e.g. `--1----` for "seasonality strength high".
impl fmt::Display for PatternQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..FEATURE_COUNT {
            f.write_str(match (self.mask[k], self.values[k]) {
                (false, _) => "-",
                (true, true) => "1",
                (true, false) => "0",
            })?;
        }
        Ok(())
    }
}

impl FromStr for PatternQuery {
    type Err = Error;

    /// Accepts the `--1----` form or `F3=1,F7=0`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut q = Self::default();
        if s.contains('=') {
            for part in s.split(',') {
                let (name, bit) = part
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidInput(format!("bad query term `{part}`")))?;
                let name = name.trim();
                let k = name
                    .strip_prefix('F')
                    .or_else(|| name.strip_prefix('f'))
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|n| (1..=FEATURE_COUNT).contains(n))
                    .ok_or_else(|| Error::InvalidInput(format!("unknown feature `{name}`")))?;
                q.mask[k - 1] = true;
                q.values[k - 1] = match bit.trim() {
                    "1" => true,
                    "0" => false,
                    other => return Err(Error::InvalidInput(format!("bit `{other}` is not 0 or 1"))),
                };
            }
            return Ok(q);
        }
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != FEATURE_COUNT {
            return Err(Error::InvalidInput(format!("pattern query `{s}` must have 7 positions")));
        }
        for (k, c) in chars.into_iter().enumerate() {
            match c {
                '-' | '*' | 'x' => {}
                '0' => q.mask[k] = true,
                '1' => {
                    q.mask[k] = true;
                    q.values[k] = true;
                }
                _ => return Err(Error::InvalidInput(format!("pattern query `{s}` contains `{c}`"))),
            }
        }
        Ok(q)
    }
}

impl Serialize for PatternQuery {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PatternQuery {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Indices of codes matching `query`, in input order.
pub fn retrieve_indices(codes: &[PatternCode], query: &PatternQuery) -> Vec<usize> {
    codes
        .iter()
        .enumerate()
        .filter(|(_, c)| query.matches(c))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn code_round_trip() {
        let c: PatternCode = "1010010".parse().unwrap();
        assert_eq!(c.to_string(), "1010010");
        assert_eq!(c.count_ones(), 3);
        assert_eq!(serde_json::to_string(&c).unwrap(), "\"1010010\"");
        assert!("101".parse::<PatternCode>().is_err());
        assert!("10100a0".parse::<PatternCode>().is_err());
    }

    #[test]
    fn query_forms() {
        let q: PatternQuery = "--1----".parse().unwrap();
        assert_eq!(q, PatternQuery::single(2, true));
        assert_eq!("F3=1".parse::<PatternQuery>().unwrap(), q);
        let q2 = PatternQuery::from_mask_bits("0010001", "1010000").unwrap();
        assert_eq!(q2.to_string(), "--1---0");
        assert!(q2.matches(&"0010000".parse().unwrap()));
        assert!(!q2.matches(&"0010001".parse().unwrap()));
        assert!("F8=1".parse::<PatternQuery>().is_err());
        assert_eq!(PatternQuery::from_mask_bits("F3", "1").unwrap(), q);
        assert_eq!(PatternQuery::from_mask_bits("F3,F7", "10").unwrap().to_string(), "--1---0");
        assert_eq!(PatternQuery::from_mask_bits("F3", "0010000").unwrap(), q);
        assert!(PatternQuery::from_mask_bits("F3,F7", "1").is_err());
    }

    #[test]
    fn median_ties_give_zero() {
        let rows = vec![[0.5; 6]; 5];
        let (med, codes) = encode_rows(&rows, &[true, false, true, false, true]).unwrap();
        assert_eq!(med.trend_strength, 0.5);
        for c in &codes {
            assert!(c.0[..6].iter().all(|b| !b));
        }
        assert!(codes[0].bit(6) && !codes[1].bit(6));
    }

    #[test]
    fn odd_population_half_minus_one() {
        let rows: Vec<[f64; 6]> = (0..1001).map(|i| [i as f64; 6]).collect();
        let (_, codes) = encode_rows(&rows, &vec![false; 1001]).unwrap();
        assert_eq!(codes.iter().filter(|c| c.bit(0)).count(), 500);
    }

    proptest! {
        #[test]
        fn at_most_half_exceed(values in prop::collection::btree_set(-1000i64..1000, 1..200)) {
            let rows: Vec<[f64; 6]> = values.iter().map(|v| [*v as f64; 6]).collect();
            let (_, codes) = encode_rows(&rows, &vec![false; rows.len()]).unwrap();
            for k in 0..6 {
                let ones = codes.iter().filter(|c| c.bit(k)).count();
                prop_assert!(2 * ones <= rows.len());
            }
        }

        #[test]
        fn retrieval_equals_scan(raw in prop::collection::vec(0u8..128, 0..300), mask in 0u8..128, bits in 0u8..128) {
            let to_bits = |b: u8| std::array::from_fn(|k| b >> k & 1 == 1);
            let codes: Vec<PatternCode> = raw.iter().map(|b| PatternCode(to_bits(*b))).collect();
            let q = PatternQuery { mask: to_bits(mask), values: to_bits(bits & mask) };
            let expected: Vec<usize> = raw
                .iter()
                .enumerate()
                .filter(|(_, b)| (**b ^ bits) & mask == 0)
                .map(|(i, _)| i)
                .collect();
            prop_assert_eq!(retrieve_indices(&codes, &q), expected);
        }
    }
}
