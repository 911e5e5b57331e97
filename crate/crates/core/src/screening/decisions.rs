//! Curator decisions and dataset finalization.
//!
//! Ids are qualified by dataset: `"<dataset>/<series>"` for series targets and
//! `"<dataset>/<variate>"` for variate targets. Dropping a variate removes
//! that column from every series of the dataset so that all series keep a
//! shared set of variate names. Trim spans are half-open row ranges
//! `[start, end)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::QualityReport;
use crate::corpus::DatasetSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionTarget {
    Series,
    Variate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionAction {
    Keep,
    Drop,
    Trim,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub target: DecisionTarget,
    pub id: String,
    pub action: DecisionAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trim_span: Option<[usize; 2]>,
}

impl Decision {
    /// Splits the id into `(dataset, member)`.
    pub fn split_id(&self) -> Result<(&str, &str)> {
        self.id
            .split_once('/')
            .filter(|(d, m)| !d.is_empty() && !m.is_empty())
            .ok_or_else(|| Error::Decision(format!("id {:?} must look like <dataset>/<name>", self.id)))
    }

    /// Checks shape and that the id resolves against `datasets`.
    pub fn validate(&self, datasets: &[DatasetSpec]) -> Result<()> {
        let (ds_id, member) = self.split_id()?;
        let ds = datasets
            .iter()
            .find(|d| d.dataset_id == ds_id)
            .ok_or_else(|| Error::UnknownId(self.id.clone()))?;
        match self.target {
            DecisionTarget::Series => {
                let series = ds.series(member).ok_or_else(|| Error::UnknownId(self.id.clone()))?;
                match (self.action, self.trim_span) {
                    (DecisionAction::Trim, None) => {
                        Err(Error::Decision(format!("{}: trim requires trim_span", self.id)))
                    }
                    (DecisionAction::Trim, Some([start, end])) if start >= end || end > series.len() => {
                        Err(Error::Decision(format!(
                            "{}: trim_span [{start}, {end}) is not inside [0, {})",
                            self.id,
                            series.len()
                        )))
                    }
                    (DecisionAction::Trim, Some([start, end])) if end - start <= ds.test_length => {
                        Err(Error::Decision(format!(
                            "{}: trimmed length {} must exceed test_length {}",
                            self.id,
                            end - start,
                            ds.test_length
                        )))
                    }
                    _ => Ok(()),
                }
            }
            DecisionTarget::Variate => {
                if !ds.variate_names().contains(&member) {
                    return Err(Error::UnknownId(self.id.clone()));
                }
                if self.action == DecisionAction::Trim {
                    return Err(Error::Decision(format!("{}: variates cannot be trimmed", self.id)));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionSet {
    pub decisions: Vec<Decision>,
}

impl DecisionSet {
    pub fn validate(&self, datasets: &[DatasetSpec]) -> Result<()> {
        self.decisions.iter().try_for_each(|d| d.validate(datasets))
    }
}

/// Audit record of one structural change applied during finalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub id: String,
    pub action: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finalized {
    pub dataset: DatasetSpec,
    pub provenance: Vec<Provenance>,
}

/// Produces the finalized dataset: cleaned values substituted, then dropped
/// variates and series removed and trims applied. Decisions for other
/// datasets are ignored; flagged items without a decision are kept.
pub fn apply_decisions(dataset: &DatasetSpec, report: &QualityReport, decisions: &DecisionSet) -> Result<Finalized> {
    if report.dataset_id != dataset.dataset_id {
        return Err(Error::InvalidInput(format!(
            "quality report is for {}, dataset is {}",
            report.dataset_id, dataset.dataset_id
        )));
    }
    let ours: Vec<&Decision> = decisions
        .decisions
        .iter()
        .filter(|d| d.split_id().is_ok_and(|(ds, _)| ds == dataset.dataset_id))
        .collect();
    for d in &ours {
        d.validate(std::slice::from_ref(dataset))?;
    }

    let mut out = dataset.clone();
    let mut provenance = Vec::new();

    for series in &mut out.series {
        let sq = report
            .series
            .iter()
            .find(|s| s.series_id == series.series_id)
            .ok_or_else(|| Error::InvalidInput(format!("series {} missing from quality report", series.series_id)))?;
        for variate in &mut series.variates {
            let vq = sq
                .variates
                .iter()
                .find(|v| v.variate == variate.name)
                .ok_or_else(|| {
                    Error::InvalidInput(format!("variate {}/{} missing from quality report", series.series_id, variate.name))
                })?;
            let Some(cleaned) = &vq.cleaned else { continue };
            if cleaned.len() != variate.len() {
                return Err(Error::InvalidInput(format!(
                    "cleaned values for {}/{} have length {}, expected {}",
                    series.series_id,
                    variate.name,
                    cleaned.len(),
                    variate.len()
                )));
            }
            let filled = variate.missing_count();
            if filled > 0 || !vq.imputation_log.is_empty() {
                provenance.push(Provenance {
                    id: format!("{}/{}/{}", dataset.dataset_id, series.series_id, variate.name),
                    action: "clean".into(),
                    detail: format!("{filled} missing values filled, {} extreme values imputed", vq.imputation_log.len()),
                });
            }
            variate.values = cleaned.clone();
            variate.missing = vec![false; cleaned.len()];
        }
    }

    let mut dropped_variates = BTreeSet::new();
    let mut dropped_series = BTreeSet::new();
    let mut trims: BTreeMap<&str, [usize; 2]> = BTreeMap::new();
    for d in &ours {
        let (_, member) = d.split_id()?;
        match (d.target, d.action) {
            (_, DecisionAction::Keep) => {}
            (DecisionTarget::Variate, DecisionAction::Drop) => {
                dropped_variates.insert(member);
            }
            (DecisionTarget::Series, DecisionAction::Drop) => {
                dropped_series.insert(member);
            }
            (DecisionTarget::Series, DecisionAction::Trim) => {
                trims.insert(member, d.trim_span.expect("validated"));
            }
            (DecisionTarget::Variate, DecisionAction::Trim) => unreachable!("rejected by validation"),
        }
    }

    if !dropped_variates.is_empty() {
        for series in &mut out.series {
            series.variates.retain(|v| !dropped_variates.contains(v.name.as_str()));
        }
        for name in &dropped_variates {
            provenance.push(Provenance {
                id: format!("{}/{name}", dataset.dataset_id),
                action: "drop".into(),
                detail: "variate removed from every series".into(),
            });
        }
    }
    out.series.retain(|s| !dropped_series.contains(s.series_id.as_str()));
    for name in &dropped_series {
        provenance.push(Provenance {
            id: format!("{}/{name}", dataset.dataset_id),
            action: "drop".into(),
            detail: "series removed".into(),
        });
    }
    for series in &mut out.series {
        let Some([start, end]) = trims.get(series.series_id.as_str()).copied() else { continue };
        series.start = series.grid().point(start as i64);
        for v in &mut series.variates {
            v.values = v.values[start..end].to_vec();
            v.missing = v.missing[start..end].to_vec();
        }
        provenance.push(Provenance {
            id: format!("{}/{}", dataset.dataset_id, series.series_id),
            action: "trim".into(),
            detail: format!("kept rows [{start}, {end})"),
        });
    }

    if out.series.is_empty() {
        return Err(Error::Decision(format!("dataset {} would have no series left", dataset.dataset_id)));
    }
    if out.series[0].variates.is_empty() {
        return Err(Error::Decision(format!("dataset {} would have no variates left", dataset.dataset_id)));
    }
    out.validate()?;
    Ok(Finalized { dataset: out, provenance })
}
