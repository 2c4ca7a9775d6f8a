//! Report records. Every float is written with 17 significant digits so
//! reports are byte-identical across runs and round-trip exactly.

use eddeg_core::empiric::{MatchReport, MultistartOutcome};
use eddeg_core::stationary::{StationaryPoint, Tolerances};
use eddeg_core::Mat;
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::descriptor::ModelDescriptor;

/// Float serialized as `d.dddddddddddddddde±x`; non-finite values become
/// `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl F17 {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            "null".to_string()
        }
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawValue::from_string(self.text())
            .map_err(S::Error::custom)?
            .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixOut {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<F17>,
}

impl From<&Mat> for MatrixOut {
    fn from(m: &Mat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            data.extend(m.row(i).iter().map(|&x| F17(x)));
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    pub model_descriptor: ModelDescriptor,
    pub ed_degree: u64,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub label: String,
    pub objective: F17,
    pub grad_residual: F17,
    pub matrix: MatrixOut,
}

impl From<&StationaryPoint> for PointRecord {
    fn from(p: &StationaryPoint) -> Self {
        Self {
            label: p.label.to_string(),
            objective: F17(p.objective),
            grad_residual: F17(p.grad_residual),
            matrix: (&p.x).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToleranceEcho {
    pub gap: F17,
    pub membership: F17,
    pub stationarity: F17,
    pub distinctness: F17,
}

impl From<&Tolerances> for ToleranceEcho {
    fn from(t: &Tolerances) -> Self {
        Self {
            gap: F17(t.gap),
            membership: F17(t.membership),
            stationarity: F17(t.stationarity),
            distinctness: F17(t.distinctness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    pub starts: usize,
    pub converged: usize,
    pub dropped: usize,
    pub n_found_clusters: usize,
    pub n_expected: usize,
    pub n_matched: usize,
    pub max_match_distance: F17,
    pub unmatched_clusters: Vec<usize>,
    pub missing_labels: Vec<String>,
    pub complete: bool,
}

impl OracleSummary {
    pub fn new(run: &MultistartOutcome, report: &MatchReport) -> Self {
        Self {
            starts: run.n_starts,
            converged: run.n_converged,
            dropped: run.n_dropped,
            n_found_clusters: report.n_found_clusters,
            n_expected: report.n_expected,
            n_matched: report.matched_labels.len(),
            max_match_distance: F17(report.max_match_distance),
            unmatched_clusters: report.unmatched_clusters.clone(),
            missing_labels: report
                .missing_labels
                .iter()
                .map(|l| l.to_string())
                .collect(),
            complete: report.is_complete(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_seed: u64,
    /// `sampled:<seed>` (after resampling) or `file:<path>`.
    pub anchor: String,
    pub degree_formula: u64,
    pub count_enumerated: u64,
    pub max_membership_residual: F17,
    pub max_stationarity_residual: F17,
    pub min_pairwise_distance: F17,
    /// `null` when the model parameters are not ordered for the closed form.
    pub nearest_label: Option<String>,
    pub argmin_label: Option<String>,
    pub pass: bool,
    pub oracle: Option<OracleSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub model_descriptor: ModelDescriptor,
    pub trials: Vec<TrialRecord>,
    pub pass: bool,
    pub tool_version: String,
    pub tolerances: ToleranceEcho,
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> std::io::Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(std::io::Error::other)
}

fn opt(s: &Option<String>) -> String {
    s.clone().unwrap_or_default()
}

/// One row per trial.
pub fn trials_csv(report: &CertifyReport) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "trial_seed",
        "anchor",
        "degree_formula",
        "count_enumerated",
        "max_membership_residual",
        "max_stationarity_residual",
        "min_pairwise_distance",
        "nearest_label",
        "argmin_label",
        "pass",
        "oracle_clusters",
        "oracle_matched",
        "oracle_complete",
    ])
    .map_err(csv_err)?;
    for t in &report.trials {
        let (clusters, matched, complete) = match &t.oracle {
            Some(o) => (
                o.n_found_clusters.to_string(),
                o.n_matched.to_string(),
                o.complete.to_string(),
            ),
            None => Default::default(),
        };
        w.write_record([
            t.trial_seed.to_string(),
            t.anchor.clone(),
            t.degree_formula.to_string(),
            t.count_enumerated.to_string(),
            t.max_membership_residual.text(),
            t.max_stationarity_residual.text(),
            t.min_pairwise_distance.text(),
            opt(&t.nearest_label),
            opt(&t.argmin_label),
            t.pass.to_string(),
            clusters,
            matched,
            complete,
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

/// One row per point; matrix entries row-major, space separated.
pub fn points_csv(points: &[PointRecord]) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "label",
        "objective",
        "grad_residual",
        "rows",
        "cols",
        "data",
    ])
    .map_err(csv_err)?;
    for p in points {
        let data: Vec<String> = p.matrix.data.iter().map(|x| x.text()).collect();
        w.write_record([
            p.label.clone(),
            p.objective.text(),
            p.grad_residual.text(),
            p.matrix.rows.to_string(),
            p.matrix.cols.to_string(),
            data.join(" "),
        ])
        .map_err(csv_err)?;
    }
    finish_csv(w)
}

pub fn degree_csv(report: &DegreeReport) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["model", "ed_degree", "dimension"])
        .map_err(csv_err)?;
    w.write_record([
        report.model_descriptor.model.to_string(),
        report.ed_degree.to_string(),
        report.dimension.to_string(),
    ])
    .map_err(csv_err)?;
    finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(F17(0.1).text(), "1.0000000000000001e-1");
        assert_eq!(F17(-8.0).text(), "-8.0000000000000000e0");
        assert_eq!(serde_json::to_string(&F17(f64::INFINITY)).unwrap(), "null");
        let back: f64 = serde_json::from_str(&F17(std::f64::consts::PI).text()).unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn matrices_are_row_major() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let out = MatrixOut::from(&m);
        assert_eq!(out.data[1], F17(2.0));
        let json = serde_json::to_string(&out).unwrap();
        assert!(json.starts_with(r#"{"rows":2,"cols":2,"data":[1.0000000000000000e0,"#));
    }
}
