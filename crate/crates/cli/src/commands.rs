use std::fs;

use eddeg_core::empiric::{match_points, multistart, start_seed, DescentParams, CLUSTER_TOL};
use eddeg_core::matcore::{random_rect, random_symmetric};
use eddeg_core::stationary::{
    argmin, certify, check_generic, enumerate_with, nearest_with, SpectralData, Tolerances,
};
use eddeg_core::{EdError, Mat, ModelHandle};

use crate::args::{AnchorArgs, Command, Format, ModelArgs, OutputArgs, TolArgs};
use crate::descriptor::{build_model, read_matrix};
use crate::error::{CliError, EXIT_CHECK_FAILED};
use crate::report::{
    degree_csv, points_csv, trials_csv, CertifyReport, DegreeReport, OracleSummary, PointRecord,
    TrialRecord, F17,
};

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "EDDEG_SEED";

/// Resampling attempts after the first draw of a degenerate sampled anchor.
pub const MAX_RESAMPLES: usize = 5;

/// Text to print and the exit code to return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

fn tolerances(args: &TolArgs) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    for (value, slot, name) in [
        (args.tol_mem, &mut tol.membership, "--tol-mem"),
        (args.tol_stat, &mut tol.stationarity, "--tol-stat"),
        (args.tol_gap, &mut tol.gap, "--tol-gap"),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::input(format!("{name} must be positive")));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

/// `EDDEG_SEED` if set, else `--seed`, else 0.
pub fn effective_seed(args: &AnchorArgs) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::input(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))
        }),
        Err(_) => Ok(args.seed.unwrap_or(0)),
    }
}

/// Seeded Gaussian anchor shaped for the model.
pub fn sample_anchor(model: &ModelHandle, seed: u64) -> Mat {
    let (r, c) = model.ambient_shape();
    if model.is_symmetric_ambient() {
        random_symmetric(r, seed).into_inner()
    } else {
        random_rect(r, c, seed).into_inner()
    }
}

struct Anchor {
    a: Mat,
    spectra: SpectralData,
    source: String,
}

/// Draws a generic anchor from `seed`, resampling degenerate draws.
fn sampled_anchor(model: &ModelHandle, seed: u64, gap: f64) -> Result<Anchor, CliError> {
    let mut last = None;
    for attempt in 0..=MAX_RESAMPLES {
        let s = start_seed(seed, attempt);
        let a = sample_anchor(model, s);
        match check_generic(model, &a, gap) {
            Ok(spectra) => {
                return Ok(Anchor {
                    a,
                    spectra,
                    source: format!("sampled:{s}"),
                })
            }
            Err(e @ EdError::DegenerateInput { .. }) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    let e = last.expect("at least one attempt");
    Err(CliError::input(format!(
        "{e} (persisted after {MAX_RESAMPLES} resamples)"
    )))
}

fn file_anchor(model: &ModelHandle, path: &std::path::Path, gap: f64) -> Result<Anchor, CliError> {
    let a = read_matrix(path)?;
    let spectra = check_generic(model, &a, gap)?;
    Ok(Anchor {
        a,
        spectra,
        source: format!("file:{}", path.display()),
    })
}

fn anchor_for(
    model: &ModelHandle,
    args: &AnchorArgs,
    seed: u64,
    gap: f64,
) -> Result<Anchor, CliError> {
    match &args.anchor {
        Some(path) => file_anchor(model, path, gap),
        None => sampled_anchor(model, seed, gap),
    }
}

fn emit(text: String, output: &OutputArgs, code: u8) -> Result<Outcome, CliError> {
    match &output.output {
        Some(path) => {
            fs::write(path, &text)?;
            Ok(Outcome {
                stdout: String::new(),
                code,
            })
        }
        None => Ok(Outcome { stdout: text, code }),
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::internal(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Degree { model, output } => cmd_degree(model, output),
        Command::Enumerate {
            model,
            anchor,
            tol,
            output,
        } => cmd_enumerate(model, anchor, tol, output),
        Command::Nearest {
            model,
            anchor,
            tol,
            output,
        } => cmd_nearest(model, anchor, tol, output),
        Command::Certify {
            model,
            anchor,
            trials,
            oracle,
            starts,
            tol,
            output,
        } => cmd_certify(
            model,
            anchor,
            *trials,
            oracle.then_some(*starts),
            tol,
            output,
        ),
    }
}

pub fn cmd_degree(model: &ModelArgs, output: &OutputArgs) -> Result<Outcome, CliError> {
    let (handle, desc) = build_model(model)?;
    let report = DegreeReport {
        model_descriptor: desc,
        ed_degree: handle.ed_degree()?,
        dimension: handle.dimension(),
    };
    let text = match output.format {
        Format::Json => json(&report)?,
        Format::Csv => degree_csv(&report)?,
    };
    emit(text, output, 0)
}

fn sorted_records(points: &[eddeg_core::StationaryPoint]) -> Vec<PointRecord> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].objective.total_cmp(&points[j].objective));
    order
        .iter()
        .map(|&i| PointRecord::from(&points[i]))
        .collect()
}

pub fn cmd_enumerate(
    model: &ModelArgs,
    anchor: &AnchorArgs,
    tol: &TolArgs,
    output: &OutputArgs,
) -> Result<Outcome, CliError> {
    let (handle, _) = build_model(model)?;
    let tol = tolerances(tol)?;
    let anchor = anchor_for(&handle, anchor, effective_seed(anchor)?, tol.gap)?;
    let points = enumerate_with(&handle, &anchor.a, &anchor.spectra)?;
    let records = sorted_records(&points);
    let text = match output.format {
        Format::Json => json(&records)?,
        Format::Csv => points_csv(&records)?,
    };
    emit(text, output, 0)
}

/// Agreement bound between the closed-form nearest point and the
/// enumeration's argmin, relative to `1 + ‖A‖_F`.
const NEAREST_CROSS_CHECK: f64 = 1e-10;

pub fn cmd_nearest(
    model: &ModelArgs,
    anchor: &AnchorArgs,
    tol: &TolArgs,
    output: &OutputArgs,
) -> Result<Outcome, CliError> {
    let (handle, _) = build_model(model)?;
    let tol = tolerances(tol)?;
    let anchor = anchor_for(&handle, anchor, effective_seed(anchor)?, tol.gap)?;
    let nearest = nearest_with(&handle, &anchor.a, &anchor.spectra)?;
    let points = enumerate_with(&handle, &anchor.a, &anchor.spectra)?;
    let best = argmin(&points).ok_or_else(|| CliError::internal("empty enumeration"))?;
    let gap = (&best.x - &nearest.x).norm();
    if best.label != nearest.label || gap > NEAREST_CROSS_CHECK * (1.0 + anchor.a.norm()) {
        return Err(CliError::internal(format!(
            "nearest point {} disagrees with enumeration argmin {} (distance {gap:.3e})",
            nearest.label, best.label
        )));
    }
    let record = PointRecord::from(&nearest);
    let text = match output.format {
        Format::Json => json(&record)?,
        Format::Csv => points_csv(std::slice::from_ref(&record))?,
    };
    emit(text, output, 0)
}

/// Runs one certification trial on a prepared anchor.
fn run_trial(
    handle: &ModelHandle,
    anchor: Anchor,
    trial_seed: u64,
    tol: &Tolerances,
    oracle: Option<Option<usize>>,
) -> Result<TrialRecord, CliError> {
    let cert = certify(handle, &anchor.a, tol)?;
    let oracle = match oracle {
        Some(starts) => {
            let n_starts = starts.unwrap_or(40 * cert.points.len().max(1));
            let run = multistart(
                handle,
                &anchor.a,
                n_starts,
                trial_seed,
                &DescentParams::default(),
            )?;
            let found: Vec<Mat> = run
                .clusters
                .iter()
                .map(|c| c.representative.clone())
                .collect();
            let report = match_points(&found, &cert.points, CLUSTER_TOL, cert.anchor_norm);
            Some(OracleSummary::new(&run, &report))
        }
        None => None,
    };
    Ok(TrialRecord {
        trial_seed,
        anchor: anchor.source,
        degree_formula: cert.degree,
        count_enumerated: cert.points.len() as u64,
        max_membership_residual: F17(cert.max_membership_residual),
        max_stationarity_residual: F17(cert.max_stationarity_residual),
        min_pairwise_distance: F17(cert.min_pairwise_distance),
        nearest_label: cert.nearest.as_ref().map(|p| p.label.to_string()),
        argmin_label: cert.argmin_label.as_ref().map(|l| l.to_string()),
        pass: cert.passes(tol),
        oracle,
    })
}

/// Builds the full certification report without writing it.
pub fn certify_report(
    model: &ModelArgs,
    anchor: &AnchorArgs,
    trials: u64,
    oracle: Option<Option<usize>>,
    tol: &TolArgs,
) -> Result<CertifyReport, CliError> {
    if trials == 0 {
        return Err(CliError::input("--trials must be at least 1"));
    }
    let (handle, desc) = build_model(model)?;
    let tol = tolerances(tol)?;
    let seed = effective_seed(anchor)?;
    let mut records = Vec::with_capacity(trials as usize);
    for t in 1..=trials {
        let trial_seed = seed.wrapping_add(t);
        let a = anchor_for(&handle, anchor, trial_seed, tol.gap)?;
        records.push(run_trial(&handle, a, trial_seed, &tol, oracle)?);
    }
    Ok(CertifyReport {
        model_descriptor: desc,
        pass: records.iter().all(|r| r.pass),
        trials: records,
        tool_version: format!("eddeg {}", env!("CARGO_PKG_VERSION")),
        tolerances: (&tol).into(),
    })
}

pub fn cmd_certify(
    model: &ModelArgs,
    anchor: &AnchorArgs,
    trials: u64,
    oracle: Option<Option<usize>>,
    tol: &TolArgs,
    output: &OutputArgs,
) -> Result<Outcome, CliError> {
    let report = certify_report(model, anchor, trials, oracle, tol)?;
    let text = match output.format {
        Format::Json => json(&report)?,
        Format::Csv => trials_csv(&report)?,
    };
    let code = if report.pass { 0 } else { EXIT_CHECK_FAILED };
    emit(text, output, code)
}
