use std::fs;
use std::path::Path;

use eddeg_core::matcore::random_spd;
use eddeg_core::models::MatrixFile;
use eddeg_core::{
    FlagSpec, GrassmannSpec, Mat, ModelHandle, SchubertSpec, StiefelSpec, SymmetricMatrix,
};
use serde::Serialize;

use crate::args::{ModelArgs, ModelKind};
use crate::error::CliError;
use crate::report::F17;

/// Seed of the Schubert nesting when none is given.
pub const DEFAULT_FRAME_SEED: u64 = 0x5C4B;

/// Resolved model parameters as echoed in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDescriptor {
    pub model: &'static str,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs: Option<Vec<F17>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_val: Option<F17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_val: Option<F17>,
    /// `identity`, `file:<path>` or `sampled:<seed>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_matrix: Option<String>,
    /// `file:<path>` or `sampled:<seed>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
}

pub fn read_matrix(path: &Path) -> Result<Mat, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let file: MatrixFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("malformed matrix file {}: {e}", path.display())))?;
    Ok(file.to_mat()?)
}

fn need(value: Option<usize>, name: &str, model: &str) -> Result<usize, CliError> {
    value.ok_or_else(|| CliError::input(format!("--{name} is required for the {model} model")))
}

/// Builds the model and its report echo.
pub fn build_model(args: &ModelArgs) -> Result<(ModelHandle, ModelDescriptor), CliError> {
    let mut desc = ModelDescriptor {
        model: "",
        n: 0,
        k: None,
        ks: None,
        l: None,
        m: None,
        bs: None,
        a_val: None,
        b_val: None,
        b_matrix: None,
        frame: None,
    };
    let model: ModelHandle = match args.model {
        ModelKind::Flag => {
            let n = need(args.n, "n", "flag")?;
            let ks = args
                .ks
                .clone()
                .ok_or_else(|| CliError::input("--ks is required for the flag model"))?;
            let spec = match &args.bs {
                Some(bs) => FlagSpec::new(n, ks, bs.clone())?,
                None => FlagSpec::with_default_bs(n, ks)?,
            };
            desc.ks = Some(spec.ks().to_vec());
            desc.bs = Some(spec.bs().iter().map(|&b| F17(b)).collect());
            spec.into()
        }
        ModelKind::Grassmann => {
            let n = need(args.n, "n", "grassmann")?;
            let k = need(args.k, "k", "grassmann")?;
            let (a, b) = (args.a_val.unwrap_or(1.0), args.b_val.unwrap_or(0.0));
            desc.k = Some(k);
            desc.a_val = Some(F17(a));
            desc.b_val = Some(F17(b));
            GrassmannSpec::new(n, k, a, b)?.into()
        }
        ModelKind::Stiefel => {
            let n = need(args.n, "n", "stiefel")?;
            let (b, source) = match (&args.b_file, args.b_seed) {
                (Some(path), _) => {
                    let b = SymmetricMatrix::new(read_matrix(path)?)?;
                    (b, format!("file:{}", path.display()))
                }
                (None, Some(seed)) => {
                    let k = need(args.k, "k", "stiefel")?;
                    (random_spd(k, seed), format!("sampled:{seed}"))
                }
                (None, None) => {
                    let k = need(args.k, "k", "stiefel")?;
                    (SymmetricMatrix::identity(k), "identity".to_string())
                }
            };
            if let Some(k) = args.k {
                if k != b.n() {
                    return Err(CliError::input(format!(
                        "--k {k} disagrees with the {0}x{0} B matrix",
                        b.n()
                    )));
                }
            }
            desc.k = Some(b.n());
            desc.b_matrix = Some(source);
            StiefelSpec::new(n, b)?.into()
        }
        ModelKind::Schubert => {
            let n = need(args.n, "n", "schubert")?;
            let k = need(args.k, "k", "schubert")?;
            let l = need(args.l, "l", "schubert")?;
            let m = need(args.m, "m", "schubert")?;
            let (a, b) = (args.a_val.unwrap_or(1.0), args.b_val.unwrap_or(0.0));
            let spec = match &args.q_file {
                Some(path) => {
                    desc.frame = Some(format!("file:{}", path.display()));
                    SchubertSpec::new(n, k, l, m, a, b, read_matrix(path)?)?
                }
                None => {
                    let seed = args.frame_seed.unwrap_or(DEFAULT_FRAME_SEED);
                    desc.frame = Some(format!("sampled:{seed}"));
                    SchubertSpec::random_nested(n, k, l, m, a, b, seed)?
                }
            };
            desc.k = Some(k);
            desc.l = Some(l);
            desc.m = Some(m);
            desc.a_val = Some(F17(a));
            desc.b_val = Some(F17(b));
            spec.into()
        }
    };
    desc.model = model.kind();
    desc.n = model.n();
    Ok((model, desc))
}
