//! Flag groups and plumbing shared by every subcommand: noise-model and
//! excursion-bound construction, extended-real parsing, and output-path
//! resolution against the `QRNG_ENTROPY_OUTDIR` environment variable.

use clap::{Args, ValueEnum};
use qrng_entropy::{ExcursionBound, NoiseModel, Result};
use std::env;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable naming the directory that relative output paths are
/// resolved against. Input paths are always taken as written.
pub const OUTDIR_ENV: &str = "QRNG_ENTROPY_OUTDIR";

/// Parses a real number that may be `inf` or `-inf`; rejects NaN.
pub fn ext_real(s: &str) -> std::result::Result<f64, String> {
    let value: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if value.is_nan() {
        return Err("NaN is not a usable value".into());
    }
    Ok(value)
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct NoiseArgs {
    /// Quantum-to-classical noise ratio in dB (`inf` = no classical noise,
    /// `-inf` = no quantum clearance)
    #[arg(long, value_parser = ext_real, allow_hyphen_values = true)]
    pub qcnr: Option<f64>,

    /// Classical noise standard deviation in quantum-noise units
    #[arg(long = "sigma-e", value_parser = ext_real)]
    pub sigma_e: Option<f64>,
}

/// Noise-model flags: exactly one of `--qcnr` / `--sigma-e`, plus the mean
/// offset.
#[derive(Args, Debug)]
pub struct ModelArgs {
    #[command(flatten)]
    pub noise: NoiseArgs,

    /// Mean offset of the measured signal in quantum-noise units
    #[arg(long, value_parser = ext_real, allow_hyphen_values = true, default_value_t = 0.0)]
    pub offset: f64,
}

impl ModelArgs {
    pub fn build(&self) -> Result<NoiseModel> {
        let base = match (self.noise.qcnr, self.noise.sigma_e) {
            (Some(q), None) => NoiseModel::from_qcnr_db(q)?,
            (None, Some(s)) => NoiseModel::from_sigma_e(s)?,
            _ => unreachable!("the flag group admits exactly one noise parameter"),
        };
        base.with_offset(self.offset)
    }
}

/// Like [`ModelArgs`] but the noise parameter may be absent (the extract
/// command can take its model from a calibration file or an entropy
/// override instead).
#[derive(Args, Debug)]
pub struct OptionalModelArgs {
    /// Quantum-to-classical noise ratio in dB (`inf` = no classical noise,
    /// `-inf` = no quantum clearance)
    #[arg(long, value_parser = ext_real, allow_hyphen_values = true, group = "noise")]
    pub qcnr: Option<f64>,

    /// Classical noise standard deviation in quantum-noise units
    #[arg(long = "sigma-e", value_parser = ext_real, group = "noise")]
    pub sigma_e: Option<f64>,

    /// Mean offset of the measured signal in quantum-noise units
    #[arg(long, value_parser = ext_real, allow_hyphen_values = true, default_value_t = 0.0)]
    pub offset: f64,
}

impl OptionalModelArgs {
    pub fn given(&self) -> bool {
        self.qcnr.is_some() || self.sigma_e.is_some()
    }

    pub fn build(&self) -> Result<NoiseModel> {
        let base = match (self.qcnr, self.sigma_e) {
            (Some(q), None) => NoiseModel::from_qcnr_db(q)?,
            (None, Some(s)) => NoiseModel::from_sigma_e(s)?,
            _ => unreachable!("callers check `given` and the group forbids both"),
        };
        base.with_offset(self.offset)
    }
}

/// Worst-case conditioning bound: the adversary sees the classical noise up
/// to `k` standard deviations out, plus an offset of unknown sign.
#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Excursion multiple: worst-case figures range the classical noise over
    /// ±K standard deviations (`inf` allowed)
    #[arg(long, value_parser = ext_real, default_value_t = 5.0)]
    pub k: f64,

    /// Largest offset magnitude granted to the conditioning; defaults to the
    /// magnitude of --offset
    #[arg(long = "delta-max", value_parser = ext_real)]
    pub delta_max: Option<f64>,
}

impl BoundArgs {
    pub fn build(&self, model: &NoiseModel) -> Result<ExcursionBound> {
        ExcursionBound::new(self.k, self.delta_max.unwrap_or_else(|| model.delta_offset().abs()))
    }
}

/// Which conditional min-entropy figure an operation is based on.
#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum Basis {
    Worst,
    Average,
}

impl Basis {
    pub fn label(self) -> &'static str {
        match self {
            Basis::Worst => "worst",
            Basis::Average => "average",
        }
    }
}

/// Serialization of a single report.
#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Resolves a relative output path against [`OUTDIR_ENV`] when it is set.
pub fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = env::var_os(OUTDIR_ENV) {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

/// Writes `text` to the resolved output path, or to standard output when no
/// path was given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(resolve_out(path), text).map_err(Into::into),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn pretty_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
