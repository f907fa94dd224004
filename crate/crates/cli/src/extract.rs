//! `extract`: discard the high bits of a raw sample file, size a seeded
//! extractor from a conditional min-entropy budget, and write the extracted
//! bits plus a run manifest.

use crate::args::{ext_real, resolve_out, Basis, BoundArgs, OptionalModelArgs};
use clap::{Args, ValueEnum};
use qrng_entropy::pipeline::{
    discard_msbs, entropy_after_discard, extract, read_raw_samples, seed_fingerprint, sha256_hex,
    BitString, CalibrationRecord, ExtractorConfig, ExtractorKind, RunManifest, SizingMode,
};
use qrng_entropy::{
    min_entropy_average, min_entropy_worst_case, AdcConfig, Error, NoiseModel, Result,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Sizing {
    /// Leftover-hash sizing: floor(t - 2 log2(1/epsilon))
    InformationTheoretic,
    /// Half the block min-entropy
    KeepHalf,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Family {
    /// Seeded binary Toeplitz matrix (2-universal)
    Toeplitz,
    /// Keyed cryptographic hash; no information-theoretic claim
    KeyedHash,
}

#[derive(Args, Debug)]
#[group(id = "seed_source", required = true, multiple = false)]
struct SeedArgs {
    /// Expand the extractor seed deterministically from this integer
    #[arg(long)]
    seed: Option<u64>,

    /// Read the packed extractor seed from a file (low bit of each byte
    /// first)
    #[arg(long = "seed-file")]
    seed_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// Raw sample file, with its JSON sidecar next to it
    #[arg(long)]
    input: PathBuf,

    /// Output path for the packed extracted bits
    #[arg(long)]
    out: PathBuf,

    /// Manifest path (defaults to <out>.manifest.json)
    #[arg(long)]
    manifest: Option<PathBuf>,

    /// Low bits kept per sample; defaults to 4 fewer than the sample width
    #[arg(long = "keep-bits")]
    keep_bits: Option<u32>,

    /// Samples hashed per extractor block
    #[arg(long = "block-samples", default_value_t = 256,
          value_parser = clap::value_parser!(u64).range(1..))]
    block_samples: u64,

    /// Statistical distance target for the extracted bits
    #[arg(long, value_parser = ext_real, default_value_t = 2e-32)]
    epsilon: f64,

    /// Which conditional min-entropy figure sizes the extractor
    #[arg(long = "entropy-basis", value_enum, default_value_t = Basis::Average)]
    entropy_basis: Basis,

    #[command(flatten)]
    model: OptionalModelArgs,

    #[command(flatten)]
    bound: BoundArgs,

    /// Per-sample min-entropy budget in bits, bypassing the model
    #[arg(long = "h-min", group = "entropy_source")]
    h_min: Option<f64>,

    /// Calibration record supplying the noise model
    #[arg(long, group = "entropy_source")]
    calibration: Option<PathBuf>,

    /// Treat the stream as raw converter codes: the calibration record's
    /// quantum-noise scale converts the converter geometry before any
    /// entropy is computed
    #[arg(long = "raw-units", requires = "calibration")]
    raw_units: bool,

    /// Output sizing rule
    #[arg(long, value_enum, default_value_t = Sizing::InformationTheoretic)]
    sizing: Sizing,

    /// Hash family
    #[arg(long, value_enum, default_value_t = Family::Toeplitz)]
    extractor: Family,

    #[command(flatten)]
    seed: SeedArgs,
}

fn entropy_budget(args: &ExtractArgs, file_adc: &AdcConfig) -> Result<(f64, String)> {
    let sources =
        args.h_min.is_some() as u32 + args.calibration.is_some() as u32 + args.model.given() as u32;
    if sources != 1 {
        return Err(Error::InvalidConfig(
            "provide exactly one entropy source: --h-min, --calibration, or a noise model \
             (--qcnr / --sigma-e)"
                .into(),
        ));
    }
    if let Some(h) = args.h_min {
        let n = f64::from(file_adc.n_bits());
        if !(0.0..=n).contains(&h) {
            return Err(Error::InvalidConfig(format!(
                "--h-min must lie in [0, {n}] for this stream (got {h})"
            )));
        }
        return Ok((h, "override".into()));
    }

    let (model, adc) = if let Some(path) = &args.calibration {
        let record: CalibrationRecord = serde_json::from_slice(&fs::read(path)?)?;
        let model =
            NoiseModel::from_qcnr_db(record.qcnr_db)?.with_offset(record.delta_offset)?;
        let adc = if args.raw_units {
            AdcConfig::new(
                file_adc.n_bits(),
                f64::from(1u32 << (file_adc.n_bits() - 1)) / record.sigma_q_code,
            )?
        } else {
            *file_adc
        };
        (model, adc)
    } else {
        (args.model.build()?, *file_adc)
    };

    match args.entropy_basis {
        Basis::Worst => {
            let bound = args.bound.build(&model)?;
            Ok((min_entropy_worst_case(&model, &adc, &bound), "worst".into()))
        }
        Basis::Average => Ok((min_entropy_average(&model, &adc)?, "average".into())),
    }
}

fn build_seed(args: &SeedArgs, required_bits: usize) -> Result<BitString> {
    let mut seed = BitString::with_capacity(required_bits);
    match (args.seed, &args.seed_file) {
        (Some(value), None) => {
            let mut rng = ChaCha12Rng::seed_from_u64(value);
            while seed.len() < required_bits {
                seed.push_bits(rng.random::<u64>(), ((required_bits - seed.len()).min(64)) as u32);
            }
        }
        (None, Some(path)) => {
            let bytes = fs::read(path)?;
            if bytes.len() * 8 < required_bits {
                return Err(Error::SeedLength { expected: required_bits, got: bytes.len() * 8 });
            }
            seed = BitString::from_bytes(&bytes, required_bits);
        }
        _ => unreachable!("the flag group admits exactly one seed source"),
    }
    Ok(seed)
}

fn default_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn run(args: &ExtractArgs) -> Result<()> {
    let (block, _descriptor) = read_raw_samples(&args.input)?;
    let n_bits = block.adc.n_bits();
    let keep_bits = args.keep_bits.unwrap_or_else(|| n_bits.saturating_sub(4).max(1));

    let (h_in, basis_label) = entropy_budget(args, &block.adc)?;
    let h_kept = entropy_after_discard(h_in, n_bits, keep_bits);
    let kept = discard_msbs(&block, keep_bits)?;

    let samples_per_block = args.block_samples as usize;
    let input_block_bits = samples_per_block * keep_bits as usize;
    let block_entropy_bits = h_kept * samples_per_block as f64;
    let cfg = match args.sizing {
        Sizing::InformationTheoretic => ExtractorConfig::information_theoretic(
            block_entropy_bits,
            args.epsilon,
            input_block_bits,
        )?,
        Sizing::KeepHalf => {
            ExtractorConfig::keep_half(block_entropy_bits, args.epsilon, input_block_bits)?
        }
    };
    let cfg = cfg.with_kind(match args.extractor {
        Family::Toeplitz => ExtractorKind::Toeplitz,
        Family::KeyedHash => ExtractorKind::KeyedHash,
    })?;
    let required_seed_bits = cfg.required_seed_bits();
    let cfg = cfg.with_seed(build_seed(&args.seed, required_seed_bits)?)?;
    if cfg.output_bits() == 0 {
        eprintln!(
            "warning: the sizing leaves no extractable bits (block entropy {block_entropy_bits:.2} \
             bits, epsilon {:e}); writing an empty output",
            args.epsilon
        );
    }

    let output = extract(&kept, &cfg)?;
    let out_bytes = output.bits.to_bytes();
    let out_path = resolve_out(&args.out);
    fs::write(&out_path, &out_bytes)?;

    let kept_stream_bits = kept.samples.len() * keep_bits as usize;
    let manifest = RunManifest {
        input_path: args.input.display().to_string(),
        input_samples: block.samples.len() as u64,
        n_bits_in: n_bits,
        keep_bits,
        entropy_basis: basis_label,
        h_min_per_sample_in: h_in,
        h_min_per_sample_kept: h_kept,
        samples_per_block,
        input_block_bits,
        block_entropy_bits,
        epsilon: args.epsilon,
        sizing_mode: match cfg.mode() {
            SizingMode::InformationTheoretic => "information_theoretic".into(),
            SizingMode::KeepHalf => "keep_half".into(),
        },
        extractor: match cfg.kind() {
            ExtractorKind::Toeplitz => "toeplitz".into(),
            ExtractorKind::KeyedHash => "keyed_hash".into(),
        },
        output_bits_per_block: cfg.output_bits(),
        blocks: output.blocks,
        input_bits_dropped: kept_stream_bits - output.blocks * input_block_bits,
        total_output_bits: output.bits.len(),
        seed_fingerprint: seed_fingerprint(cfg.seed()),
        output_sha256: sha256_hex(&out_bytes),
    };
    let manifest_path = match &args.manifest {
        Some(path) => resolve_out(path),
        None => default_manifest_path(&out_path),
    };
    manifest.write(&manifest_path)?;
    eprintln!(
        "extracted {} bits ({} blocks of {}) into {}; manifest {}",
        manifest.total_output_bits,
        manifest.blocks,
        manifest.output_bits_per_block,
        out_path.display(),
        manifest_path.display()
    );
    Ok(())
}
