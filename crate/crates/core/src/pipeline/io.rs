//! On-disk formats: raw sample files, their JSON sidecars, and run manifests.
//!
//! Samples are stored as little-endian two's-complement codes, each occupying
//! the smallest whole number of bytes that holds the converter width. A raw
//! file is described by a JSON sidecar at `<path>.json`; reading validates
//! every code against the advertised converter geometry.

use crate::adc_model::AdcConfig;
use crate::error::{Error, Result};
use crate::pipeline::extract::BitString;
use crate::pipeline::{Provenance, SampleBlock};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Sidecar metadata for a raw sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDescriptor {
    pub n_bits: u32,
    pub range_r: f64,
    pub sample_rate_hz: f64,
    pub channel_id: String,
    pub count: u64,
}

/// Parameters and entropy accounting of one extraction run, written next to
/// the output bits so a run can be audited and reproduced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub input_path: String,
    pub input_samples: u64,
    pub n_bits_in: u32,
    pub keep_bits: u32,
    /// Which conditional min-entropy the sizing used (worst-case or average).
    pub entropy_basis: String,
    pub h_min_per_sample_in: f64,
    pub h_min_per_sample_kept: f64,
    pub samples_per_block: usize,
    pub input_block_bits: usize,
    pub block_entropy_bits: f64,
    pub epsilon: f64,
    pub sizing_mode: String,
    pub extractor: String,
    pub output_bits_per_block: usize,
    pub blocks: usize,
    pub input_bits_dropped: usize,
    pub total_output_bits: usize,
    pub seed_fingerprint: String,
    pub output_sha256: String,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

/// Sidecar location for a raw sample file: the full name plus `.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    path.with_file_name(name)
}

/// Bytes per stored code: the smallest whole number that holds `n_bits`.
pub fn code_byte_width(n_bits: u32) -> usize {
    (n_bits as usize).div_ceil(8)
}

/// SHA-256 over the seed's length and packed bytes, as lowercase hex.
/// Identifies a seed in manifests without reproducing it.
pub fn seed_fingerprint(seed: &BitString) -> String {
    let mut hasher = Sha256::new();
    hasher.update((seed.len() as u64).to_le_bytes());
    hasher.update(seed.to_bytes());
    hex_string(&hasher.finalize())
}

/// SHA-256 of a byte slice as lowercase hex.
pub fn sha256_hex(data: &[u8]) -> String {
    hex_string(&Sha256::digest(data))
}

fn hex_string(digest: &[u8]) -> String {
    let mut out = String::with_capacity(digest.len() * 2);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Writes the block's codes as packed little-endian two's-complement plus a
/// JSON sidecar, and returns the descriptor that was written.
pub fn write_raw_samples(
    path: &Path,
    block: &SampleBlock,
    sample_rate_hz: f64,
    channel_id: &str,
) -> Result<SampleDescriptor> {
    let n_bits = block.adc.n_bits();
    let width = code_byte_width(n_bits);
    let code_mask: u32 = if n_bits == 32 { u32::MAX } else { (1u32 << n_bits) - 1 };
    let mut bytes = Vec::with_capacity(block.samples.len() * width);
    for &code in &block.samples {
        bytes.extend_from_slice(&(code as u32 & code_mask).to_le_bytes()[..width]);
    }
    fs::write(path, &bytes)?;
    let descriptor = SampleDescriptor {
        n_bits: block.adc.n_bits(),
        range_r: block.adc.range_r(),
        sample_rate_hz,
        channel_id: channel_id.to_string(),
        count: block.samples.len() as u64,
    };
    let mut file = fs::File::create(sidecar_path(path))?;
    serde_json::to_writer_pretty(&mut file, &descriptor)?;
    file.write_all(b"\n")?;
    Ok(descriptor)
}

/// Reads a raw sample file and its sidecar, validating the file length and
/// every code against the descriptor's converter geometry.
pub fn read_raw_samples(path: &Path) -> Result<(SampleBlock, SampleDescriptor)> {
    let descriptor: SampleDescriptor = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let adc = AdcConfig::new(descriptor.n_bits, descriptor.range_r)?;
    if descriptor.sample_rate_hz <= 0.0 || !descriptor.sample_rate_hz.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "sample rate must be positive and finite (got {})",
            descriptor.sample_rate_hz
        )));
    }
    let width = code_byte_width(descriptor.n_bits);
    let bytes = fs::read(path)?;
    if bytes.len() % width != 0 {
        return Err(Error::InvalidConfig(format!(
            "file length {} is not a multiple of the {width}-byte code width",
            bytes.len()
        )));
    }
    let count = bytes.len() / width;
    if count as u64 != descriptor.count {
        return Err(Error::InvalidConfig(format!(
            "descriptor promises {} samples but the file holds {count}",
            descriptor.count
        )));
    }
    let mask: u32 = if width == 4 { u32::MAX } else { (1u32 << (8 * width)) - 1 };
    let sign_bit = 1u32 << (descriptor.n_bits - 1);
    let code_mask: u32 =
        if descriptor.n_bits == 32 { u32::MAX } else { (1u32 << descriptor.n_bits) - 1 };
    let mut samples = Vec::with_capacity(count);
    for chunk in bytes.chunks_exact(width) {
        let mut raw = [0u8; 4];
        raw[..width].copy_from_slice(chunk);
        let u = u32::from_le_bytes(raw) & mask;
        if u & !code_mask != 0 {
            return Err(Error::InvalidConfig(format!(
                "stored value {u:#x} does not fit in {} bits",
                descriptor.n_bits
            )));
        }
        let code = if u & sign_bit != 0 { (u | !code_mask) as i32 } else { u as i32 };
        if code < adc.min_code() || code > adc.max_code() {
            return Err(Error::InvalidConfig(format!(
                "code {code} outside the {}-bit range [{}, {}]",
                descriptor.n_bits,
                adc.min_code(),
                adc.max_code()
            )));
        }
        samples.push(code);
    }
    let block =
        SampleBlock { samples, adc, provenance: Provenance::Ingested, calibration: None };
    Ok((block, descriptor))
}
