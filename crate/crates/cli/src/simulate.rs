//! `simulate`: draw digitized samples from the noise model into a raw file
//! with its JSON sidecar, optionally fitting a calibration record from a
//! paired quantum-blocked capture.

use crate::args::{pretty_json, resolve_out, ModelArgs};
use clap::Args;
use qrng_entropy::pipeline::{calibrate, simulate_blocked_samples, simulate_samples};
use qrng_entropy::Result;
use qrng_entropy::{pipeline::write_raw_samples, AdcConfig};
use std::fs;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Converter resolution in bits
    #[arg(long)]
    bits: u32,

    /// Converter full-scale range in quantum-noise units
    #[arg(long)]
    r: f64,

    /// Number of samples to draw
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,

    /// Generator seed; identical seeds reproduce identical files
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output path for the raw sample file (sidecar written at <out>.json)
    #[arg(long)]
    out: PathBuf,

    /// Sample rate recorded in the sidecar, in Hz
    #[arg(long, default_value_t = 1.25e8)]
    rate: f64,

    /// Channel id recorded in the sidecar
    #[arg(long, default_value = "ch0")]
    channel: String,

    /// Also draw a quantum-blocked capture with seed+1, fit both captures,
    /// and write the calibration record here
    #[arg(long = "calibration-out")]
    calibration_out: Option<PathBuf>,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let model = args.model.build()?;
    let adc = AdcConfig::new(args.bits, args.r)?;
    let count = args.count as usize;
    let block = simulate_samples(&model, &adc, count, args.seed)?;
    let out = resolve_out(&args.out);
    write_raw_samples(&out, &block, args.rate, &args.channel)?;
    eprintln!("wrote {} samples of {} bits to {}", count, args.bits, out.display());

    if let Some(calibration_out) = &args.calibration_out {
        let blocked = simulate_blocked_samples(&model, &adc, count, args.seed.wrapping_add(1))?;
        let outcome = calibrate(&block.samples, &blocked.samples, &adc)?;
        for warning in &outcome.warnings {
            eprintln!("warning: {warning}");
        }
        let path = resolve_out(calibration_out);
        fs::write(&path, pretty_json(&outcome.record)?)?;
        eprintln!(
            "calibration: QCNR = {:.4} dB, offset = {:.5} quantum units ({})",
            outcome.record.qcnr_db,
            outcome.record.delta_offset,
            path.display()
        );
    }
    Ok(())
}
