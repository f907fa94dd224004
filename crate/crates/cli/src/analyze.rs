//! `analyze`: every entropy figure for one noise model at one converter
//! range, as a flat JSON object or a CSV row.

use crate::args::{emit, pretty_json, Basis, BoundArgs, ModelArgs, ReportFormat};
use clap::Args;
use qrng_entropy::{
    optimize_r_average, optimize_r_worst_case, AdcConfig, EntropyReport, Result,
};
use std::path::PathBuf;

#[derive(Args, Debug)]
#[group(id = "range", required = true, multiple = false)]
pub struct RangeArgs {
    /// Converter full-scale range in quantum-noise units
    #[arg(long)]
    pub r: Option<f64>,

    /// Choose the range by running the optimizer for the --mode figure first
    #[arg(long)]
    pub auto: bool,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Converter resolution in bits
    #[arg(long)]
    bits: u32,

    #[command(flatten)]
    range: RangeArgs,

    /// Figure the --auto range optimizes; the report always carries both
    #[arg(long, value_enum, default_value_t = Basis::Average)]
    mode: Basis,

    #[command(flatten)]
    bound: BoundArgs,

    /// Report layout
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,

    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: &AnalyzeArgs) -> Result<()> {
    let model = args.model.build()?;
    let bound = args.bound.build(&model)?;
    let r = match args.range.r {
        Some(r) => r,
        None => match args.mode {
            Basis::Worst => optimize_r_worst_case(&model, args.bits, &bound)?.optimal_r,
            Basis::Average => optimize_r_average(&model, args.bits)?.optimal_r,
        },
    };
    let adc = AdcConfig::new(args.bits, r)?;
    let report = EntropyReport::at_fixed_r(&model, &adc, &bound)?;
    let text = match args.format {
        ReportFormat::Json => pretty_json(&report)?,
        ReportFormat::Csv => format!("{}\n{}\n", EntropyReport::CSV_HEADER, report.to_csv_row()),
    };
    emit(args.out.as_deref(), &text)?;
    eprintln!(
        "h_min_worst = {:.4} bits, h_min_avg = {:.4} bits at R = {} over {} bits",
        report.h_min_worst, report.h_min_avg, r, args.bits
    );
    Ok(())
}
