//! `optimize`: solve for the entropy-maximizing converter range, either at a
//! single operating point or swept along one axis into a CSV table.

use crate::args::{emit, pretty_json, Basis, BoundArgs, OptionalModelArgs, ReportFormat};
use clap::Args;
use qrng_entropy::{
    optimize_r_average, optimize_r_worst_case, AdcConfig, EntropyReport, Error, NoiseModel,
    OptimizationResult, Result,
};
use serde::Serialize;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    model: OptionalModelArgs,

    /// Converter resolution in bits (not needed when sweeping the bits axis)
    #[arg(long)]
    bits: Option<u32>,

    /// Which entropy figure to maximize
    #[arg(long, value_enum)]
    mode: Basis,

    #[command(flatten)]
    bound: BoundArgs,

    /// Sweep one axis instead of solving a single point: an axis name
    /// (`bits` or `qcnr`) and an inclusive grid `LO..HI[:STEP]`; emits CSV
    #[arg(long, num_args = 2, value_names = ["AXIS", "GRID"], allow_hyphen_values = true)]
    sweep: Option<Vec<String>>,

    /// Single-point report layout (sweeps are always CSV)
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,

    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SinglePoint {
    optimization: OptimizationResult,
    report: EntropyReport,
}

pub fn run(args: &OptimizeArgs) -> Result<()> {
    match &args.sweep {
        Some(axis_and_grid) => sweep(args, &axis_and_grid[0], &axis_and_grid[1]),
        None => single_point(args),
    }
}

fn optimize_once(
    model: &NoiseModel,
    bits: u32,
    mode: Basis,
    bound_args: &BoundArgs,
) -> Result<OptimizationResult> {
    match mode {
        Basis::Worst => optimize_r_worst_case(model, bits, &bound_args.build(model)?),
        Basis::Average => optimize_r_average(model, bits),
    }
}

fn require_bits(args: &OptimizeArgs) -> Result<u32> {
    args.bits.ok_or_else(|| Error::InvalidConfig("--bits is required here".into()))
}

fn require_model(args: &OptimizeArgs) -> Result<NoiseModel> {
    if !args.model.given() {
        return Err(Error::InvalidConfig("provide --qcnr or --sigma-e".into()));
    }
    args.model.build()
}

fn single_point(args: &OptimizeArgs) -> Result<()> {
    let bits = require_bits(args)?;
    let model = require_model(args)?;
    let optimization = optimize_once(&model, bits, args.mode, &args.bound)?;
    let adc = AdcConfig::new(bits, optimization.optimal_r)?;
    let mut report = EntropyReport::at_fixed_r(&model, &adc, &args.bound.build(&model)?)?;
    match args.mode {
        Basis::Worst => report.optimal_r_avg = None,
        Basis::Average => report.optimal_r_worst = None,
    }
    let text = match args.format {
        ReportFormat::Json => pretty_json(&SinglePoint { optimization, report })?,
        ReportFormat::Csv => format!("{}\n{}\n", EntropyReport::CSV_HEADER, report.to_csv_row()),
    };
    emit(args.out.as_deref(), &text)?;
    eprintln!(
        "optimal R = {:.6} with {} = {:.4} bits ({} iterations, residual {:.2e})",
        optimization.optimal_r,
        match args.mode {
            Basis::Worst => "h_min_worst",
            Basis::Average => "h_min_avg",
        },
        optimization.achieved_entropy,
        optimization.iterations,
        optimization.residual,
    );
    Ok(())
}

const SWEEP_HEADER: &str =
    "mode,n_bits,qcnr_db,sigma_e,delta_offset,k_sigma,delta_max,h_min,h_per_bit,optimal_r,\
     residual,iterations";

enum Axis {
    Bits(Vec<u32>),
    Qcnr(Vec<f64>),
}

fn parse_grid(axis: &str, grid: &str) -> Result<Axis> {
    let bad = |msg: String| Error::InvalidConfig(msg);
    let (span, step) = match grid.split_once(':') {
        Some((span, step)) => (span, Some(step)),
        None => (grid, None),
    };
    let (lo, hi) = span
        .split_once("..")
        .ok_or_else(|| bad(format!("grid `{grid}` is not of the form LO..HI[:STEP]")))?;
    match axis {
        "bits" => {
            let lo: u32 = lo.parse().map_err(|_| bad(format!("`{lo}` is not a bit count")))?;
            let hi: u32 = hi.parse().map_err(|_| bad(format!("`{hi}` is not a bit count")))?;
            let step: u32 = match step {
                Some(s) => s.parse().map_err(|_| bad(format!("`{s}` is not a step")))?,
                None => 1,
            };
            if step == 0 || lo > hi {
                return Err(bad(format!("grid `{grid}` is empty or has a zero step")));
            }
            Ok(Axis::Bits((lo..=hi).step_by(step as usize).collect()))
        }
        "qcnr" => {
            let lo: f64 = crate::args::ext_real(lo).map_err(bad)?;
            let hi: f64 = crate::args::ext_real(hi).map_err(bad)?;
            let step: f64 = match step {
                Some(s) => crate::args::ext_real(s).map_err(bad)?,
                None => 1.0,
            };
            if step <= 0.0 || !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(bad(format!("grid `{grid}` must be finite, ordered, step > 0")));
            }
            let count = ((hi - lo) / step).round() as usize;
            let mut points: Vec<f64> = (0..=count)
                .map(|i| lo + i as f64 * step)
                .filter(|&q| q <= hi + 1e-9 * step)
                .collect();
            if points.is_empty() {
                points.push(lo);
            }
            Ok(Axis::Qcnr(points))
        }
        other => Err(bad(format!("unknown sweep axis `{other}` (expected `bits` or `qcnr`)"))),
    }
}

struct SweepPoint {
    model: NoiseModel,
    bits: u32,
}

fn sweep(args: &OptimizeArgs, axis: &str, grid: &str) -> Result<()> {
    let points: Vec<SweepPoint> = match parse_grid(axis, grid)? {
        Axis::Bits(grid) => {
            if args.bits.is_some() {
                eprintln!("note: --bits is ignored while sweeping the bits axis");
            }
            let model = require_model(args)?;
            grid.into_iter().map(|bits| SweepPoint { model, bits }).collect()
        }
        Axis::Qcnr(grid) => {
            let bits = require_bits(args)?;
            if args.model.given() {
                eprintln!("note: the noise flags are ignored while sweeping qcnr");
            }
            grid.into_iter()
                .map(|q| {
                    Ok(SweepPoint {
                        model: NoiseModel::from_qcnr_db(q)?.with_offset(args.model.offset)?,
                        bits,
                    })
                })
                .collect::<Result<_>>()?
        }
    };

    let workers = thread::available_parallelism().map_or(1, |p| p.get()).min(points.len().max(1));
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<String>)>();
    thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let points = &points;
            let mode = args.mode;
            let bound = &args.bound;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(point) = points.get(i) else { break };
                if tx.send((i, sweep_row(&point.model, point.bits, mode, bound))).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut rows: Vec<Option<Result<String>>> = Vec::new();
    rows.resize_with(points.len(), || None);
    for (i, row) in rx {
        rows[i] = Some(row);
    }

    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for row in rows {
        text.push_str(&row.expect("every grid point was claimed by a worker")?);
        text.push('\n');
    }
    emit(args.out.as_deref(), &text)?;
    eprintln!("swept {axis} over {grid}: {} points", points.len());
    Ok(())
}

fn sweep_row(model: &NoiseModel, bits: u32, mode: Basis, bound_args: &BoundArgs) -> Result<String> {
    let got = optimize_once(model, bits, mode, bound_args)?;
    let bound = bound_args.build(model)?;
    Ok(format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        mode.label(),
        bits,
        model.qcnr_db(),
        model.sigma_e(),
        model.delta_offset(),
        bound.k_sigma(),
        bound.delta_max(),
        got.achieved_entropy,
        got.achieved_entropy / f64::from(bits),
        got.optimal_r,
        got.residual,
        got.iterations,
    ))
}
