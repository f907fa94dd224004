//! `tables`: regenerate the optimized-entropy reference tables as CSV.
//!
//! Table I sweeps the average-case optimum over noise ratios for 8- and
//! 16-bit converters. Tables II and III sweep the worst-case optimum over
//! noise ratios and excursion multiples for the 8- and 16-bit converters
//! respectively. Rows with no classical noise leave the excursion cell empty
//! (the figure does not depend on it); rows with no quantum clearance have
//! zero entropy and no optimal range.

use crate::args::emit;
use clap::{Args, ValueEnum};
use qrng_entropy::{
    optimize_r_average, optimize_r_worst_case, optimized_report, ExcursionBound, NoiseModel,
    Result,
};
use std::path::PathBuf;

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Which {
    #[value(name = "I", alias = "1")]
    One,
    #[value(name = "II", alias = "2")]
    Two,
    #[value(name = "III", alias = "3")]
    Three,
}

#[derive(Args, Debug)]
pub struct TablesArgs {
    /// Which table to regenerate
    #[arg(long, value_enum, ignore_case = true)]
    which: Which,

    /// Output file (standard output when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

const QCNR_ROWS: [f64; 5] = [f64::INFINITY, 20.0, 10.0, 0.0, f64::NEG_INFINITY];
const K_ROWS: [f64; 4] = [5.0, 10.0, 15.0, 20.0];

fn table_average() -> Result<String> {
    let mut text = String::from("qcnr_db,n_bits,h_min_avg,optimal_r\n");
    for qcnr in QCNR_ROWS {
        for n_bits in [8u32, 16] {
            let model = NoiseModel::from_qcnr_db(qcnr)?;
            if qcnr == f64::NEG_INFINITY {
                let report =
                    optimized_report(&model, n_bits, &ExcursionBound::new(0.0, 0.0)?)?;
                text.push_str(&format!("{qcnr},{n_bits},{},\n", report.h_min_avg));
            } else {
                let got = optimize_r_average(&model, n_bits)?;
                text.push_str(&format!(
                    "{qcnr},{n_bits},{},{}\n",
                    got.achieved_entropy, got.optimal_r
                ));
            }
        }
    }
    Ok(text)
}

fn table_worst(n_bits: u32) -> Result<String> {
    let mut text = String::from("qcnr_db,k_sigma,h_min_worst,optimal_r\n");
    for qcnr in QCNR_ROWS {
        let model = NoiseModel::from_qcnr_db(qcnr)?;
        if qcnr == f64::NEG_INFINITY {
            let report = optimized_report(&model, n_bits, &ExcursionBound::new(0.0, 0.0)?)?;
            text.push_str(&format!("{qcnr},,{},\n", report.h_min_worst));
        } else if qcnr == f64::INFINITY {
            let got =
                optimize_r_worst_case(&model, n_bits, &ExcursionBound::new(K_ROWS[0], 0.0)?)?;
            text.push_str(&format!("{qcnr},,{},{}\n", got.achieved_entropy, got.optimal_r));
        } else {
            for k in K_ROWS {
                let got = optimize_r_worst_case(&model, n_bits, &ExcursionBound::new(k, 0.0)?)?;
                text.push_str(&format!(
                    "{qcnr},{k},{},{}\n",
                    got.achieved_entropy, got.optimal_r
                ));
            }
        }
    }
    Ok(text)
}

pub fn run(args: &TablesArgs) -> Result<()> {
    let text = match args.which {
        Which::One => table_average()?,
        Which::Two => table_worst(8)?,
        Which::Three => table_worst(16)?,
    };
    emit(args.out.as_deref(), &text)?;
    Ok(())
}
