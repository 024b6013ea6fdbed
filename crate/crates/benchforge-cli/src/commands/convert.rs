//! `convert`: reshape a benchmark into another assessment format. Invalid
//! samples are skipped with a note; the run fails only when nothing at all
//! could be converted.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, ValueEnum};

use benchforge::io::{read_benchmark, write_jsonl_records};
use benchforge::types::mcq_to_otg;

use crate::{FailExt, Failure};

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Benchmark to convert (JSONL)
    #[arg(long)]
    pub bench: PathBuf,
    /// Target format
    #[arg(long, value_enum)]
    pub to: Format,
    /// Output path (JSONL)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Open-text generation: options hidden, rationale kept as the
    /// reference solution
    Otg,
}

pub fn run(args: &ConvertArgs) -> Result<(), Failure> {
    let benchmark = read_benchmark(&args.bench).or_usage()?;
    let total = benchmark.samples.len();

    let Format::Otg = args.to;
    let mut items = Vec::with_capacity(total);
    for sample in &benchmark.samples {
        match mcq_to_otg(sample) {
            Ok(item) => items.push(item),
            Err(err) => eprintln!("skipping: {err}"),
        }
    }

    write_jsonl_records(&args.out, &items).or_runtime()?;
    println!(
        "converted {} of {total} samples to {}",
        items.len(),
        args.out.display()
    );
    if total > 0 && items.is_empty() {
        return Err(Failure::runtime(anyhow!(
            "no sample survived conversion; every one failed validation"
        )));
    }
    Ok(())
}
