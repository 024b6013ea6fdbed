//! `generate`: synthesize a benchmark from an assessment demand and write it
//! as JSONL, with a difficulty and cost summary on stdout.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use benchforge::evaluator::efficiency;
use benchforge::generator::{
    generate_benchmark, generate_direct, GenerationOutcome, GeneratorError, Resolution,
};
use benchforge::io::{read_demands, write_benchmark};

use super::{classify_generator, select_demand};
use crate::config::LoadedConfig;
use crate::{block_on, FailExt, Failure};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Demand file: `Subset Name:` / `Assessment Demands:` blocks
    #[arg(long)]
    pub demand: PathBuf,
    /// Number of samples to synthesize
    #[arg(long)]
    pub n: usize,
    /// Output benchmark path (JSONL)
    #[arg(long)]
    pub out: PathBuf,
    /// Generation seed (overrides the config file)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Configuration file (TOML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Which pipeline to run
    #[arg(long, value_enum, default_value_t = Mode::Staged)]
    pub mode: Mode,
    /// Demand subset to use when the file holds several
    #[arg(long)]
    pub subset: Option<String>,
    /// Options per sample (overrides the config file)
    #[arg(long)]
    pub options: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Staged pipeline: attributes, strategies, estimated difficulty,
    /// reference diffusion, diversity boosting
    Staged,
    /// Single-prompt baseline with declared difficulty levels
    Direct,
}

pub fn run(args: &GenerateArgs) -> Result<(), Failure> {
    let config = LoadedConfig::load(args.config.as_deref()).or_usage()?;
    let option_count = config.option_count(args.options);
    let demands = read_demands(&args.demand, option_count).or_usage()?;
    let demand = select_demand(demands, args.subset.as_deref(), &args.demand)?;
    let templates = config.templates().or_usage()?;
    let built = config.generator_provider().or_usage()?;
    let generator_config = config
        .generator_config(args.n, args.seed, built.is_mock)
        .or_usage()?;

    let result = block_on(async {
        match args.mode {
            Mode::Staged => {
                generate_benchmark(built.provider.as_ref(), &templates, &demand, &generator_config)
                    .await
            }
            Mode::Direct => {
                generate_direct(built.provider.as_ref(), &templates, &demand, &generator_config)
                    .await
            }
        }
    })?;
    let outcome = match result {
        Ok(outcome) => outcome,
        Err(err) => return Err(pipeline_failure(err, &args.out)),
    };

    write_benchmark(&outcome.benchmark, &args.out).or_runtime()?;
    print_summary(&outcome, &args.out);
    Ok(())
}

/// A failed pipeline leaves its error chain in `<out>.failure.log` so a long
/// unattended run still tells its story.
fn pipeline_failure(err: GeneratorError, out: &Path) -> Failure {
    if matches!(err, GeneratorError::Config(_)) {
        return classify_generator(err);
    }
    let error = anyhow::Error::new(err);
    let log_path = out.with_extension("failure.log");
    match std::fs::write(&log_path, format!("{error:#}\n")) {
        Ok(()) => Failure::Runtime(error.context(format!(
            "generation failed (details in {})",
            log_path.display()
        ))),
        Err(_) => Failure::Runtime(error.context("generation failed")),
    }
}

fn print_summary(outcome: &GenerationOutcome, out: &Path) {
    let benchmark = &outcome.benchmark;
    println!(
        "wrote {} samples to {}",
        benchmark.samples.len(),
        out.display()
    );
    println!("generator: {}", benchmark.generator_id);

    let usage = &benchmark.usage;
    println!(
        "usage: {} prompt + {} completion tokens, ${:.4}{}",
        usage.prompt_tokens,
        usage.completion_tokens,
        usage.dollars,
        if usage.estimated { " (estimated)" } else { "" }
    );
    if let Ok(per_item) = efficiency(benchmark) {
        println!(
            "cost: ${:.4} and {:.2} min per item",
            per_item.dollars_per_item, per_item.minutes_per_item
        );
    }

    let labels: Vec<f64> = benchmark
        .samples
        .iter()
        .filter_map(|s| s.difficulty_label)
        .collect();
    if !labels.is_empty() {
        let mean = labels.iter().sum::<f64>() / labels.len() as f64;
        let min = labels.iter().copied().fold(f64::INFINITY, f64::min);
        let max = labels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("difficulty: mean {mean:.3}, min {min:.3}, max {max:.3}");
        let mut bins = [0usize; 5];
        for &label in &labels {
            bins[(((label * 5.0).floor()) as usize).min(4)] += 1;
        }
        println!(
            "difficulty spread: [0.0-0.2) {} | [0.2-0.4) {} | [0.4-0.6) {} | [0.6-0.8) {} | [0.8-1.0] {}",
            bins[0], bins[1], bins[2], bins[3], bins[4]
        );
    }

    let arbitrated = outcome
        .verdicts
        .iter()
        .filter(|v| matches!(v.resolved_by, Resolution::ContrastiveJudge))
        .count();
    println!(
        "conflict reviews: {} samples checked, {} arbitrated",
        outcome.verdicts.len(),
        arbitrated
    );
    if outcome.failed_slots > 0 {
        println!("failed slots: {}", outcome.failed_slots);
    }
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
}
