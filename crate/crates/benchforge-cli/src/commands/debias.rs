//! `debias`: pool judge records from one or more evaluation runs and fit
//! per-generator scores with the judge's verbosity bias removed.

use std::path::PathBuf;

use clap::{Args, ValueEnum};

use benchforge::evaluator::{calibrate_against, debias_scores, read_judgments, JudgeCriterion};

use crate::{FailExt, Failure};

#[derive(Debug, Args)]
pub struct DebiasArgs {
    /// Judgment file from an evaluation run (repeat to pool several)
    #[arg(long, required = true)]
    pub judgments: Vec<PathBuf>,
    /// Which judged criterion to fit
    #[arg(long, value_enum, default_value_t = CriterionChoice::Faithfulness)]
    pub criterion: CriterionChoice,
    /// Rescale the fitted scores so this generator sits at 1.0
    #[arg(long)]
    pub calibrate_to: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionChoice {
    Faithfulness,
    Alignment,
}

impl CriterionChoice {
    fn to_judge(self) -> JudgeCriterion {
        match self {
            Self::Faithfulness => JudgeCriterion::Faithfulness,
            Self::Alignment => JudgeCriterion::Alignment,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Self::Faithfulness => "faithfulness",
            Self::Alignment => "alignment",
        }
    }
}

pub fn run(args: &DebiasArgs) -> Result<(), Failure> {
    let mut records = Vec::new();
    for path in &args.judgments {
        records.extend(read_judgments(path).or_usage()?);
    }

    // Thin or one-sided data is a property of the judgments, not the
    // invocation: report it as a runtime failure.
    let result = debias_scores(&records, args.criterion.to_judge()).or_runtime()?;

    println!(
        "debiased {} scores over {} generators:",
        args.criterion.label(),
        result.scores.len()
    );
    for (generator, score) in &result.scores {
        println!("  {generator:<24} {score:+.4}");
    }
    if result.fallback {
        println!("note: analysis lengths carried no variation; scores are raw per-generator means");
    } else {
        println!(
            "judge-length coefficient: {:+.6} per token (p = {:.4})",
            result.length_coefficient, result.length_p_value
        );
    }

    if let Some(reference) = &args.calibrate_to {
        let calibrated = calibrate_against(&result, reference).or_usage()?;
        println!("calibrated against `{reference}` (= 1.0):");
        for (generator, score) in &calibrated {
            println!("  {generator:<24} {score:+.4}");
        }
    }
    Ok(())
}
