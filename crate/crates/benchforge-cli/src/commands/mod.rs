//! Subcommand implementations. Each module owns its flag surface and a
//! `run` returning `Result<(), Failure>`; the dispatcher maps that to an
//! exit code.

pub mod convert;
pub mod debias;
pub mod evaluate;
pub mod generate;
pub mod reliability;
pub mod rewrite;

use std::path::Path;

use anyhow::anyhow;
use benchforge::evaluator::EvaluatorError;
use benchforge::generator::GeneratorError;
use benchforge::types::AssessmentDemand;

use crate::Failure;

/// Generation errors: a bad configuration is the user's to fix; everything
/// else is the pipeline failing at runtime.
pub(crate) fn classify_generator(err: GeneratorError) -> Failure {
    match &err {
        GeneratorError::Config(_) => Failure::usage(err),
        _ => Failure::runtime(err),
    }
}

/// Evaluator errors: malformed inputs (bad flags, unreadable or inconsistent
/// record files) are usage errors; provider and judging trouble is runtime.
pub(crate) fn classify_evaluator(err: EvaluatorError) -> Failure {
    match &err {
        EvaluatorError::Input(_) | EvaluatorError::Matrix(_) => Failure::usage(err),
        _ => Failure::runtime(err),
    }
}

/// Pick the demand block to use: the named subset, or the sole block.
pub(crate) fn select_demand(
    demands: Vec<AssessmentDemand>,
    subset: Option<&str>,
    path: &Path,
) -> Result<AssessmentDemand, Failure> {
    let names = || {
        demands
            .iter()
            .map(|d| d.name.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    };
    match subset {
        Some(name) => {
            let listed = names();
            demands
                .into_iter()
                .find(|d| d.name == name)
                .ok_or_else(|| {
                    Failure::usage(anyhow!(
                        "{} has no subset `{name}` (has: {listed})",
                        path.display()
                    ))
                })
        }
        None if demands.len() == 1 => Ok(demands.into_iter().next().expect("one block")),
        None => Err(Failure::usage(anyhow!(
            "{} holds {} demand subsets ({}); pick one with --subset",
            path.display(),
            demands.len(),
            names()
        ))),
    }
}
