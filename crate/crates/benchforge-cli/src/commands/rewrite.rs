//! `rewrite-demand`: expand a terse assessment demand into the detailed,
//! generation-ready form, using the configured generator provider.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;

use benchforge::generator::rewrite_demand;
use benchforge::io::{atomic_write, read_demands};

use super::{classify_generator, select_demand};
use crate::config::LoadedConfig;
use crate::{block_on, FailExt, Failure};

#[derive(Debug, Args)]
pub struct RewriteDemandArgs {
    /// Demand text given inline
    #[arg(long, conflicts_with = "demand")]
    pub text: Option<String>,
    /// Demand file to pull the text from
    #[arg(long)]
    pub demand: Option<PathBuf>,
    /// Demand subset to use when the file holds several
    #[arg(long)]
    pub subset: Option<String>,
    /// Configuration file (TOML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the rewrite here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &RewriteDemandArgs) -> Result<(), Failure> {
    let config = LoadedConfig::load(args.config.as_deref()).or_usage()?;
    let text = match (&args.text, &args.demand) {
        (Some(text), None) => text.clone(),
        (None, Some(path)) => {
            let demands = read_demands(path, config.option_count(None)).or_usage()?;
            select_demand(demands, args.subset.as_deref(), path)?.text
        }
        _ => {
            return Err(Failure::usage(anyhow!(
                "provide the demand as --text or --demand <file>"
            )))
        }
    };

    let templates = config.templates().or_usage()?;
    let built = config.generator_provider().or_usage()?;
    let rewritten = block_on(rewrite_demand(built.provider.as_ref(), &templates, &text))?
        .map_err(classify_generator)?;

    match &args.out {
        Some(path) => {
            atomic_write(path, format!("{rewritten}\n").as_bytes()).or_runtime()?;
            println!("wrote rewritten demand to {}", path.display());
        }
        None => println!("{rewritten}"),
    }
    Ok(())
}
