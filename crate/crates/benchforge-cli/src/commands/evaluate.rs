//! `evaluate`: score a benchmark under the ten-criterion framework. Criteria
//! whose inputs are absent become report warnings, never failures — one run
//! reports whatever the given inputs support.

use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;

use benchforge::evaluator::{
    bias_scan, boundary_error_rate, controllability, effectiveness, efficiency,
    judge_alignment, judge_faithfulness, knowledge_coverage, lexical_diversity, noise_fraction,
    report_markdown, robustness, rows_from_judgments, semantic_diversity, write_judgments,
    write_report, BiasCell, BiasScanResult, CorrectnessMatrix, Criterion, CriterionValue,
    EvaluatorError, JudgeCriterion, JudgeRecord, ReportBuilder,
};
use benchforge::io::{atomic_write, read_benchmark};

use super::classify_evaluator;
use crate::config::LoadedConfig;
use crate::{block_on, FailExt, Failure};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Benchmark to evaluate (JSONL)
    #[arg(long)]
    pub bench: PathBuf,
    /// Correctness records of models answering this benchmark (JSONL)
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Correctness records of the same models on a trusted reference
    #[arg(long, requires = "matrix")]
    pub reference: Option<PathBuf>,
    /// Correctness records of the same models on a perturbed variant
    #[arg(long, requires = "matrix")]
    pub variant: Option<PathBuf>,
    /// Run judge scoring (faithfulness and alignment)
    #[arg(long)]
    pub judge: bool,
    /// Hardest fraction of samples for the boundary error rate
    #[arg(long, default_value_t = 0.2)]
    pub fraction: f64,
    /// Configuration file (TOML)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report path (default: the benchmark path with `.report.json`)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Raw judge records path (default: the benchmark path with
    /// `.judgments.jsonl`)
    #[arg(long)]
    pub judgments_out: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> Result<(), Failure> {
    if !(args.fraction > 0.0 && args.fraction <= 1.0) {
        return Err(Failure::usage(anyhow!(
            "--fraction must be in (0, 1], got {}",
            args.fraction
        )));
    }
    let config = LoadedConfig::load(args.config.as_deref()).or_usage()?;
    let benchmark = read_benchmark(&args.bench).or_usage()?;

    let out_path = args
        .out
        .clone()
        .unwrap_or_else(|| args.bench.with_extension("report.json"));
    let judgments_path = args
        .judgments_out
        .clone()
        .unwrap_or_else(|| args.bench.with_extension("judgments.jsonl"));

    let mut builder = ReportBuilder::new(
        benchmark.generator_id.clone(),
        benchmark.demand.name.clone(),
        benchmark.samples.len(),
    );

    if args.judge {
        let templates = config.templates().or_usage()?;
        let built = config.judge_provider().or_usage()?;
        println!("judging with provider `{}`", built.name);
        let (parse_attempts, workers) = config.judge_knobs();
        let judged = block_on(async {
            let faith = judge_faithfulness(
                built.provider.as_ref(),
                &templates,
                &benchmark,
                parse_attempts,
                workers,
            )
            .await?;
            let align = judge_alignment(
                built.provider.as_ref(),
                &templates,
                &benchmark,
                parse_attempts,
                workers,
            )
            .await?;
            Ok::<_, EvaluatorError>((faith, align))
        })?;
        let (faith, align) = judged.map_err(classify_evaluator)?;

        builder = builder.with_noise_fraction(noise_fraction(&faith));
        set_mean(&mut builder, Criterion::Faithfulness, &faith);
        set_mean(&mut builder, Criterion::Alignment, &align);

        let mut records = faith.clone();
        records.extend(align);
        write_judgments(&judgments_path, &records).or_runtime()?;
        println!(
            "wrote {} judge records to {}",
            records.len(),
            judgments_path.display()
        );

        let rows = rows_from_judgments(&benchmark, &faith, JudgeCriterion::Faithfulness);
        if rows.len() >= 10 {
            print!("{}", render_scan(&bias_scan(&rows)));
        }
    } else {
        builder.warn("faithfulness skipped: judge scoring not requested (--judge)");
        builder.warn("alignment skipped: judge scoring not requested (--judge)");
    }

    set_or_warn(
        &mut builder,
        Criterion::LexicalDiversity,
        lexical_diversity(&benchmark),
    );

    match config.embed_provider().or_usage()? {
        Some(built) => {
            let value = block_on(semantic_diversity(
                built.provider.as_ref(),
                &benchmark,
                config.evaluator_workers(),
            ))?;
            set_or_warn(&mut builder, Criterion::SemanticDiversity, value);
        }
        None => builder.warn("semantic diversity skipped: no embedding provider configured"),
    }

    if let Some(matrix_path) = &args.matrix {
        let matrix = CorrectnessMatrix::read_jsonl(matrix_path).map_err(classify_evaluator)?;
        set_or_warn(
            &mut builder,
            Criterion::KnowledgeCoverage,
            knowledge_coverage(&matrix),
        );
        set_or_warn(
            &mut builder,
            Criterion::Controllability,
            controllability(&benchmark, &matrix),
        );
        set_or_warn(
            &mut builder,
            Criterion::Boundary,
            boundary_error_rate(&benchmark, &matrix, args.fraction),
        );
        match &args.reference {
            Some(path) => {
                let reference =
                    CorrectnessMatrix::read_jsonl(path).map_err(classify_evaluator)?;
                set_or_warn(
                    &mut builder,
                    Criterion::Effectiveness,
                    effectiveness(&matrix, &reference),
                );
            }
            None => builder.warn("effectiveness skipped: no reference matrix (--reference)"),
        }
        match &args.variant {
            Some(path) => {
                let variant = CorrectnessMatrix::read_jsonl(path).map_err(classify_evaluator)?;
                set_or_warn(
                    &mut builder,
                    Criterion::Robustness,
                    robustness(&matrix, &variant),
                );
            }
            None => builder.warn("robustness skipped: no variant matrix (--variant)"),
        }
    } else {
        builder.warn(
            "knowledge coverage, controllability, boundary, effectiveness, and robustness \
             skipped: no correctness matrix (--matrix)",
        );
    }

    set_or_warn(&mut builder, Criterion::Efficiency, efficiency(&benchmark));

    let report = builder.build();
    write_report(&out_path, &report).or_runtime()?;
    let markdown = report_markdown(std::slice::from_ref(&report));
    let markdown_path = out_path.with_extension("md");
    atomic_write(&markdown_path, markdown.as_bytes()).or_runtime()?;
    print!("{markdown}");
    println!(
        "report: {} and {}",
        out_path.display(),
        markdown_path.display()
    );
    Ok(())
}

/// Record a criterion, or the reason it could not be computed.
fn set_or_warn<V: Into<CriterionValue>>(
    builder: &mut ReportBuilder,
    criterion: Criterion,
    value: Result<V, EvaluatorError>,
) {
    match value {
        Ok(value) => builder
            .set(criterion, value)
            .expect("each criterion is set once"),
        Err(err) => builder.warn(format!("{} not computed: {err}", criterion.name())),
    }
}

/// Judge criteria report the mean of the per-sample scores.
fn set_mean(builder: &mut ReportBuilder, criterion: Criterion, records: &[JudgeRecord]) {
    if records.is_empty() {
        builder.warn(format!("{} produced no judgments", criterion.name()));
        return;
    }
    let mean = records.iter().map(|r| r.score).sum::<f64>() / records.len() as f64;
    builder
        .set(criterion, mean)
        .expect("each criterion is set once");
}

/// Plain-text view of a bias scan: the full correlation grid, then the
/// judge-length-controlled partials.
fn render_scan(result: &BiasScanResult) -> String {
    let mut out = String::from("bias scan over faithfulness judgments (Pearson r):\n");
    out.push_str(&format!("{:>15}", ""));
    for name in result.variables {
        out.push_str(&format!(" {name:>16}"));
    }
    out.push('\n');
    for (i, row) in result.raw.iter().enumerate() {
        out.push_str(&format!("{:>15}", result.variables[i]));
        for cell in row {
            out.push_str(&format!(" {:>16}", render_cell(cell)));
        }
        out.push('\n');
    }
    out.push_str("partials against score, judge analysis length held fixed:\n");
    for partial in &result.partials {
        out.push_str(&format!(
            "  {} (controlling {}): {}\n",
            partial.variable,
            partial.control,
            render_cell(&partial.cell)
        ));
    }
    out
}

fn render_cell(cell: &BiasCell) -> String {
    match cell {
        BiasCell::Value(corr) => format!("{:+.3} (p={:.3})", corr.r, corr.p_value),
        BiasCell::Degenerate(_) => "n/a".to_string(),
    }
}
