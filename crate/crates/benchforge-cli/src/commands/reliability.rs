//! `reliability`: decide whether an observed accuracy gap between two models
//! reflects a real ranking once benchmark answer noise is priced in, with an
//! optional Monte-Carlo self-check of the reported confidence.

use clap::Args;

use benchforge::reliability::{
    rank_test, validate_by_simulation, RankTestInput, SimulationParams,
};

use crate::{FailExt, Failure};

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    /// Observed accuracy of model A on the benchmark
    #[arg(long)]
    pub acc_a: f64,
    /// Observed accuracy of model B on the same benchmark
    #[arg(long)]
    pub acc_b: f64,
    /// Number of benchmark items both models answered
    #[arg(long)]
    pub n: usize,
    /// Fraction of items whose recorded answer is wrong
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,
    /// Chance of guessing a noisy item right (e.g. 0.25 for four options);
    /// enables denoised accuracy estimates
    #[arg(long)]
    pub p: Option<f64>,
    /// Guess rate for model B in the simulation, when it differs from --p
    #[arg(long)]
    pub p_b: Option<f64>,
    /// Cross-check the confidence by simulating this many noisy benchmarks
    #[arg(long)]
    pub simulate: Option<u32>,
    /// Simulation seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: &ReliabilityArgs) -> Result<(), Failure> {
    let input = RankTestInput {
        acc_a: args.acc_a,
        acc_b: args.acc_b,
        n: args.n,
        k: args.k,
        p: args.p,
    };
    let result = rank_test(&input).or_usage()?;

    println!("z = {:.6}", result.z);
    if args.acc_a == args.acc_b {
        println!("the accuracies are equal; either ranking is a coin flip");
    } else {
        let (winner, loser) = if args.acc_a > args.acc_b {
            ("A", "B")
        } else {
            ("B", "A")
        };
        println!(
            "confidence that {winner} truly outranks {loser}: {:.4}",
            result.confidence
        );
    }
    println!("p-value of the gap arising by chance: {:.6}", result.p_value);
    if let (Some(denoised_a), Some(denoised_b)) = (result.denoised_a, result.denoised_b) {
        println!("denoised accuracy: A {denoised_a:.4}, B {denoised_b:.4}");
    }

    if let Some(trials) = args.simulate {
        let p_a = args.p.unwrap_or(0.25);
        if args.p.is_none() {
            println!("note: no guess rate given; simulating with p = 0.25");
        }
        let params = SimulationParams {
            true_a: args.acc_a,
            true_b: args.acc_b,
            n: args.n,
            k: args.k,
            p_a,
            p_b: args.p_b.unwrap_or(p_a),
            trials,
            seed: args.seed,
        };
        let outcome = validate_by_simulation(&params).or_usage()?;
        println!("simulated {} noisy benchmarks:", outcome.trials);
        println!(
            "  observed rank accuracy:    {:.4}",
            outcome.empirical_rank_accuracy
        );
        println!(
            "  mean predicted confidence: {:.4}",
            outcome.mean_predicted_confidence
        );
        println!(
            "  gap:                       {:+.4}",
            outcome.empirical_rank_accuracy - outcome.mean_predicted_confidence
        );
    }
    Ok(())
}
