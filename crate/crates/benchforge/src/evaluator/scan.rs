//! Bias scan: do judge scores track anything other than quality?
//!
//! Crosses sample difficulty, sample length, judge analysis length, and judge
//! score in a full correlation grid, then adds the two partial correlations
//! that matter: difficulty and sample length against the score with the
//! judge's analysis length held fixed. A raw difficulty–score or length–score
//! correlation cannot tell a real quality signal from one carried by judge
//! verbosity; if the relation survives the judge-length control it belongs to
//! the sample, and if it vanishes the judge's own wordiness was carrying it.

use serde::Serialize;

use crate::evaluator::judge::{JudgeCriterion, JudgeRecord};
use crate::stats::{partial_correlation, pearson, tokenize, CorrelationResult, StatsError};
use crate::types::Benchmark;

/// Variables crossed by the scan, in grid order.
pub const VARIABLES: [&str; 4] = ["difficulty", "sample_length", "judge_length", "score"];

/// One judged sample flattened to the scanned variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasScanRow {
    /// Estimated difficulty (miss fraction) of the sample.
    pub difficulty: f64,
    /// Tokens in the sample's question and options.
    pub sample_length: f64,
    /// Tokens of judge analysis behind the score.
    pub judge_length: f64,
    /// The judge's score for the sample.
    pub score: f64,
}

/// One grid entry: a correlation, or the reason it does not exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasCell {
    Value(CorrelationResult),
    Degenerate(String),
}

/// A partial correlation against the score with a named control held fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialCell {
    pub variable: &'static str,
    pub control: &'static str,
    pub cell: BiasCell,
}

/// Full scan output: the raw grid plus judge-length-controlled partials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasScanResult {
    /// Row/column labels of `raw`, in order.
    pub variables: [&'static str; 4],
    /// `raw[i][j]` correlates `variables[i]` with `variables[j]`.
    pub raw: Vec<Vec<BiasCell>>,
    /// Difficulty and sample-length correlations with the score, judge
    /// analysis length partialled out.
    pub partials: Vec<PartialCell>,
}

fn cell(result: Result<CorrelationResult, StatsError>) -> BiasCell {
    match result {
        Ok(value) => BiasCell::Value(value),
        Err(e) => BiasCell::Degenerate(e.to_string()),
    }
}

/// Cross every variable pair, then partial difficulty and sample length
/// against the score with judge analysis length controlled. Degenerate pairs
/// (constant columns, too few rows) become labeled cells rather than
/// failures, so one flat region cannot hide the rest of the scan.
pub fn bias_scan(rows: &[BiasScanRow]) -> BiasScanResult {
    let columns: [Vec<f64>; 4] = [
        rows.iter().map(|r| r.difficulty).collect(),
        rows.iter().map(|r| r.sample_length).collect(),
        rows.iter().map(|r| r.judge_length).collect(),
        rows.iter().map(|r| r.score).collect(),
    ];
    let raw = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| cell(pearson(&columns[i], &columns[j])))
                .collect()
        })
        .collect();
    let partials = vec![
        PartialCell {
            variable: VARIABLES[0],
            control: VARIABLES[2],
            cell: cell(partial_correlation(&columns[0], &columns[3], &columns[2])),
        },
        PartialCell {
            variable: VARIABLES[1],
            control: VARIABLES[2],
            cell: cell(partial_correlation(&columns[1], &columns[3], &columns[2])),
        },
    ];
    BiasScanResult {
        variables: VARIABLES,
        raw,
        partials,
    }
}

/// Pair judged scores with their samples' difficulty and length.
///
/// Samples without a difficulty estimate, and records without a matching
/// sample, are skipped — the scan runs on whatever rows remain.
pub fn rows_from_judgments(
    benchmark: &Benchmark,
    records: &[JudgeRecord],
    criterion: JudgeCriterion,
) -> Vec<BiasScanRow> {
    records
        .iter()
        .filter(|r| r.criterion == criterion)
        .filter_map(|r| {
            let sample = benchmark.samples.iter().find(|s| s.id == r.sample_id)?;
            let difficulty = sample.difficulty_label?;
            let text = crate::generator::sample_text(sample);
            Some(BiasScanRow {
                difficulty,
                sample_length: tokenize(&text).len() as f64,
                judge_length: r.rationale_length as f64,
                score: r.score,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// n = 8 rows where the score depends on judge_length alone plus a
    /// wiggle: judge_length tracks difficulty except for `e`, the score is
    /// 100 − judge_length + `f`, and e ⊥ f ⊥ {1, difficulty}. Every raw
    /// correlation with the score is strong, but once judge_length is
    /// controlled the score residual is exactly `f`, orthogonal to
    /// everything else.
    fn planted_rows() -> Vec<BiasScanRow> {
        let e = [1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0];
        let f = [1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0];
        (0..8)
            .map(|i| {
                let d = (i + 1) as f64;
                let judge_length = 6.0 * d + e[i];
                BiasScanRow {
                    difficulty: d,
                    sample_length: 2.0 * d,
                    judge_length,
                    score: 100.0 - judge_length + f[i],
                }
            })
            .collect()
    }

    fn r_of(cell: &BiasCell) -> f64 {
        match cell {
            BiasCell::Value(v) => v.r,
            BiasCell::Degenerate(m) => panic!("degenerate cell: {m}"),
        }
    }

    fn p_of(cell: &BiasCell) -> f64 {
        match cell {
            BiasCell::Value(v) => v.p_value,
            BiasCell::Degenerate(m) => panic!("degenerate cell: {m}"),
        }
    }

    #[test]
    fn raw_grid_is_symmetric_with_unit_diagonal() {
        let result = bias_scan(&planted_rows());
        assert_eq!(result.variables, VARIABLES);
        assert_eq!(result.raw.len(), 4);
        for i in 0..4 {
            assert_eq!(result.raw[i].len(), 4);
            assert!((r_of(&result.raw[i][i]) - 1.0).abs() < 1e-12);
            for j in 0..4 {
                assert!((r_of(&result.raw[i][j]) - r_of(&result.raw[j][i])).abs() < 1e-12);
            }
        }
        // sample_length is exactly linear in difficulty.
        assert!((r_of(&result.raw[0][1]) - 1.0).abs() < 1e-12);
        // Raw difficulty-score and length-score correlations all look like
        // strong effects before the judge-length control is applied.
        assert!(r_of(&result.raw[0][3]) < -0.99);
        assert!(r_of(&result.raw[1][3]) < -0.99);
        assert!(r_of(&result.raw[2][3]) < -0.99);
    }

    #[test]
    fn judge_length_control_removes_the_spurious_correlations() {
        let result = bias_scan(&planted_rows());
        assert_eq!(result.partials.len(), 2);

        // Controlling judge_length leaves the score residual equal to the
        // wiggle f, which was built orthogonal to difficulty, sample_length,
        // and e — so both partials vanish despite raw |r| > 0.99.
        let difficulty = &result.partials[0];
        assert_eq!(difficulty.variable, "difficulty");
        assert_eq!(difficulty.control, "judge_length");
        assert!(r_of(&difficulty.cell).abs() < 1e-9, "{:?}", difficulty.cell);
        assert!(p_of(&difficulty.cell) > 0.9);

        let sample = &result.partials[1];
        assert_eq!(sample.variable, "sample_length");
        assert_eq!(sample.control, "judge_length");
        assert!(r_of(&sample.cell).abs() < 1e-9, "{:?}", sample.cell);
        assert!(p_of(&sample.cell) > 0.9);
    }

    #[test]
    fn variable_explained_by_the_control_degrades_to_a_marker() {
        // sample_length coincides with judge_length exactly, so its residual
        // on the control is the zero vector; difficulty is quadratic in the
        // control and keeps a real partial.
        let e = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let rows: Vec<BiasScanRow> = (0..6)
            .map(|i| {
                let length = 10.0 + 2.0 * i as f64;
                BiasScanRow {
                    difficulty: (i * i) as f64,
                    sample_length: length,
                    judge_length: length,
                    score: 50.0 - i as f64 + e[i],
                }
            })
            .collect();
        let result = bias_scan(&rows);
        match &result.partials[1].cell {
            BiasCell::Degenerate(m) => assert!(m.contains("fully explained"), "{m}"),
            BiasCell::Value(v) => panic!("expected degenerate cell, got {v:?}"),
        }
        assert!(matches!(result.partials[0].cell, BiasCell::Value(_)));
    }

    #[test]
    fn constant_columns_degrade_only_their_own_cells() {
        let rows: Vec<BiasScanRow> = (0..6)
            .map(|i| BiasScanRow {
                difficulty: i as f64,
                sample_length: 7.0, // constant
                judge_length: (i * i) as f64,
                score: 5.0 - i as f64,
            })
            .collect();
        let result = bias_scan(&rows);
        // Cells touching sample_length are degenerate...
        for k in 0..4 {
            if k == 1 {
                continue;
            }
            assert!(matches!(result.raw[1][k], BiasCell::Degenerate(_)));
            assert!(matches!(result.raw[k][1], BiasCell::Degenerate(_)));
        }
        // ...including its own diagonal, while the rest of the grid survives.
        assert!(matches!(result.raw[1][1], BiasCell::Degenerate(_)));
        assert!((r_of(&result.raw[0][3]) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_pair_judgments_with_their_samples() {
        use crate::types::{AssessmentDemand, Sample, UsageMeter};
        use chrono::{TimeZone, Utc};

        let mut with_difficulty = Sample::new(
            "s1",
            "How many sides does a hexagon have?",
            "Six.",
            vec!["five".into(), "six".into()],
            1,
        );
        with_difficulty.difficulty_label = Some(0.3);
        let without_difficulty = Sample::new(
            "s2",
            "Count the vowels in 'queue'.",
            "Four.",
            vec!["three".into(), "four".into()],
            1,
        );
        let benchmark = Benchmark {
            demand: AssessmentDemand {
                name: "geometry".into(),
                text: "Assess shape knowledge.".into(),
                option_count: 2,
            },
            samples: vec![with_difficulty, without_difficulty],
            generator_id: "g".into(),
            created_at: Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap(),
            usage: UsageMeter::default(),
        };
        let record = |sample_id: &str, criterion, score| JudgeRecord {
            sample_id: sample_id.into(),
            generator_id: "g".into(),
            criterion,
            score,
            rationale_length: 11,
            raw_text: String::new(),
        };
        let records = vec![
            record("s1", JudgeCriterion::Faithfulness, 1.0),
            record("s2", JudgeCriterion::Faithfulness, 0.5), // skipped: no difficulty
            record("s1", JudgeCriterion::Alignment, 0.0),    // skipped: criterion
            record("ghost", JudgeCriterion::Faithfulness, 0.0), // skipped: no sample
        ];
        let rows = rows_from_judgments(&benchmark, &records, JudgeCriterion::Faithfulness);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].difficulty, 0.3);
        assert_eq!(rows[0].score, 1.0);
        assert_eq!(rows[0].judge_length, 11.0);
        // "How many sides does a hexagon have?" + "five" + "six" = 9 tokens.
        assert_eq!(rows[0].sample_length, 9.0);
    }
}
