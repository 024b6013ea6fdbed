//! Model-by-sample correctness matrices: who got what right, loaded from and
//! stored as one record per line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::evaluator::EvaluatorError;
use crate::io::{read_jsonl_records, write_jsonl_records, FileError};

/// One graded answer: did `model_id` answer `sample_id` correctly?
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectnessRecord {
    pub model_id: String,
    pub sample_id: String,
    pub correct: bool,
}

/// A complete model-by-sample grid of correctness outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectnessMatrix {
    model_ids: Vec<String>,
    sample_ids: Vec<String>,
    /// `cells[m][s]` pairs with `model_ids[m]` and `sample_ids[s]`.
    cells: Vec<Vec<bool>>,
}

impl CorrectnessMatrix {
    /// Assemble a matrix from records, in first-appearance order.
    ///
    /// Every (model, sample) pair must appear exactly once: duplicates and
    /// missing cells are errors naming the offending pair.
    pub fn from_records(records: &[CorrectnessRecord]) -> Result<Self, EvaluatorError> {
        if records.is_empty() {
            return Err(EvaluatorError::Matrix("no records given".to_string()));
        }
        let mut model_ids: Vec<String> = Vec::new();
        let mut sample_ids: Vec<String> = Vec::new();
        let mut seen: BTreeMap<(usize, usize), bool> = BTreeMap::new();
        let mut model_index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut sample_index: BTreeMap<&str, usize> = BTreeMap::new();
        for record in records {
            let m = *model_index.entry(record.model_id.as_str()).or_insert_with(|| {
                model_ids.push(record.model_id.clone());
                model_ids.len() - 1
            });
            let s = *sample_index.entry(record.sample_id.as_str()).or_insert_with(|| {
                sample_ids.push(record.sample_id.clone());
                sample_ids.len() - 1
            });
            if seen.insert((m, s), record.correct).is_some() {
                return Err(EvaluatorError::Matrix(format!(
                    "duplicate record for model `{}` on sample `{}`",
                    record.model_id, record.sample_id
                )));
            }
        }
        let mut cells = vec![vec![false; sample_ids.len()]; model_ids.len()];
        for m in 0..model_ids.len() {
            for s in 0..sample_ids.len() {
                match seen.get(&(m, s)) {
                    Some(correct) => cells[m][s] = *correct,
                    None => {
                        return Err(EvaluatorError::Matrix(format!(
                            "missing record for model `{}` on sample `{}`",
                            model_ids[m], sample_ids[s]
                        )))
                    }
                }
            }
        }
        Ok(Self {
            model_ids,
            sample_ids,
            cells,
        })
    }

    /// Load a matrix from a JSONL file of records.
    pub fn read_jsonl(path: &Path) -> Result<Self, EvaluatorError> {
        let records: Vec<CorrectnessRecord> =
            read_jsonl_records(path).map_err(|e| EvaluatorError::Matrix(e.to_string()))?;
        Self::from_records(&records)
    }

    /// Write the matrix as a JSONL file of records, model-major.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), FileError> {
        let records: Vec<CorrectnessRecord> = self
            .model_ids
            .iter()
            .enumerate()
            .flat_map(|(m, model_id)| {
                self.sample_ids.iter().enumerate().map(move |(s, sample_id)| {
                    CorrectnessRecord {
                        model_id: model_id.clone(),
                        sample_id: sample_id.clone(),
                        correct: self.cells[m][s],
                    }
                })
            })
            .collect();
        write_jsonl_records(path, &records)
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    /// Whether `model_id` answered `sample_id` correctly, if both are present.
    pub fn correct(&self, model_id: &str, sample_id: &str) -> Option<bool> {
        let m = self.model_ids.iter().position(|id| id == model_id)?;
        let s = self.sample_ids.iter().position(|id| id == sample_id)?;
        Some(self.cells[m][s])
    }

    /// Per-model accuracy, aligned with `model_ids`.
    pub fn model_accuracies(&self) -> Vec<f64> {
        self.cells
            .iter()
            .map(|row| row.iter().filter(|c| **c).count() as f64 / row.len() as f64)
            .collect()
    }

    /// Per-sample error rate (fraction of models answering wrong), aligned
    /// with `sample_ids`.
    pub fn sample_error_rates(&self) -> Vec<f64> {
        (0..self.sample_ids.len())
            .map(|s| {
                let wrong = self.cells.iter().filter(|row| !row[s]).count();
                wrong as f64 / self.model_ids.len() as f64
            })
            .collect()
    }

    /// Per-sample correctness column across models, aligned with `sample_ids`.
    pub fn sample_columns(&self) -> Vec<Vec<bool>> {
        (0..self.sample_ids.len())
            .map(|s| self.cells.iter().map(|row| row[s]).collect())
            .collect()
    }

    /// Restrict and reorder the matrix columns to exactly `sample_ids`.
    ///
    /// Errors name the requested samples the matrix has no column for.
    pub fn aligned_to_samples(&self, sample_ids: &[String]) -> Result<Self, EvaluatorError> {
        let mut columns = Vec::with_capacity(sample_ids.len());
        let mut missing = Vec::new();
        for id in sample_ids {
            match self.sample_ids.iter().position(|s| s == id) {
                Some(s) => columns.push(s),
                None => missing.push(id.as_str()),
            }
        }
        if !missing.is_empty() {
            return Err(EvaluatorError::Matrix(format!(
                "matrix has no records for samples: {}",
                missing.join(", ")
            )));
        }
        let requested: BTreeSet<&String> = sample_ids.iter().collect();
        if requested.len() != sample_ids.len() {
            return Err(EvaluatorError::Matrix(
                "requested sample ids contain duplicates".to_string(),
            ));
        }
        Ok(Self {
            model_ids: self.model_ids.clone(),
            sample_ids: sample_ids.to_vec(),
            cells: self
                .cells
                .iter()
                .map(|row| columns.iter().map(|&s| row[s]).collect())
                .collect(),
        })
    }
}

/// Accuracies of the models present in both matrices, paired by model id in
/// `a`'s order. Returns the shared ids alongside the two accuracy vectors.
pub fn shared_model_accuracies(
    a: &CorrectnessMatrix,
    b: &CorrectnessMatrix,
) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let acc_a = a.model_accuracies();
    let acc_b = b.model_accuracies();
    let mut ids = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, id) in a.model_ids.iter().enumerate() {
        if let Some(j) = b.model_ids.iter().position(|other| other == id) {
            ids.push(id.clone());
            xs.push(acc_a[i]);
            ys.push(acc_b[j]);
        }
    }
    (ids, xs, ys)
}
