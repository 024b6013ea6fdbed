//! File formats: line-delimited benchmark files, demand files, and the
//! atomic-write helper every command output goes through.
//!
//! A benchmark file is JSONL: the first line is a header object carrying the
//! demand, generator id, creation time, and usage snapshot (recognizable by
//! its `demand` field); each following line is one sample.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::types::{AssessmentDemand, Benchmark, Sample, UsageMeter};

/// Errors reading or writing toolkit files.
#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: file is empty, expected a header line with a `demand` field")]
    MissingHeader { path: PathBuf },
    #[error("{path}: line {line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: line {line}: duplicate sample id `{id}`")]
    DuplicateId {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("{path}: no demand blocks found (expected `Subset Name:` / `Assessment Demands:` pairs)")]
    NoDemands { path: PathBuf },
}

fn io_err(path: &Path, source: std::io::Error) -> FileError {
    FileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Strip serde_json's trailing position hint ("... at line 1 column 17") so
/// errors report the file's own line numbering instead.
pub(crate) fn clean_serde_message(err: &serde_json::Error) -> String {
    let msg = err.to_string();
    match msg.rfind(" at line ") {
        Some(idx) => msg[..idx].to_string(),
        None => msg,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BenchmarkHeader {
    demand: AssessmentDemand,
    generator_id: String,
    #[serde(with = "header_time")]
    created_at: chrono::DateTime<chrono::Utc>,
    usage: UsageMeter,
}

mod header_time {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(dt: &DateTime<Utc>, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&dt.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(de)?;
        let parsed = DateTime::parse_from_rfc3339(&raw).map_err(serde::de::Error::custom)?;
        Ok(crate::types::truncate_to_seconds(parsed.with_timezone(&Utc)))
    }
}

/// Serialize a benchmark to its line-delimited form.
pub fn benchmark_to_jsonl(bench: &Benchmark) -> String {
    let header = BenchmarkHeader {
        demand: bench.demand.clone(),
        generator_id: bench.generator_id.clone(),
        created_at: bench.created_at,
        usage: bench.usage,
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for sample in &bench.samples {
        out.push_str(&serde_json::to_string(sample).expect("sample serializes"));
        out.push('\n');
    }
    out
}

/// Write a benchmark file atomically (temp file + rename).
pub fn write_benchmark(bench: &Benchmark, path: &Path) -> Result<(), FileError> {
    atomic_write(path, benchmark_to_jsonl(bench).as_bytes())
}

/// Read a benchmark file, reporting the offending line on any malformation.
pub fn read_benchmark(path: &Path) -> Result<Benchmark, FileError> {
    let raw = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = raw
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_idx, header_line) = lines.next().ok_or_else(|| FileError::MissingHeader {
        path: path.to_path_buf(),
    })?;
    let header: BenchmarkHeader =
        serde_json::from_str(header_line).map_err(|e| FileError::Malformed {
            path: path.to_path_buf(),
            line: header_idx + 1,
            message: clean_serde_message(&e),
        })?;

    let mut samples: Vec<Sample> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in lines {
        let sample: Sample = serde_json::from_str(line).map_err(|e| FileError::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message: clean_serde_message(&e),
        })?;
        if !seen.insert(sample.id.clone()) {
            return Err(FileError::DuplicateId {
                path: path.to_path_buf(),
                line: idx + 1,
                id: sample.id,
            });
        }
        samples.push(sample);
    }

    Ok(Benchmark {
        demand: header.demand,
        samples,
        generator_id: header.generator_id,
        created_at: header.created_at,
        usage: header.usage,
    })
}

/// Parse a demand file: blocks of
///
/// ```text
/// Subset Name: <name>
/// Assessment Demands:<free text, possibly spanning lines>
/// ```
///
/// Every block becomes one demand with the supplied option count.
pub fn read_demands(path: &Path, option_count: usize) -> Result<Vec<AssessmentDemand>, FileError> {
    let raw = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut demands = Vec::new();
    let mut name: Option<String> = None;
    let mut text: Option<String> = None;

    let mut flush = |name: &mut Option<String>, text: &mut Option<String>| {
        if let (Some(n), Some(t)) = (name.take(), text.take()) {
            let t = t.trim().to_string();
            if !n.is_empty() && !t.is_empty() {
                demands.push(AssessmentDemand {
                    name: n,
                    text: t,
                    option_count,
                });
            }
        }
    };

    for line in raw.lines() {
        if let Some(rest) = line.strip_prefix("Subset Name:") {
            flush(&mut name, &mut text);
            name = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("Assessment Demands:") {
            text = Some(rest.trim_start().to_string());
        } else if let Some(t) = text.as_mut() {
            t.push('\n');
            t.push_str(line);
        }
    }
    flush(&mut name, &mut text);

    if demands.is_empty() {
        return Err(FileError::NoDemands {
            path: path.to_path_buf(),
        });
    }
    Ok(demands)
}

/// Write records as one JSON object per line, atomically.
pub fn write_jsonl_records<T: Serialize>(path: &Path, records: &[T]) -> Result<(), FileError> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Read one JSON object per line, reporting the offending line on any
/// malformation. Blank lines are skipped.
pub fn read_jsonl_records<T: serde::de::DeserializeOwned>(
    path: &Path,
) -> Result<Vec<T>, FileError> {
    let raw = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| FileError::Malformed {
            path: path.to_path_buf(),
            line: idx + 1,
            message: clean_serde_message(&e),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Write bytes to `path` via a temp file in the same directory, renamed into
/// place, so readers never observe a half-written file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), FileError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp = match dir {
        Some(d) => d.join(format!(".{file_name}.tmp")),
        None => PathBuf::from(format!(".{file_name}.tmp")),
    };
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}
