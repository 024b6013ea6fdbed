//! Configuration file handling: one TOML file describes the providers and
//! the knobs for generation, judging, and evaluation. Command-line flags
//! override file values; secrets never appear in the file — remote providers
//! name an environment variable instead.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, TimeZone, Utc};
use serde::Deserialize;

use benchforge::generator::GeneratorConfig;
use benchforge::providers::{MockProvider, Provider, ProviderConfig, RemoteProvider};
use benchforge::templates::TemplateSet;

/// Parsed configuration file. Every table is optional; an absent file
/// behaves like an empty one.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub providers: BTreeMap<String, ProviderEntry>,
    pub generator: GeneratorSection,
    pub judge: JudgeSection,
    pub evaluator: EvaluatorSection,
    pub paths: PathsSection,
}

/// One `[providers.<name>]` table, discriminated by its `kind` key.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProviderEntry {
    Mock(MockSection),
    Openai(ProviderConfig),
}

/// Scripted offline provider: replies come from a file, one JSON string per
/// line, consumed in call order.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockSection {
    pub script: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_embed_dimension")]
    pub embed_dimension: usize,
    #[serde(default)]
    pub price_per_1k_prompt_tokens: f64,
    #[serde(default)]
    pub price_per_1k_completion_tokens: f64,
}

fn default_embed_dimension() -> usize {
    16
}

/// `[generator]` table: pipeline knobs, all optional. Absent values fall
/// back to the library defaults; the sample count is always the `--n` flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    pub provider: Option<String>,
    pub option_count: Option<usize>,
    pub t_attempts: Option<u32>,
    pub reference_count: Option<usize>,
    pub candidate_count: Option<usize>,
    pub draft_attempts: Option<u32>,
    pub parse_attempts: Option<u32>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub max_failure_fraction: Option<f64>,
    /// RFC 3339 timestamp to stamp on generated benchmarks.
    pub created_at: Option<String>,
}

/// `[judge]` table: which provider scores samples and how patiently.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeSection {
    pub provider: Option<String>,
    pub parse_attempts: Option<u32>,
    pub workers: Option<usize>,
}

/// `[evaluator]` table: embedding provider for semantic diversity.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluatorSection {
    pub embed_provider: Option<String>,
    pub workers: Option<usize>,
}

/// `[paths]` table: optional prompt-template override directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub templates: Option<PathBuf>,
}

/// A provider instance built from the config, tagged with where it came
/// from so callers can special-case the offline mock (pinned timestamps).
pub struct BuiltProvider {
    pub name: String,
    pub provider: Box<dyn Provider>,
    pub is_mock: bool,
}

impl std::fmt::Debug for BuiltProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuiltProvider")
            .field("name", &self.name)
            .field("is_mock", &self.is_mock)
            .finish_non_exhaustive()
    }
}

/// Configuration plus the directory it was loaded from, so relative paths
/// inside the file resolve against the file rather than the working
/// directory.
#[derive(Debug)]
pub struct LoadedConfig {
    pub file: FileConfig,
    dir: PathBuf,
}

impl LoadedConfig {
    /// Load the file at `path`, or an empty configuration when no path was
    /// given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self {
                file: FileConfig::default(),
                dir: PathBuf::from("."),
            });
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let file: FileConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        let dir = match path.parent() {
            Some(parent) if parent.as_os_str().is_empty() => PathBuf::from("."),
            Some(parent) => parent.to_path_buf(),
            None => PathBuf::from("."),
        };
        Ok(Self { file, dir })
    }

    /// Resolve a path from the config file against the file's directory.
    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.dir.join(path)
        }
    }

    /// Prompt templates: the override directory when configured, otherwise
    /// the built-in set.
    pub fn templates(&self) -> Result<TemplateSet> {
        match &self.file.paths.templates {
            Some(dir) => {
                let dir = self.resolve(dir);
                TemplateSet::from_dir(&dir)
                    .with_context(|| format!("cannot load templates from {}", dir.display()))
            }
            None => Ok(TemplateSet::builtin()),
        }
    }

    /// Pick a provider entry: the requested name when given, otherwise the
    /// sole configured provider.
    fn pick(&self, requested: Option<&str>, role: &str) -> Result<(&String, &ProviderEntry)> {
        if let Some(name) = requested {
            return self
                .file
                .providers
                .get_key_value(name)
                .ok_or_else(|| {
                    anyhow::anyhow!(
                        "config names no provider `{name}` (configured: {})",
                        self.provider_names()
                    )
                });
        }
        match self.file.providers.len() {
            0 => bail!("no [providers.<name>] tables in config; {role} needs one"),
            1 => Ok(self.file.providers.iter().next().expect("one entry")),
            _ => bail!(
                "several providers configured ({}); set `{role}.provider` to choose one",
                self.provider_names()
            ),
        }
    }

    fn provider_names(&self) -> String {
        if self.file.providers.is_empty() {
            "none".to_string()
        } else {
            self.file
                .providers
                .keys()
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        }
    }

    /// Instantiate the provider behind a config entry.
    fn build(&self, name: &str, entry: &ProviderEntry) -> Result<BuiltProvider> {
        match entry {
            ProviderEntry::Mock(section) => {
                let script_path = self.resolve(&section.script);
                let text = std::fs::read_to_string(&script_path).with_context(|| {
                    format!(
                        "cannot read mock script {} for provider `{name}`",
                        script_path.display()
                    )
                })?;
                let mut responses = Vec::new();
                for (index, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let reply: String = serde_json::from_str(line).with_context(|| {
                        format!(
                            "{}:{}: each script line must be one JSON string",
                            script_path.display(),
                            index + 1
                        )
                    })?;
                    responses.push(reply);
                }
                let provider = MockProvider::new(responses, section.embed_dimension)
                    .with_seed(section.seed)
                    .with_prices(
                        section.price_per_1k_prompt_tokens,
                        section.price_per_1k_completion_tokens,
                    );
                Ok(BuiltProvider {
                    name: name.to_string(),
                    provider: Box::new(provider),
                    is_mock: true,
                })
            }
            ProviderEntry::Openai(cfg) => {
                let provider = RemoteProvider::new(cfg.clone())
                    .with_context(|| format!("cannot construct provider `{name}`"))?;
                Ok(BuiltProvider {
                    name: name.to_string(),
                    provider: Box::new(provider),
                    is_mock: false,
                })
            }
        }
    }

    /// Provider for the generation pipeline.
    pub fn generator_provider(&self) -> Result<BuiltProvider> {
        let (name, entry) = self.pick(self.file.generator.provider.as_deref(), "the generator")?;
        self.build(&name.clone(), entry)
    }

    /// Provider for judge scoring.
    pub fn judge_provider(&self) -> Result<BuiltProvider> {
        let (name, entry) = self.pick(self.file.judge.provider.as_deref(), "the judge")?;
        self.build(&name.clone(), entry)
    }

    /// Embedding provider for semantic diversity, when one is determinable:
    /// the named `evaluator.embed_provider`, or the sole configured provider.
    /// `None` means the metric is skipped (with a report warning), never an
    /// error — unless a name was given and does not exist.
    pub fn embed_provider(&self) -> Result<Option<BuiltProvider>> {
        if let Some(name) = &self.file.evaluator.embed_provider {
            let (name, entry) = self.pick(Some(name), "the evaluator")?;
            return Ok(Some(self.build(&name.clone(), entry)?));
        }
        if self.file.providers.len() == 1 {
            let (name, entry) = self.file.providers.iter().next().expect("one entry");
            return Ok(Some(self.build(&name.clone(), entry)?));
        }
        Ok(None)
    }

    /// Number of options per sample for generation.
    pub fn option_count(&self, flag: Option<usize>) -> usize {
        flag.or(self.file.generator.option_count).unwrap_or(10)
    }

    /// Assemble the generation pipeline's configuration: library defaults,
    /// overridden by the `[generator]` table, overridden by flags. Mock
    /// providers default to a pinned timestamp so reruns are bit-identical.
    pub fn generator_config(
        &self,
        n: usize,
        seed_flag: Option<u64>,
        provider_is_mock: bool,
    ) -> Result<GeneratorConfig> {
        let section = &self.file.generator;
        let mut config = GeneratorConfig {
            sample_count: n,
            ..GeneratorConfig::default()
        };
        if let Some(v) = section.t_attempts {
            config.t_attempts = v;
        }
        if let Some(v) = section.reference_count {
            config.reference_count = v;
        }
        if let Some(v) = section.candidate_count {
            config.candidate_count = v;
        }
        if let Some(v) = section.draft_attempts {
            config.draft_attempts = v;
        }
        if let Some(v) = section.parse_attempts {
            config.parse_attempts = v;
        }
        if let Some(v) = section.workers {
            config.workers = v;
        }
        if let Some(v) = section.max_failure_fraction {
            config.max_failure_fraction = v;
        }
        config.seed = seed_flag.or(section.seed).unwrap_or(0);
        config.created_at = self.created_at(provider_is_mock)?;
        Ok(config)
    }

    fn created_at(&self, provider_is_mock: bool) -> Result<Option<DateTime<Utc>>> {
        if let Some(text) = &self.file.generator.created_at {
            let parsed = DateTime::parse_from_rfc3339(text)
                .with_context(|| format!("generator.created_at `{text}` is not RFC 3339"))?;
            return Ok(Some(parsed.with_timezone(&Utc)));
        }
        if provider_is_mock {
            // Scripted runs should be reproducible byte-for-byte; pin the
            // timestamp unless the file chose one.
            return Ok(Some(Utc.timestamp_opt(0, 0).single().expect("epoch")));
        }
        Ok(None)
    }

    /// Judge scoring knobs.
    pub fn judge_knobs(&self) -> (u32, usize) {
        (
            self.file.judge.parse_attempts.unwrap_or(3),
            self.file.judge.workers.unwrap_or(8),
        )
    }

    /// Evaluator fan-out for embedding calls.
    pub fn evaluator_workers(&self) -> usize {
        self.file.evaluator.workers.unwrap_or(8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        let mut file = std::fs::File::create(&path).expect("create");
        file.write_all(contents.as_bytes()).expect("write");
        path
    }

    #[test]
    fn missing_config_behaves_like_an_empty_one() {
        let config = LoadedConfig::load(None).expect("load");
        assert!(config.file.providers.is_empty());
        assert_eq!(config.option_count(None), 10);
        let gen = config.generator_config(7, None, false).expect("config");
        assert_eq!(gen.sample_count, 7);
        assert_eq!(gen.seed, 0);
        assert_eq!(gen.created_at, None);
    }

    #[test]
    fn mock_provider_loads_script_lines_in_order() {
        let dir = tempfile::tempdir().expect("tempdir");
        write_file(dir.path(), "script.jsonl", "\"first\"\n\n\"second\"\n");
        let config_path = write_file(
            dir.path(),
            "bf.toml",
            r#"
[providers.local]
kind = "mock"
script = "script.jsonl"
"#,
        );
        let config = LoadedConfig::load(Some(&config_path)).expect("load");
        let built = config.generator_provider().expect("provider");
        assert!(built.is_mock);
        assert_eq!(built.name, "local");
        let rt = tokio::runtime::Builder::new_multi_thread()
            .build()
            .expect("runtime");
        let reply = rt
            .block_on(built.provider.chat(&benchforge::providers::ChatRequest::user("hi")))
            .expect("chat");
        assert_eq!(reply.text, "first");
    }

    #[test]
    fn malformed_script_line_is_reported_with_its_line_number() {
        let dir = tempfile::tempdir().expect("tempdir");
        write_file(dir.path(), "script.jsonl", "\"ok\"\nnot-json\n");
        let config_path = write_file(
            dir.path(),
            "bf.toml",
            "[providers.m]\nkind = \"mock\"\nscript = \"script.jsonl\"\n",
        );
        let config = LoadedConfig::load(Some(&config_path)).expect("load");
        let err = format!("{:#}", config.generator_provider().unwrap_err());
        assert!(err.contains("script.jsonl:2"), "{err}");
        assert!(err.contains("JSON string"), "{err}");
    }

    #[test]
    fn ambiguous_provider_choice_is_an_error_and_naming_resolves_it() {
        let dir = tempfile::tempdir().expect("tempdir");
        write_file(dir.path(), "script.jsonl", "\"x\"\n");
        let config_path = write_file(
            dir.path(),
            "bf.toml",
            r#"
[providers.a]
kind = "mock"
script = "script.jsonl"

[providers.b]
kind = "mock"
script = "script.jsonl"

[judge]
provider = "b"
"#,
        );
        let config = LoadedConfig::load(Some(&config_path)).expect("load");
        let err = format!("{:#}", config.generator_provider().unwrap_err());
        assert!(err.contains("several providers configured (a, b)"), "{err}");
        assert_eq!(config.judge_provider().expect("judge").name, "b");
        // Ambiguity only skips the optional embedding provider.
        assert!(config.embed_provider().expect("embed").is_none());
    }

    #[test]
    fn unknown_provider_name_lists_what_exists() {
        let dir = tempfile::tempdir().expect("tempdir");
        write_file(dir.path(), "script.jsonl", "\"x\"\n");
        let config_path = write_file(
            dir.path(),
            "bf.toml",
            r#"
[providers.real]
kind = "mock"
script = "script.jsonl"

[generator]
provider = "imaginary"
"#,
        );
        let config = LoadedConfig::load(Some(&config_path)).expect("load");
        let err = format!("{:#}", config.generator_provider().unwrap_err());
        assert!(err.contains("no provider `imaginary`"), "{err}");
        assert!(err.contains("real"), "{err}");
    }

    #[test]
    fn generator_section_and_flags_override_defaults_in_order() {
        let dir = tempfile::tempdir().expect("tempdir");
        write_file(dir.path(), "script.jsonl", "\"x\"\n");
        let config_path = write_file(
            dir.path(),
            "bf.toml",
            r#"
[providers.m]
kind = "mock"
script = "script.jsonl"

[generator]
option_count = 4
t_attempts = 6
seed = 11
created_at = "2024-05-01T00:00:00Z"
"#,
        );
        let config = LoadedConfig::load(Some(&config_path)).expect("load");
        assert_eq!(config.option_count(None), 4);
        assert_eq!(config.option_count(Some(6)), 6);
        let gen = config.generator_config(3, None, true).expect("config");
        assert_eq!((gen.sample_count, gen.t_attempts, gen.seed), (3, 6, 11));
        assert_eq!(
            gen.created_at.expect("pinned").to_rfc3339(),
            "2024-05-01T00:00:00+00:00"
        );
        // A seed flag beats the file.
        assert_eq!(config.generator_config(3, Some(99), true).expect("config").seed, 99);
    }

    #[test]
    fn mock_runs_pin_the_timestamp_and_remote_runs_do_not() {
        let config = LoadedConfig::load(None).expect("load");
        let mock = config.generator_config(1, None, true).expect("config");
        assert_eq!(mock.created_at.expect("pinned").timestamp(), 0);
        let remote = config.generator_config(1, None, false).expect("config");
        assert_eq!(remote.created_at, None);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().expect("tempdir");
        let config_path = write_file(dir.path(), "bf.toml", "[generator]\nsample_count = 5\n");
        let err = format!("{:#}", LoadedConfig::load(Some(&config_path)).unwrap_err());
        assert!(err.contains("cannot parse config file"), "{err}");
    }
}
