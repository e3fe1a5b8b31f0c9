//! Experiment configuration files: TOML sections with defaults, resolved
//! into the runtime `RunConfig` plus a loaded network and held-out target.
//! Unknown keys are rejected by name.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::autoenc::{self, TrainConfig};
use crate::classify;
use crate::dyngraph::{ingest, read_edge_list, read_snapshots_file, DynamicNetwork, IngestSpec, Snapshot};
use crate::error::{Error, Result};
use crate::evalmetrics::{self, SamplerConfig};
use crate::pipeline::synth::{synth_generate, SynthSpec};
use crate::pipeline::{Method, RunConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub synth: Option<SynthSection>,
    #[serde(default)]
    pub embedding: EmbeddingSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// "synth", "edge-list" or "snapshots".
    pub source: String,
    pub path: Option<PathBuf>,
    pub window_length: Option<f64>,
    #[serde(default)]
    pub min_active_snapshots: usize,
    #[serde(default)]
    pub min_degree: usize,
    /// Hold out the final snapshot as the evaluation target.
    #[serde(default = "default_true")]
    pub holdout: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub n: usize,
    pub t: usize,
    #[serde(default = "default_communities")]
    pub communities: usize,
    #[serde(default = "default_intra_prob")]
    pub intra_prob: f64,
    #[serde(default)]
    pub recurrence_boost: f64,
    #[serde(default = "default_decay_horizon")]
    pub decay_horizon: usize,
    pub seed: Option<u64>,
}

fn default_communities() -> usize {
    4
}

fn default_intra_prob() -> f64 {
    0.1
}

fn default_decay_horizon() -> usize {
    2
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingSection {
    pub code_length: usize,
    pub lambda: f64,
    pub sigma: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: Option<u64>,
    pub init_scale: Option<f64>,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            code_length: autoenc::DEFAULT_CODE_LENGTH,
            lambda: autoenc::DEFAULT_LAMBDA,
            sigma: autoenc::DEFAULT_SIGMA,
            max_iters: autoenc::DEFAULT_MAX_ITERS,
            tol: autoenc::DEFAULT_TOL,
            seed: None,
            init_scale: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSection {
    pub rounds: usize,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        ClassifierSection {
            rounds: classify::DEFAULT_ROUNDS,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub ratio: f64,
    pub seed: Option<u64>,
}

impl Default for SamplerSection {
    fn default() -> Self {
        SamplerSection {
            ratio: 1.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    /// Master seed; stage seeds not given explicitly derive from it.
    pub seed: u64,
    pub methods: Vec<String>,
    pub train_from: usize,
    pub collapse_from: usize,
    pub katz_beta: f64,
    pub katz_max_len: usize,
    pub ndcg_k: usize,
    pub prediction_n_threshold: usize,
    pub prediction_max_pairs: usize,
    pub prediction_seed: Option<u64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seed: 1,
            methods: vec!["dylink2vec".into(), "cn".into(), "aa".into(), "j".into(), "katz".into()],
            train_from: 1,
            collapse_from: 2,
            katz_beta: crate::baselines::DEFAULT_KATZ_BETA,
            katz_max_len: crate::baselines::DEFAULT_KATZ_MAX_LEN,
            ndcg_k: evalmetrics::DEFAULT_NDCG_K,
            prediction_n_threshold: 2000,
            prediction_max_pairs: 200_000,
            prediction_seed: None,
        }
    }
}

/// A fully resolved experiment: working network, optional held-out target,
/// runtime config and method list.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub net: DynamicNetwork,
    pub eval: Option<Snapshot>,
    pub run: RunConfig,
    pub methods: Vec<Method>,
}

pub fn parse_config(text: &str) -> Result<FileConfig> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config_file(path: &Path) -> Result<FileConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

impl FileConfig {
    /// Resolve the config into a runnable experiment. `seed_override`
    /// replaces the master seed; relative dataset paths resolve against
    /// `base_dir`.
    pub fn resolve(&self, base_dir: &Path, seed_override: Option<u64>) -> Result<Experiment> {
        let master = seed_override.unwrap_or(self.experiment.seed);
        let full = self.load_network(base_dir, master)?;
        let (net, eval) = if self.dataset.holdout {
            if full.t() < 2 {
                return Err(Error::Config(
                    "holdout needs at least 2 snapshots".into(),
                ));
            }
            let eval = full.snapshot(full.t())?.clone();
            (full.truncated(full.t() - 1)?, Some(eval))
        } else {
            (full, None)
        };

        let run = RunConfig {
            code_length: self.embedding.code_length,
            lambda: self.embedding.lambda,
            train: TrainConfig {
                sigma: self.embedding.sigma,
                max_iters: self.embedding.max_iters,
                tol: self.embedding.tol,
                seed: self.embedding.seed.unwrap_or(master.wrapping_add(1)),
                init_scale: self.embedding.init_scale,
            },
            rounds: self.classifier.rounds,
            sampler: SamplerConfig::new(
                self.sampler.ratio,
                self.sampler.seed.unwrap_or(master.wrapping_add(2)),
            )?,
            train_from: self.experiment.train_from,
            collapse_from: self.experiment.collapse_from,
            katz_beta: self.experiment.katz_beta,
            katz_max_len: self.experiment.katz_max_len,
            ndcg_k: self.experiment.ndcg_k,
            prediction_n_threshold: self.experiment.prediction_n_threshold,
            prediction_max_pairs: self.experiment.prediction_max_pairs,
            prediction_seed: self
                .experiment
                .prediction_seed
                .unwrap_or(master.wrapping_add(3)),
        };
        let methods = self
            .experiment
            .methods
            .iter()
            .map(|m| m.parse())
            .collect::<Result<Vec<Method>>>()?;
        Ok(Experiment {
            net,
            eval,
            run,
            methods,
        })
    }

    fn load_network(&self, base_dir: &Path, master: u64) -> Result<DynamicNetwork> {
        let resolve_path = |p: &PathBuf| {
            if p.is_absolute() {
                p.clone()
            } else {
                base_dir.join(p)
            }
        };
        match self.dataset.source.as_str() {
            "synth" => {
                let s = self.synth.ok_or_else(|| {
                    Error::Config("dataset.source = \"synth\" needs a [synth] section".into())
                })?;
                synth_generate(&SynthSpec {
                    n: s.n,
                    t: s.t,
                    communities: s.communities,
                    intra_prob: s.intra_prob,
                    recurrence_boost: s.recurrence_boost,
                    decay_horizon: s.decay_horizon,
                    seed: s.seed.unwrap_or(master),
                })
            }
            "edge-list" => {
                let path = self.dataset.path.as_ref().ok_or_else(|| {
                    Error::Config("dataset.source = \"edge-list\" needs dataset.path".into())
                })?;
                let window = self.dataset.window_length.ok_or_else(|| {
                    Error::Config("edge-list ingestion needs dataset.window_length".into())
                })?;
                let records = read_edge_list(&resolve_path(path))?;
                let spec = IngestSpec::new(
                    window,
                    self.dataset.min_active_snapshots,
                    self.dataset.min_degree,
                )?;
                ingest(&records, &spec)
            }
            "snapshots" => {
                let path = self.dataset.path.as_ref().ok_or_else(|| {
                    Error::Config("dataset.source = \"snapshots\" needs dataset.path".into())
                })?;
                read_snapshots_file(&resolve_path(path))
            }
            other => Err(Error::Config(format!(
                "unknown dataset.source `{other}` (expected synth, edge-list or snapshots)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SYNTH_TOML: &str = r#"
[dataset]
source = "synth"

[synth]
n = 20
t = 5
communities = 2
intra_prob = 0.3
recurrence_boost = 0.5
decay_horizon = 2

[embedding]
code_length = 8
max_iters = 10

[experiment]
seed = 7
methods = ["dylink2vec", "cn"]
"#;

    #[test]
    fn synth_config_resolves() {
        let cfg = parse_config(SYNTH_TOML).unwrap();
        let exp = cfg.resolve(Path::new("."), None).unwrap();
        assert_eq!(exp.net.t(), 4); // one snapshot held out
        assert!(exp.eval.is_some());
        assert_eq!(exp.run.code_length, 8);
        assert_eq!(exp.run.train.max_iters, 10);
        assert_eq!(exp.run.train.seed, 8); // derived from master 7
        assert_eq!(exp.methods, vec![Method::DyLink2Vec, Method::Cn]);
    }

    #[test]
    fn seed_override_rederives_stage_seeds() {
        let cfg = parse_config(SYNTH_TOML).unwrap();
        let exp = cfg.resolve(Path::new("."), Some(100)).unwrap();
        assert_eq!(exp.run.train.seed, 101);
        assert_eq!(exp.run.sampler.seed, 102);
        assert_eq!(exp.run.prediction_seed, 103);
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = SYNTH_TOML.replace("code_length = 8", "code_len = 8");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("code_len"), "{err}");
    }

    #[test]
    fn missing_synth_section_is_an_error() {
        let err = parse_config("[dataset]\nsource = \"synth\"\n")
            .unwrap()
            .resolve(Path::new("."), None)
            .unwrap_err();
        assert!(err.to_string().contains("synth"));
    }

    #[test]
    fn snapshot_source_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            n: 12,
            t: 4,
            communities: 2,
            intra_prob: 0.4,
            recurrence_boost: 0.0,
            decay_horizon: 1,
            seed: 5,
        };
        let net = synth_generate(&spec).unwrap();
        let path = dir.path().join("snaps.txt");
        crate::dyngraph::write_snapshots_file(&net, &path).unwrap();
        let toml = format!(
            "[dataset]\nsource = \"snapshots\"\npath = \"{}\"\nholdout = false\n",
            path.display()
        );
        let exp = parse_config(&toml)
            .unwrap()
            .resolve(dir.path(), None)
            .unwrap();
        assert_eq!(exp.net, net);
        assert!(exp.eval.is_none());
    }

    #[test]
    fn edge_list_source_ingests() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.tsv");
        std::fs::write(&path, "a\tb\t0\nb\tc\t5\na\tb\t12\n").unwrap();
        let toml = format!(
            "[dataset]\nsource = \"edge-list\"\npath = \"{}\"\nwindow_length = 10.0\n",
            path.display()
        );
        let exp = parse_config(&toml)
            .unwrap()
            .resolve(dir.path(), None)
            .unwrap();
        // two windows; the second held out for evaluation
        assert_eq!(exp.net.t(), 1);
        assert!(exp.eval.is_some());
    }
}
