use std::path::{Path, PathBuf};

use nrlgt_core::{AttackKind, AttackStrategy, ControllabilityMode, CurveKind, Topology};
use nrlgt_model::{LayerKind, ModelConfig};
use serde::{Deserialize, Serialize};

use crate::error::PipelineError;

/// Full pipeline configuration, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub generation: GenerationConfig,
    pub training: TrainingConfig,
    pub model: ModelOverrides,
    pub evaluation: EvaluationConfig,
    pub paths: PathsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationConfig {
    pub topologies: Vec<Topology>,
    pub n: usize,
    pub samples_per_topology: usize,
    /// Average degree is drawn uniformly from `[k_min, k_max]` per sample.
    pub k_min: f64,
    pub k_max: f64,
    pub directed: bool,
    pub weighted: bool,
    pub weight_range: (f64, f64),
    pub attack: AttackKind,
    /// Re-rank after each removal (targeted attacks).
    pub recompute: bool,
    pub curve: CurveKind,
    pub mode: ControllabilityMode,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            topologies: Topology::ALL.to_vec(),
            n: 100,
            samples_per_topology: 100,
            k_min: 1.0,
            k_max: 10.0,
            directed: true,
            weighted: false,
            weight_range: (0.5, 1.5),
            attack: AttackKind::Random,
            recompute: true,
            curve: CurveKind::Controllability,
            mode: ControllabilityMode::Structural,
            seed: 1,
        }
    }
}

impl GenerationConfig {
    /// Attack strategy for one sample; random attacks take the sample seed.
    pub fn strategy(&self, sample_seed: u64) -> AttackStrategy {
        let s = match self.attack {
            AttackKind::Random => AttackStrategy::random(sample_seed),
            AttackKind::TargetedDegree => AttackStrategy::degree(),
            AttackKind::TargetedBetweenness => AttackStrategy::betweenness(),
        };
        if self.recompute {
            s
        } else {
            s.non_adaptive()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub rho: f64,
    pub seed: u64,
    /// Share of each topology held out for validation.
    pub val_fraction: f64,
    pub freeze_encoder: bool,
    pub freeze_backbone: bool,
    pub step2_epochs: usize,
    pub step2_lr: f64,
    pub gradnorm_lr: f64,
    pub transfer_epochs: usize,
    /// Share of the training records used to fine-tune after a transfer.
    pub transfer_fraction: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            epochs: 100,
            batch_size: 32,
            lr: 1e-4,
            weight_decay: 5e-5,
            rho: nrlgt_model::loss::RHO,
            seed: 7,
            val_fraction: 0.1,
            freeze_encoder: false,
            freeze_backbone: false,
            step2_epochs: 50,
            step2_lr: 1e-3,
            gradnorm_lr: 0.025,
            transfer_epochs: 50,
            transfer_fraction: 0.5,
        }
    }
}

/// Optional overrides of the model defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelOverrides {
    pub d: Option<usize>,
    pub layers: Option<usize>,
    pub inner_heads: Option<usize>,
    pub outer_heads: Option<usize>,
    pub max_degree: Option<usize>,
    pub leaky_slope: Option<f64>,
    pub alpha_gn: Option<f64>,
    pub layer_kind: Option<LayerKind>,
}

impl ModelOverrides {
    pub fn apply(&self, mut cfg: ModelConfig) -> ModelConfig {
        cfg.d = self.d.unwrap_or(cfg.d);
        cfg.layers = self.layers.unwrap_or(cfg.layers);
        cfg.inner_heads = self.inner_heads.unwrap_or(cfg.inner_heads);
        cfg.outer_heads = self.outer_heads.unwrap_or(cfg.outer_heads);
        cfg.max_degree = self.max_degree.unwrap_or(cfg.max_degree);
        cfg.leaky_slope = self.leaky_slope.unwrap_or(cfg.leaky_slope);
        cfg.alpha_gn = self.alpha_gn.unwrap_or(cfg.alpha_gn);
        cfg.layer_kind = self.layer_kind.unwrap_or(cfg.layer_kind);
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    pub controllability_threshold: f64,
    pub connectivity_threshold: f64,
    pub timing_runs: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            controllability_threshold: 0.03,
            connectivity_threshold: 0.06,
            timing_runs: 20,
        }
    }
}

impl EvaluationConfig {
    pub fn threshold(&self, kind: CurveKind) -> f64 {
        match kind {
            CurveKind::Controllability => self.controllability_threshold,
            CurveKind::Connectivity => self.connectivity_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub dataset: PathBuf,
    pub checkpoint: PathBuf,
    pub report_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            dataset: "out/dataset".into(),
            checkpoint: "out/model.ckpt".into(),
            report_dir: "out/report".into(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Reads `path` (or starts from defaults) and applies `section.key=value`
    /// overrides. Values parse as TOML, falling back to plain strings.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[String]) -> Result<Self, PipelineError> {
        let mut root: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| PipelineError::io(p, e))?;
                toml::from_str(&text).map_err(|e| PipelineError::Config(e.to_string()))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("override {item:?} is not key=value")))?;
            let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
            let mut parts: Vec<&str> = key.trim().split('.').collect();
            let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| PipelineError::Config(format!("empty key in {item:?}")))?;
            let mut table = &mut root;
            for p in parts {
                table = table
                    .entry(p)
                    .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| PipelineError::Config(format!("{p} is not a section")))?;
            }
            table.insert(last.to_string(), value);
        }
        let cfg: PipelineConfig = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        let g = &self.generation;
        if g.topologies.is_empty() {
            return fail("no topologies".into());
        }
        if g.n < 2 {
            return fail(format!("n = {} is below 2", g.n));
        }
        if g.samples_per_topology < 1 {
            return fail("samples_per_topology must be at least 1".into());
        }
        if !(g.k_min > 0.0 && g.k_min <= g.k_max) {
            return fail(format!("bad degree range [{}, {}]", g.k_min, g.k_max));
        }
        if g.weighted && !(g.weight_range.0 > 0.0 && g.weight_range.0 <= g.weight_range.1) {
            return fail(format!("bad weight range {:?}", g.weight_range));
        }
        let t = &self.training;
        if t.batch_size < 1 {
            return fail("batch_size must be at least 1".into());
        }
        if !(t.lr > 0.0 && t.step2_lr > 0.0) || t.weight_decay < 0.0 || t.rho < 0.0 || t.gradnorm_lr < 0.0 {
            return fail("learning rates must be positive, decay, rho and gradnorm_lr non-negative".into());
        }
        if !(0.0..1.0).contains(&t.val_fraction) {
            return fail(format!("val_fraction {} outside [0, 1)", t.val_fraction));
        }
        if !(t.transfer_fraction > 0.0 && t.transfer_fraction <= 1.0) {
            return fail(format!("transfer_fraction {} outside (0, 1]", t.transfer_fraction));
        }
        let e = &self.evaluation;
        if !(e.controllability_threshold > 0.0 && e.connectivity_threshold > 0.0) {
            return fail("thresholds must be positive".into());
        }
        if e.timing_runs < 1 {
            return fail("timing_runs must be at least 1".into());
        }
        let p = &self.paths;
        if p.dataset == p.checkpoint || p.dataset == p.report_dir || p.checkpoint == p.report_dir {
            return fail("dataset, checkpoint and report paths must differ".into());
        }
        Ok(())
    }

    /// Model configuration for a dataset of `n`-node graphs.
    pub fn model_config(&self, n: usize, curve: CurveKind, directed: bool) -> ModelConfig {
        self.model.apply(ModelConfig::new(n, curve.into(), directed))
    }
}
