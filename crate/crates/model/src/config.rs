use nrlgt_core::CurveKind;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Attention layer variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    /// Inner and outer heads with edge and value mixers.
    #[default]
    InnerOuter,
    /// One residual multi-head block without edge or value mixers and
    /// without the activation, for ablations.
    Classical,
}

/// Which filter sits behind the main curve regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// Trainable bias, then the feasibility clamp.
    Controllability,
    /// Feasibility clamp, width-3 moving average, clamp again.
    Connectivity,
}

impl From<CurveKind> for FilterKind {
    fn from(k: CurveKind) -> Self {
        match k {
            CurveKind::Controllability => FilterKind::Controllability,
            CurveKind::Connectivity => FilterKind::Connectivity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Node feature width.
    pub d: usize,
    /// GT layers in the backbone.
    pub layers: usize,
    pub inner_heads: usize,
    pub outer_heads: usize,
    /// Node count the curve head is built for.
    pub n: usize,
    pub classes: usize,
    pub max_degree: usize,
    pub filter: FilterKind,
    /// One degree table for both lookups (undirected graphs).
    pub shared_tables: bool,
    pub leaky_slope: f64,
    pub alpha_gn: f64,
    pub layer_kind: LayerKind,
}

impl ModelConfig {
    pub fn new(n: usize, filter: FilterKind, directed: bool) -> Self {
        ModelConfig {
            d: 10,
            layers: 2,
            inner_heads: 2,
            outer_heads: 3,
            n,
            classes: 5,
            max_degree: 30,
            filter,
            shared_tables: !directed,
            leaky_slope: 0.2,
            alpha_gn: 1.5,
            layer_kind: LayerKind::InnerOuter,
        }
    }

    pub fn head_dim(&self) -> usize {
        self.d / self.inner_heads
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.d < 2 || !self.d.is_multiple_of(2) {
            return fail("d must be even and at least 2");
        }
        if self.inner_heads == 0 || self.outer_heads == 0 {
            return fail("head counts must be positive");
        }
        if self.head_dim() == 0 || 2 / self.inner_heads == 0 {
            return fail("inner heads exceed the feature width");
        }
        if self.n < 2 {
            return fail("curve head needs at least 2 nodes");
        }
        if self.classes < 2 {
            return fail("need at least 2 classes");
        }
        Ok(())
    }

    pub fn to_manifest(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_manifest(text: &str) -> Result<Self, ModelError> {
        toml::from_str(text).map_err(|e| ModelError::Manifest(e.to_string()))
    }
}
