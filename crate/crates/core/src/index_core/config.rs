use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ingest::CoordinateMode;
use crate::spatial::{
    validate_categories, DistanceMetric, FallbackPolicy, IndexRegistry, PopulationCategory,
    DEFAULT_CATEGORIES, DEFAULT_STRATEGY, NUM_CATEGORIES,
};

use super::weights::WeightScheme;
use super::ComputeError;

/// Which places share one min-max normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingMode {
    /// Each census year is normalized on its own.
    #[default]
    PerYear,
    /// All years of a run share one min and max.
    Global,
}

impl ScalingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingMode::PerYear => "per_year",
            ScalingMode::Global => "global",
        }
    }
}

/// Every model knob of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub categories: Vec<PopulationCategory>,
    pub weights: WeightScheme,
    /// `None` picks the metric matching the input's coordinate mode.
    pub metric: Option<DistanceMetric>,
    pub fallback: FallbackPolicy,
    pub scaling: ScalingMode,
    pub population_floor: u64,
    pub distance_floor_km: f64,
    pub log_base: f64,
    /// Name of the nearest-neighbor backend in the [`IndexRegistry`].
    pub index: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            categories: DEFAULT_CATEGORIES.to_vec(),
            weights: WeightScheme::equal(),
            metric: None,
            fallback: FallbackPolicy::Error,
            scaling: ScalingMode::PerYear,
            population_floor: 10,
            distance_floor_km: 1.0,
            log_base: 10.0,
            index: DEFAULT_STRATEGY.to_string(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ComputeError> {
        let bad = |m: String| Err(ComputeError::InvalidConfig(m));
        if let Err(m) = validate_categories(&self.categories) {
            return bad(m);
        }
        if let Err(m) = self.weights.validate() {
            return bad(m);
        }
        if self.population_floor < 2 {
            return bad(format!(
                "population_floor must be at least 2, got {}",
                self.population_floor
            ));
        }
        if !(self.distance_floor_km.is_finite() && self.distance_floor_km > 0.0) {
            return bad(format!(
                "distance_floor_km must be positive, got {}",
                self.distance_floor_km
            ));
        }
        if !(self.log_base.is_finite() && self.log_base > 1.0) {
            return bad(format!("log_base must be greater than 1, got {}", self.log_base));
        }
        if let Err(e) = IndexRegistry::with_builtin().get(&self.index) {
            return bad(e.to_string());
        }
        Ok(())
    }

    /// The metric to use for inputs in `mode`.
    pub fn metric_for(&self, mode: CoordinateMode) -> Result<DistanceMetric, ComputeError> {
        match self.metric {
            None => Ok(DistanceMetric::for_mode(mode)),
            Some(m) if m.is_consistent_with(mode) => Ok(m),
            Some(m) => Err(ComputeError::InvalidConfig(format!(
                "metric {m} does not fit {mode} coordinates"
            ))),
        }
    }

    /// Applies the fields present in `file` on top of `self`.
    pub fn merge(mut self, file: ConfigFile) -> Result<Self, ComputeError> {
        if let Some(c) = file.categories {
            self.categories = c;
        }
        if let Some(w) = file.weights {
            self.weights = w.resolve()?;
        }
        if let Some(m) = file.metric {
            self.metric = Some(m);
        }
        if let Some(f) = file.fallback {
            self.fallback = f;
        }
        if let Some(s) = file.scaling {
            self.scaling = s;
        }
        if let Some(p) = file.population_floor {
            self.population_floor = p;
        }
        if let Some(d) = file.distance_floor_km {
            self.distance_floor_km = d;
        }
        if let Some(b) = file.log_base {
            self.log_base = b;
        }
        if let Some(i) = file.index {
            self.index = i;
        }
        Ok(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ComputeError> {
        let file: ConfigFile = serde_json::from_str(text)
            .map_err(|e| ComputeError::InvalidConfig(format!("config: {e}")))?;
        let cfg = Self::default().merge(file)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// On-disk form of [`RunConfig`]: every field optional, unknown keys rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub categories: Option<Vec<PopulationCategory>>,
    pub weights: Option<WeightsSpec>,
    pub metric: Option<DistanceMetric>,
    pub fallback: Option<FallbackPolicy>,
    pub scaling: Option<ScalingMode>,
    pub population_floor: Option<u64>,
    pub distance_floor_km: Option<f64>,
    pub log_base: Option<f64>,
    pub index: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ComputeError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ComputeError::InvalidConfig(format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| ComputeError::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

/// A preset name or an explicit scheme.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Preset(String),
    Custom(CustomWeights),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomWeights {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub w_pop: Option<f64>,
    pub w_pc: [f64; NUM_CATEGORIES],
}

impl WeightsSpec {
    pub fn resolve(self) -> Result<WeightScheme, ComputeError> {
        match self {
            WeightsSpec::Preset(name) => WeightScheme::preset(&name).ok_or_else(|| {
                ComputeError::InvalidConfig(format!(
                    "unknown weight preset `{name}` (known: {})",
                    WeightScheme::preset_names().collect::<Vec<_>>().join(", ")
                ))
            }),
            WeightsSpec::Custom(c) => WeightScheme::new(
                c.name.unwrap_or_else(|| "custom".to_string()),
                c.w_pop.unwrap_or(15.0),
                c.w_pc,
            )
            .map_err(ComputeError::InvalidConfig),
        }
    }

    /// Reads a weights file holding a [`CustomWeights`] object.
    pub fn load(path: &Path) -> Result<WeightScheme, ComputeError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ComputeError::InvalidConfig(format!("cannot read {}: {e}", path.display()))
        })?;
        let c: CustomWeights = serde_json::from_str(&text)
            .map_err(|e| ComputeError::InvalidConfig(format!("{}: {e}", path.display())))?;
        WeightsSpec::Custom(c).resolve()
    }
}
