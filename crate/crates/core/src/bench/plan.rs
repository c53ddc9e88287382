use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::filters::FilterConfig;
use crate::io::SceneSpec;
use crate::metrics::WarpModel;

/// Default noise ratios of a benchmark plan.
pub const DEFAULT_NOISE_LEVELS: [f64; 4] = [0.0, 0.1, 0.2, 0.4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSource {
    /// A text or binary event file.
    File { path: PathBuf },
    /// A synthetic scene, generated with `seed` or the plan seed.
    Scene {
        scene: SceneSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanInput {
    /// Label used in reports; defaults to the file name or `scene<i>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub source: InputSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    #[serde(default = "default_group_size")]
    pub group_size: usize,
    /// `M` of the ESR interpolation.
    #[serde(default = "default_reference_count")]
    pub reference_count: u64,
    /// Written as in the CLI: `identity`, `linear:vx,vy` or `linear:vx,vy,tref`.
    #[serde(default, serialize_with = "warp_to_string", deserialize_with = "warp_from_string")]
    pub warp: WarpModel,
}

impl Default for Protocol {
    fn default() -> Self {
        Self { group_size: default_group_size(), reference_count: default_reference_count(), warp: WarpModel::Identity }
    }
}

fn default_group_size() -> usize {
    30_000
}

fn default_reference_count() -> u64 {
    20_000
}

fn warp_to_string<S: Serializer>(w: &WarpModel, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(w)
}

fn warp_from_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<WarpModel, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkPlan {
    pub inputs: Vec<PlanInput>,
    #[serde(default = "default_noise_levels")]
    pub noise_levels: Vec<f64>,
    pub filters: Vec<FilterConfig>,
    #[serde(default)]
    pub protocol: Protocol,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 or absent uses every core. `EVDN_THREADS` overrides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Wall time makes reports differ between runs, so it is opt-in.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_noise_levels() -> Vec<f64> {
    DEFAULT_NOISE_LEVELS.to_vec()
}

impl BenchmarkPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| Error::Format(format!("plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    /// Loads a plan and resolves relative input paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut plan = Self::from_toml(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for input in &mut plan.inputs {
            if let InputSource::File { path: p } = &mut input.source {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(plan)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("plan: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.protocol;
        if p.reference_count < 2 || p.group_size as u64 <= p.reference_count {
            return Err(Error::invalid(format!(
                "protocol needs group_size > M >= 2, got group_size = {}, M = {}",
                p.group_size, p.reference_count
            )));
        }
        p.warp.validate()?;
        if self.inputs.is_empty() {
            return Err(Error::invalid("plan needs at least one input"));
        }
        if self.filters.is_empty() {
            return Err(Error::invalid("plan needs at least one filter"));
        }
        if self.noise_levels.is_empty() {
            return Err(Error::invalid("plan needs at least one noise level"));
        }
        if self.noise_levels.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::invalid("noise levels must be finite and >= 0"));
        }
        if self.noise_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("noise levels must be strictly ascending"));
        }
        for f in &self.filters {
            f.validate()?;
        }
        for input in &self.inputs {
            if let InputSource::Scene { scene, .. } = &input.source {
                scene.validate()?;
            }
        }
        let names = self.input_names();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::invalid(format!("duplicate input name `{n}`")));
            }
        }
        Ok(())
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs
            .iter()
            .enumerate()
            .map(|(i, input)| match (&input.name, &input.source) {
                (Some(n), _) => n.clone(),
                (None, InputSource::File { path }) => path
                    .file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string()),
                (None, InputSource::Scene { .. }) => format!("scene{i}"),
            })
            .collect()
    }
}
