use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::astro::BodyCatalog;
use crate::lhv::{AliceDelayMode, AngleConvention, EstimationMode};
use crate::protocols::{DianaBasis, OrderingScenario};
use crate::qcore::BellLabel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolName {
    Bell,
    Teleport,
    Swap,
    Lhv,
    Link,
    Events,
}

impl ProtocolName {
    pub fn is_simulation(self) -> bool {
        !matches!(self, Self::Link | Self::Events)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Jsonl,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            _ => Err(ConfigError::Invalid(format!("unknown format {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeleportMode {
    #[default]
    Active,
    Passive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogChoice {
    #[default]
    Paper,
    Modern,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventLayout {
    Ground,
    Cislunar,
    #[default]
    Swap,
}

/// One run, as read from TOML. Every key except `protocol` is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: ProtocolName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_trial: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell_state: Option<BellLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teleport_mode: Option<TeleportMode>,
    /// Observable labels for Bob in passive teleportation, chosen uniformly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bob_settings: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell_mask: Option<bool>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diana_basis: Option<DianaBasis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_select: Option<BellLabel>,

    #[serde(rename = "delay_scale_T0", default, skip_serializing_if = "Option::is_none")]
    pub delay_scale_t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_convention: Option<AngleConvention>,
    /// Coincidence window in seconds; `inf` accepts everything.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimation_mode: Option<EstimationMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_delays: Option<AliceDelayMode>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<CatalogChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_overrides: Option<BTreeMap<String, f64>>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<EventLayout>,
    /// Bookkeeper speed along the Alice–Bob line, m/s.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boost: Option<f64>,
}

impl RunConfig {
    pub fn new(protocol: ProtocolName) -> Self {
        Self {
            protocol,
            trials: None,
            seed: None,
            first_trial: None,
            out: None,
            format: None,
            workers: None,
            in_theta: None,
            in_phi: None,
            bell_state: None,
            ordering: None,
            teleport_mode: None,
            bob_settings: None,
            bell_mask: None,
            diana_basis: None,
            post_select: None,
            delay_scale_t0: None,
            angle_convention: None,
            window: None,
            estimation_mode: None,
            alice_delays: None,
            catalog: None,
            catalog_overrides: None,
            layout: None,
            boost: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.protocol.is_simulation() {
            if self.seed.is_none() {
                return bad("a seed is required for simulations".into());
            }
            if self.trials == Some(0) {
                return bad("trials must be at least 1".into());
            }
        }
        if let Some(o) = &self.ordering {
            o.parse::<OrderingScenario>().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if let Some(t0) = self.delay_scale_t0 {
            if !(t0 >= 0.0 && t0.is_finite()) {
                return bad(format!("delay_scale_T0 = {t0}"));
            }
        }
        if let Some(w) = self.window {
            if !(w >= 0.0) {
                return bad(format!("window = {w}"));
            }
        }
        if let Some(v) = self.boost {
            if !(v.abs() < crate::spacetime::C) {
                return bad(format!("boost {v} m/s is not below c"));
            }
        }
        if self.protocol == ProtocolName::Link {
            self.body_catalog()?;
        }
        Ok(())
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(10_000)
    }

    pub fn first_trial(&self) -> u64 {
        self.first_trial.unwrap_or(0)
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }

    /// The catalog with any overrides applied by field name.
    pub fn body_catalog(&self) -> Result<BodyCatalog, ConfigError> {
        let base = match self.catalog.unwrap_or_default() {
            CatalogChoice::Paper => BodyCatalog::paper(),
            CatalogChoice::Modern => BodyCatalog::modern(),
        };
        let Some(overrides) = &self.catalog_overrides else { return Ok(base) };
        let mut value = serde_json::to_value(&base).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let obj = value.as_object_mut().expect("catalog is a struct");
        for (k, v) in overrides {
            if !obj.contains_key(k) {
                return Err(ConfigError::Invalid(format!("unknown catalog field {k}")));
            }
            obj.insert(k.clone(), serde_json::json!(v));
        }
        serde_json::from_value(value).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The configuration as recorded in a log header: everything that
    /// determines the output, nothing about where or how fast it ran.
    pub fn canonical(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.out = None;
        c.workers = None;
        c.format = None;
        serde_json::to_value(c).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lhv_keys() {
        let c = RunConfig::from_toml_str(
            r#"
            protocol = "lhv"
            seed = 7
            trials = 1000
            in_theta = 1.0
            in_phi = 0.5
            delay_scale_T0 = 1e-9
            window = inf
            angle_convention = "polarization"
            estimation_mode = "sampled_outcomes"
            alice_delays = "hidden"
            "#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.window, Some(f64::INFINITY));
        assert_eq!(c.estimation_mode, Some(EstimationMode::SampledOutcomes));
        assert_eq!(c.delay_scale_t0, Some(1e-9));
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::from_toml_str("protocol = \"bell\"\nseed = 1\ncolour = 3\n").unwrap_err();
        assert!(e.to_string().contains("colour"));
    }

    #[test]
    fn simulations_need_a_seed() {
        assert!(RunConfig::new(ProtocolName::Bell).validate().is_err());
        assert!(RunConfig::new(ProtocolName::Link).validate().is_ok());
    }

    #[test]
    fn catalog_overrides() {
        let mut c = RunConfig::new(ProtocolName::Link);
        c.catalog_overrides = Some([("r_iss".to_string(), 7e6)].into());
        assert_eq!(c.body_catalog().unwrap().r_iss.0, 7e6);
        c.catalog_overrides = Some([("warp".to_string(), 1.0)].into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn canonical_drops_workers_and_paths() {
        let mut c = RunConfig::new(ProtocolName::Bell);
        c.seed = Some(1);
        c.workers = Some(8);
        c.out = Some("x.jsonl".into());
        let v = c.canonical();
        assert!(v.get("workers").is_none() && v.get("out").is_none());
        assert_eq!(v["seed"], 1);
    }
}
