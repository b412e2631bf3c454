use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use embedforge_core::prompts::{ParamDomains, Tier};
use embedforge_core::Category;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_in_flight() -> usize {
    4
}
fn default_timeout() -> f64 {
    60.0
}
fn default_retries() -> u32 {
    3
}
fn default_backoff() -> u64 {
    250
}
fn default_temperature() -> f64 {
    1.0
}

/// Model and limits for one hardness tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierRoute {
    pub model: String,
    pub endpoint: String,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Retries after the first attempt, for schema and transient failures alike.
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Base delay before a transport retry; doubles per retry.
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default)]
    pub price_in_per_1k: f64,
    #[serde(default)]
    pub price_out_per_1k: f64,
}

impl TierRoute {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    pub fn cost(&self, prompt_tokens: u64, completion_tokens: u64) -> f64 {
        (prompt_tokens as f64 * self.price_in_per_1k + completion_tokens as f64 * self.price_out_per_1k) / 1000.0
    }

    fn validate(&self, tier: Tier) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(format!("route.{}: {why}", tier.as_str())));
        if self.model.is_empty() || self.endpoint.is_empty() {
            return bad("model and endpoint are required");
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be at least 1");
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive");
        }
        if !(self.price_in_per_1k >= 0.0 && self.price_out_per_1k >= 0.0) {
            return bad("prices must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRoute {
    pub nano: TierRoute,
    pub mini: TierRoute,
    pub full: TierRoute,
}

impl ModelRoute {
    pub fn get(&self, tier: Tier) -> &TierRoute {
        match tier {
            Tier::Nano => &self.nano,
            Tier::Mini => &self.mini,
            Tier::Full => &self.full,
        }
    }

    /// The same endpoint and limits for every tier.
    pub fn uniform(route: TierRoute) -> Self {
        ModelRoute { nano: route.clone(), mini: route.clone(), full: route }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Soft spending limit in the price unit of the route.
    #[serde(default)]
    pub budget: Option<f64>,
    pub targets: BTreeMap<Category, usize>,
    pub route: ModelRoute,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        for tier in Tier::ALL {
            self.route.get(tier).validate(tier)?;
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::Config("temperature must be non-negative".into()));
        }
        if let Some(b) = self.budget {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::Config("budget must be non-negative".into()));
            }
        }
        Ok(())
    }
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn load_campaign_config(path: &Path) -> Result<CampaignConfig> {
    let cfg: CampaignConfig = read_toml(path)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_param_domains(path: &Path) -> Result<ParamDomains> {
    let d: ParamDomains = read_toml(path)?;
    d.validate()?;
    Ok(d)
}
