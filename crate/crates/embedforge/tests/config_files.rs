//! The shipped config files parse and match the built-in defaults.

use std::path::PathBuf;

use embedforge::generation::{load_campaign_config, load_param_domains};
use embedforge_core::prompts::ParamDomains;

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("config")
}

#[test]
#[ignore = "rewrites config/param_domains.toml from the defaults"]
fn regenerate_param_domains() {
    let text = toml::to_string_pretty(&ParamDomains::default()).unwrap();
    let header = "# Parameter domains for prompt sampling. Every templated parameter is drawn\n# uniformly from its list; the two flags are Bernoulli draws.\n\n";
    std::fs::write(config_dir().join("param_domains.toml"), format!("{header}{text}")).unwrap();
}

#[test]
fn param_domains_file_matches_defaults() {
    let d = load_param_domains(&config_dir().join("param_domains.toml")).unwrap();
    assert_eq!(d, ParamDomains::default());
}

#[test]
fn example_campaign_parses() {
    let cfg = load_campaign_config(&config_dir().join("campaign.example.toml")).unwrap();
    assert_eq!(cfg.temperature, 1.0);
    assert_eq!(cfg.targets.values().sum::<usize>(), 500_000);
}
