//! Node configuration: a TOML file with `PAUSE_*` environment overrides.
//! Relative paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use pause_core::crypto::{GroupKey, KeyRegistry, Keypair};
use pause_core::gate::GateConfig;
use pause_core::picture::PictureConfig;
use pause_core::scenario::Role;
use pause_core::trust::SourceRegistry;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("environment override {var}: {reason}")]
    Env { var: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeerConfig {
    pub id: String,
    /// Base URL of the peer's HTTP API.
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConfig {
    pub id: String,
    /// File holding the 32-byte AES key as hex.
    pub key_file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub node_id: String,
    pub role: Role,
    #[serde(default = "default_listen")]
    pub listen: String,
    /// File holding the node's 32-byte Ed25519 seed as hex.
    pub signing_key: PathBuf,
    /// JSON key registry (`{"keys": {id: public key hex}}`) of known originators and nodes.
    #[serde(default)]
    pub registry: Option<PathBuf>,
    /// JSON source registry with profiles and codebook.
    #[serde(default)]
    pub sources: Option<PathBuf>,
    #[serde(default)]
    pub groups: Vec<GroupConfig>,
    #[serde(default)]
    pub peers: Vec<PeerConfig>,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    /// Anonymization privacy budget for civilian relay submissions.
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "default_merge_radius")]
    pub merge_radius_m: f64,
    /// Distance decay of threat influence on routes.
    #[serde(default = "two")]
    pub lambda_km: f64,
    #[serde(default = "default_similarity")]
    pub similarity_threshold: f64,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    /// Period of the background peer sync; 0 disables it.
    #[serde(default = "default_sync_interval")]
    pub sync_interval_ms: u64,
    /// Fixes the anonymization noise stream; drawn from the OS when absent.
    #[serde(default)]
    pub anonymize_seed: Option<u64>,
    /// Capacity of each event stream's queue before a consumer is dropped.
    #[serde(default = "default_event_buffer")]
    pub event_buffer: usize,
    #[serde(default)]
    pub gate: GateConfig,
}

fn default_listen() -> String {
    "127.0.0.1:7400".into()
}
fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn default_merge_radius() -> f64 {
    PictureConfig::default().merge_radius_m
}
fn default_similarity() -> f64 {
    0.9
}
fn default_block_size() -> usize {
    8
}
fn default_sync_interval() -> u64 {
    5000
}
fn default_event_buffer() -> usize {
    256
}

fn parse<T: FromStr>(var: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Env { var: var.to_owned(), reason: e.to_string() })
}

impl NodeConfig {
    /// Reads the file and applies overrides from the process environment.
    pub fn load(path: &Path) -> Result<NodeConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_owned(), reason: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        NodeConfig::from_toml(&text, base, std::env::vars())
    }

    pub fn from_toml(
        text: &str,
        base: &Path,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<NodeConfig, ConfigError> {
        let mut config: NodeConfig = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        config.apply_env(env)?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    /// `PAUSE_PEERS` is a comma-separated list of `id=url` pairs replacing the peer list.
    pub fn apply_env(&mut self, env: impl IntoIterator<Item = (String, String)>) -> Result<(), ConfigError> {
        for (var, value) in env {
            let Some(key) = var.strip_prefix("PAUSE_") else { continue };
            match key {
                "NODE_ID" => self.node_id = value,
                "ROLE" => self.role = parse(&var, &value)?,
                "LISTEN" => self.listen = value,
                "SIGNING_KEY" => self.signing_key = value.into(),
                "REGISTRY" => self.registry = Some(value.into()),
                "SOURCES" => self.sources = Some(value.into()),
                "DATA_DIR" => self.data_dir = value.into(),
                "EPSILON" => self.epsilon = parse(&var, &value)?,
                "MERGE_RADIUS_M" => self.merge_radius_m = parse(&var, &value)?,
                "LAMBDA_KM" => self.lambda_km = parse(&var, &value)?,
                "SIMILARITY_THRESHOLD" => self.similarity_threshold = parse(&var, &value)?,
                "BLOCK_SIZE" => self.block_size = parse(&var, &value)?,
                "SYNC_INTERVAL_MS" => self.sync_interval_ms = parse(&var, &value)?,
                "ANONYMIZE_SEED" => self.anonymize_seed = Some(parse(&var, &value)?),
                "PEERS" => {
                    self.peers = value
                        .split(',')
                        .filter(|p| !p.trim().is_empty())
                        .map(|p| match p.split_once('=') {
                            Some((id, url)) => Ok(PeerConfig { id: id.trim().into(), url: url.trim().into() }),
                            None => Err(ConfigError::Env { var: var.clone(), reason: format!("`{p}` is not id=url") }),
                        })
                        .collect::<Result<_, _>>()?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.signing_key);
        join(&mut self.data_dir);
        if let Some(p) = self.registry.as_mut() {
            join(p);
        }
        if let Some(p) = self.sources.as_mut() {
            join(p);
        }
        for g in &mut self.groups {
            join(&mut g.key_file);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.node_id.is_empty() {
            return bad("node_id must not be empty".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon {} must be positive", self.epsilon));
        }
        if !(self.merge_radius_m >= 0.0 && self.merge_radius_m.is_finite()) {
            return bad(format!("merge_radius_m {} must be non-negative", self.merge_radius_m));
        }
        if !(self.lambda_km > 0.0 && self.lambda_km.is_finite()) {
            return bad(format!("lambda_km {} must be positive", self.lambda_km));
        }
        if self.block_size == 0 {
            return bad("block_size must be positive".into());
        }
        if self.event_buffer == 0 {
            return bad("event_buffer must be positive".into());
        }
        if let Some(p) = self.peers.iter().find(|p| p.id == self.node_id) {
            return bad(format!("peer `{}` is this node", p.id));
        }
        Ok(())
    }

    pub fn picture_config(&self) -> PictureConfig {
        PictureConfig { merge_radius_m: self.merge_radius_m, ..PictureConfig::default() }
    }

    pub fn keypair(&self) -> Result<Keypair, ConfigError> {
        Ok(Keypair::from_seed(read_key(&self.signing_key)?))
    }

    pub fn group_keys(&self) -> Result<Vec<GroupKey>, ConfigError> {
        self.groups.iter().map(|g| Ok(GroupKey { group_id: g.id.clone(), key: read_key(&g.key_file)? })).collect()
    }

    pub fn key_registry(&self) -> Result<KeyRegistry, ConfigError> {
        match &self.registry {
            None => Ok(KeyRegistry::new()),
            Some(path) => {
                serde_json::from_str(&read(path)?).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))
            }
        }
    }

    pub fn source_registry(&self) -> Result<SourceRegistry, ConfigError> {
        match &self.sources {
            None => Ok(SourceRegistry::default()),
            Some(path) => SourceRegistry::from_json(&read(path)?)
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display()))),
        }
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.to_owned(), reason: e.to_string() })
}

/// Reads a 32-byte key stored as hex, surrounding whitespace ignored.
pub fn read_key(path: &Path) -> Result<[u8; 32], ConfigError> {
    let text = read(path)?;
    let bytes = hex::decode(text.trim()).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
    bytes.try_into().map_err(|_| ConfigError::Invalid(format!("{}: key must be 32 bytes", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        node_id = "icrc-geneva"
        role = "ICRC"
        signing_key = "keys/node.key"
    "#;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_and_relative_paths() {
        let c = NodeConfig::from_toml(MINIMAL, Path::new("/etc/pause"), Vec::new()).unwrap();
        assert_eq!(c.listen, "127.0.0.1:7400");
        assert_eq!(c.signing_key, PathBuf::from("/etc/pause/keys/node.key"));
        assert_eq!(c.data_dir, PathBuf::from("/etc/pause/data"));
        assert_eq!((c.epsilon, c.merge_radius_m, c.lambda_km, c.block_size), (1.0, 500.0, 2.0, 8));
        assert_eq!(c.role, Role::Icrc);
    }

    #[test]
    fn env_overrides_win() {
        let c = NodeConfig::from_toml(
            MINIMAL,
            Path::new("."),
            env(&[
                ("PAUSE_EPSILON", "0.5"),
                ("PAUSE_LAMBDA_KM", "3"),
                ("PAUSE_MERGE_RADIUS_M", "250"),
                ("PAUSE_ROLE", "Humanitarian"),
                ("PAUSE_PEERS", "a=http://a:1, b=http://b:2"),
                ("HOME", "/root"),
            ]),
        )
        .unwrap();
        assert_eq!((c.epsilon, c.lambda_km, c.merge_radius_m), (0.5, 3.0, 250.0));
        assert_eq!(c.role, Role::Humanitarian);
        assert_eq!(c.peers.len(), 2);
        assert_eq!(c.peers[1], PeerConfig { id: "b".into(), url: "http://b:2".into() });
    }

    #[test]
    fn bad_override_names_the_variable() {
        let err = NodeConfig::from_toml(MINIMAL, Path::new("."), env(&[("PAUSE_EPSILON", "lots")])).unwrap_err();
        assert!(matches!(err, ConfigError::Env { ref var, .. } if var == "PAUSE_EPSILON"));
    }

    #[test]
    fn invalid_values_rejected() {
        for (k, v) in [("PAUSE_EPSILON", "0"), ("PAUSE_LAMBDA_KM", "-1"), ("PAUSE_BLOCK_SIZE", "0")] {
            assert!(NodeConfig::from_toml(MINIMAL, Path::new("."), env(&[(k, v)])).is_err(), "{k}={v}");
        }
        assert!(NodeConfig::from_toml("node_id = 'x'", Path::new("."), Vec::new()).is_err());
    }
}
