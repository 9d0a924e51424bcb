//! Server configuration: a TOML file, then `BIGBOARD_*` environment
//! overrides on top.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use bigboard_core::journal::FsyncPolicy;
use bigboard_core::sequencer::DEFAULT_RETENTION;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{var}: {message}")]
    Env { var: String, message: String },
    #[error("config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    /// HTTP listen address.
    pub listen: SocketAddr,
    /// Line-protocol listen address; disabled when absent.
    pub stream_listen: Option<SocketAddr>,
    /// Journal file; the board is memory-only when absent.
    pub journal: Option<PathBuf>,
    /// `always`, `never` or `every:<n>`.
    pub fsync: String,
    /// Menu scroll period.
    pub tick_ms: u64,
    pub window_size: usize,
    /// Topology document; the generated Big Enterprise fixture when absent.
    pub topology: Option<PathBuf>,
    pub manager_token: String,
    pub member_token: String,
    /// The one identity manager-token sessions act as.
    pub manager_client_id: String,
    /// Deltas kept in memory for catch-up subscriptions.
    pub retention: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            listen: ([127, 0, 0, 1], 7878).into(),
            stream_listen: None,
            journal: None,
            fsync: "never".into(),
            tick_ms: 2000,
            window_size: 12,
            topology: None,
            manager_token: String::new(),
            member_token: String::new(),
            manager_client_id: "manager".into(),
            retention: DEFAULT_RETENTION,
        }
    }
}

fn env_parse<T: std::str::FromStr>(var: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Env {
        var: var.into(),
        message: e.to_string(),
    })
}

impl ServerConfig {
    /// Parses TOML; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg: Self = toml::from_str(text)?;
        if let Some(base) = base {
            for p in [&mut cfg.journal, &mut cfg.topology].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Reads the file (if any), applies process environment overrides and
    /// validates.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.to_path_buf(),
                    source,
                })?;
                Self::from_toml(&text, path.parent())?
            }
            None => Self::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = lookup("BIGBOARD_LISTEN") {
            self.listen = env_parse("BIGBOARD_LISTEN", &v)?;
        }
        if let Some(v) = lookup("BIGBOARD_STREAM_LISTEN") {
            self.stream_listen = match v.as_str() {
                "" => None,
                v => Some(env_parse("BIGBOARD_STREAM_LISTEN", v)?),
            };
        }
        if let Some(v) = lookup("BIGBOARD_JOURNAL") {
            self.journal = (!v.is_empty()).then(|| v.into());
        }
        if let Some(v) = lookup("BIGBOARD_FSYNC") {
            self.fsync = v;
        }
        if let Some(v) = lookup("BIGBOARD_TICK_MS") {
            self.tick_ms = env_parse("BIGBOARD_TICK_MS", &v)?;
        }
        if let Some(v) = lookup("BIGBOARD_WINDOW_SIZE") {
            self.window_size = env_parse("BIGBOARD_WINDOW_SIZE", &v)?;
        }
        if let Some(v) = lookup("BIGBOARD_TOPOLOGY") {
            self.topology = (!v.is_empty()).then(|| v.into());
        }
        if let Some(v) = lookup("BIGBOARD_MANAGER_TOKEN") {
            self.manager_token = v;
        }
        if let Some(v) = lookup("BIGBOARD_MEMBER_TOKEN") {
            self.member_token = v;
        }
        if let Some(v) = lookup("BIGBOARD_MANAGER_CLIENT_ID") {
            self.manager_client_id = v;
        }
        if let Some(v) = lookup("BIGBOARD_RETENTION") {
            self.retention = env_parse("BIGBOARD_RETENTION", &v)?;
        }
        Ok(())
    }

    pub fn fsync_policy(&self) -> Result<FsyncPolicy, ConfigError> {
        self.fsync.parse().map_err(ConfigError::Invalid)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.fsync_policy()?;
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.manager_token.is_empty() || self.member_token.is_empty() {
            return bad("manager_token and member_token must both be set");
        }
        if self.manager_token == self.member_token {
            return bad("manager_token and member_token must differ");
        }
        if self.manager_client_id.is_empty() {
            return bad("manager_client_id is empty");
        }
        if self.tick_ms == 0 || self.window_size == 0 || self.retention == 0 {
            return bad("tick_ms, window_size and retention must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    const FILE: &str = r#"
listen = "0.0.0.0:9000"
journal = "data/board.journal"
topology = "/etc/bigboard/site.topo"
fsync = "every:16"
manager_token = "m"
member_token = "t"
"#;

    #[test]
    fn file_then_env() {
        let mut cfg = ServerConfig::from_toml(FILE, Some(Path::new("/srv"))).unwrap();
        assert_eq!(cfg.journal.as_deref(), Some(Path::new("/srv/data/board.journal")));
        assert_eq!(cfg.topology.as_deref(), Some(Path::new("/etc/bigboard/site.topo")));
        assert_eq!(cfg.tick_ms, 2000);
        assert_eq!(cfg.fsync_policy().unwrap(), FsyncPolicy::Every(16));

        let env: HashMap<&str, &str> = [
            ("BIGBOARD_TICK_MS", "500"),
            ("BIGBOARD_MEMBER_TOKEN", "crew"),
            ("BIGBOARD_STREAM_LISTEN", "127.0.0.1:9001"),
            ("BIGBOARD_JOURNAL", ""),
        ]
        .into();
        cfg.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.tick_ms, 500);
        assert_eq!(cfg.member_token, "crew");
        assert_eq!(cfg.stream_listen, Some(([127, 0, 0, 1], 9001).into()));
        assert_eq!(cfg.journal, None);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = ServerConfig::from_toml(FILE, None).unwrap();
        let err = cfg.apply_env(|k| (k == "BIGBOARD_TICK_MS").then(|| "soon".to_string()));
        assert!(matches!(err, Err(ConfigError::Env { .. })));
        assert!(ServerConfig::from_toml("bogus = 1", None).is_err());
        assert!(ServerConfig::default().validate().is_err());
        let mut cfg = ServerConfig::from_toml(FILE, None).unwrap();
        cfg.fsync = "sometimes".into();
        assert!(cfg.validate().is_err());
    }
}
