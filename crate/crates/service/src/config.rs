use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;

pub const DEFAULT_PORT: u16 = 7423;
pub const DEFAULT_BIND: SocketAddr = SocketAddr::new(IpAddr::V4(Ipv4Addr::LOCALHOST), DEFAULT_PORT);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreConfig {
    pub data_dir: PathBuf,
    pub bind_address: SocketAddr,
    pub read_only: bool,
    /// Bearer token; mandatory when binding beyond loopback.
    pub token: Option<String>,
    /// Browser assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl StoreConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        StoreConfig {
            data_dir: data_dir.into(),
            bind_address: DEFAULT_BIND,
            read_only: false,
            token: None,
            static_dir: None,
        }
    }

    pub fn read_only(mut self, read_only: bool) -> Self {
        self.read_only = read_only;
        self
    }

    /// Refuses non-loopback binds that carry no token.
    pub fn check_exposure(&self) -> Result<(), ConfigError> {
        let token_set = self.token.as_deref().is_some_and(|t| !t.is_empty());
        if !self.bind_address.ip().is_loopback() && !token_set {
            return Err(ConfigError::TokenRequired(self.bind_address));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("binding to {0} exposes the service beyond this machine; set a bearer token")]
    TokenRequired(SocketAddr),
}
