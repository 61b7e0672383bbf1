use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gateway::GatewayStats;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Machine-readable record of one CLI invocation, printed to stderr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub jobs: usize,
    pub gateway_mode: String,
    pub gateway: GatewayStats,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config_hash: String, jobs: usize, gateway_mode: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config_hash,
            seed: None,
            jobs,
            gateway_mode: gateway_mode.into(),
            gateway: GatewayStats::default(),
            warnings: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut h = Sha256::new();
        let mut buf = [0u8; 1 << 16];
        let mut bytes = 0u64;
        loop {
            let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
            if n == 0 {
                break;
            }
            h.update(&buf[..n]);
            bytes += n as u64;
        }
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(h.finalize()),
            bytes,
        });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        log::warn!("{message}");
        self.warnings.push(message);
    }
}
