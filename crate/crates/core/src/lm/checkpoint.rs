//! Binary checkpoint format.
//!
//! Layout (all little-endian): magic `PFLM`, format version `u32`, vocab,
//! embed, window and hidden dims as `u32`, seed `u64`, the stamp (config
//! hash as `u32` length plus UTF-8 bytes, epsilon `f64`, delta `f64`),
//! parameter count `u64`, then the parameters as `f64`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{LmConfig, LmParams};
use super::LmError;

const MAGIC: &[u8; 4] = b"PFLM";
const VERSION: u32 = 1;

/// Provenance recorded next to the weights. `epsilon` is infinite for
/// models trained without a privacy guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStamp {
    pub config_hash: String,
    pub epsilon: f64,
    pub delta: f64,
}

impl CheckpointStamp {
    pub fn non_private(config_hash: impl Into<String>) -> Self {
        Self {
            config_hash: config_hash.into(),
            epsilon: f64::INFINITY,
            delta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: LmConfig,
    pub params: LmParams,
    pub stamp: CheckpointStamp,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let c = &self.config;
        let mut out = Vec::with_capacity(64 + self.params.len() * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for dim in [c.vocab_size, c.embed_dim, c.context_window, c.hidden_dim] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        out.extend_from_slice(&c.seed.to_le_bytes());
        let hash = self.stamp.config_hash.as_bytes();
        out.extend_from_slice(&(hash.len() as u32).to_le_bytes());
        out.extend_from_slice(hash);
        out.extend_from_slice(&self.stamp.epsilon.to_le_bytes());
        out.extend_from_slice(&self.stamp.delta.to_le_bytes());
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for v in &self.params.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, LmError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(LmError::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(LmError::Checkpoint(format!("unsupported version {version}")));
        }
        let config = LmConfig {
            vocab_size: r.u32()? as usize,
            embed_dim: r.u32()? as usize,
            context_window: r.u32()? as usize,
            hidden_dim: r.u32()? as usize,
            seed: r.u64()?,
        };
        config.validate()?;
        let hash_len = r.u32()? as usize;
        let config_hash = String::from_utf8(r.take(hash_len)?.to_vec())
            .map_err(|_| LmError::Checkpoint("config hash is not UTF-8".into()))?;
        let stamp = CheckpointStamp {
            config_hash,
            epsilon: r.f64()?,
            delta: r.f64()?,
        };
        let n = r.u64()? as usize;
        if n != config.num_params() {
            return Err(LmError::ShapeMismatch {
                expected: config.num_params(),
                found: n,
            });
        }
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(r.f64()?);
        }
        if r.pos != bytes.len() {
            return Err(LmError::Checkpoint("trailing bytes".into()));
        }
        let params = LmParams { values };
        params.check(&config)?;
        Ok(Self {
            config,
            params,
            stamp,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], LmError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| LmError::Checkpoint("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, LmError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, LmError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, LmError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<(), LmError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&ckpt.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint, LmError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Checkpoint::from_bytes(&bytes)
}
