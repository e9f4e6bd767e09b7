use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{IoContext, Result, StoreError};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Miser,
    Dk1,
}

/// How the payload maps to field symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    /// One symbol per byte; needs q >= 257.
    Bytes,
    /// Little-endian u16 symbols, each below q.
    Symbols,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauchyPoints {
    pub xs: Vec<u32>,
    pub ys: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub q: u32,
    pub alpha: usize,
    /// Symbols per stripe (B).
    pub stripe_symbols: usize,
    pub input_mode: InputMode,
    /// Cauchy evaluation points of the unshortened MISER code.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cauchy: Option<CauchyPoints>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortened_by: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_vectors: Option<Vec<Vec<u32>>>,
    /// Current auxiliary vectors; updated by every repair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_vectors: Option<Vec<Vec<u32>>>,
    pub stripes: usize,
    /// Payload length in input units (bytes or symbols).
    pub original_len: u64,
    pub chunks: Vec<String>,
}

impl Manifest {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(StoreError::Corrupt(m.to_string()));
        if self.format_version != FORMAT_VERSION {
            return bad(&format!(
                "unsupported format_version {}",
                self.format_version
            ));
        }
        if self.chunks.len() != self.n {
            return bad("chunk list length differs from n");
        }
        if self.stripe_symbols != self.k * self.alpha {
            return bad("stripe_symbols differs from k·α");
        }
        if (self.stripes as u64) * (self.stripe_symbols as u64) < self.original_len {
            return bad("stripes too few for the payload");
        }
        let is_dk1 = self.family == Family::Dk1;
        if self.r_vectors.is_some() != is_dk1 || self.p_vectors.is_some() != is_dk1 {
            return bad("p/r vectors must be present exactly for dk1");
        }
        if self.cauchy.is_some() == is_dk1 {
            return bad("Cauchy points must be present exactly for miser");
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).at(&path)?;
        let m: Manifest = serde_json::from_str(&text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        crate::chunks::write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn chunk_name(node: usize) -> String {
        format!("node-{node:03}.chunk")
    }
}
