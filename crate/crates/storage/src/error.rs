use std::path::PathBuf;

use regen_core::{Dk1Error, MiserError, ParamsError, PrimeField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Miser(#[from] MiserError),
    #[error(transparent)]
    Dk1(#[from] Dk1Error),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
    #[error("byte payloads need q >= 257 so every byte is a symbol, got {0}; use symbol input for smaller fields")]
    FieldTooSmallForBytes(u32),
    #[error("q = {0} does not fit 16-bit chunk symbols")]
    FieldTooLarge(u32),
    #[error("need {needed} nodes, only {available} available")]
    InsufficientNodes { needed: usize, available: usize },
    #[error("node {0} has no chunk")]
    MissingChunk(usize),
    #[error("node {node} out of range for n = {n}")]
    NodeIndex { node: usize, n: usize },
    #[error("invalid helper set: {0}")]
    HelperSet(String),
    #[error("{0} is locked by another process")]
    Locked(PathBuf),
    #[error("{0} already holds an encoded file")]
    AlreadyEncoded(PathBuf),
    #[error("inconsistent store: {0}")]
    Corrupt(String),
}

pub type Result<T> = std::result::Result<T, StoreError>;

pub(crate) trait IoContext<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T>;
}

impl<T> IoContext<T> for std::io::Result<T> {
    fn at(self, path: impl Into<PathBuf>) -> Result<T> {
        self.map_err(|source| StoreError::Io {
            path: path.into(),
            source,
        })
    }
}

pub(crate) fn field(q: u32) -> Result<PrimeField> {
    PrimeField::new(q).map_err(|e| StoreError::InvalidArgs(e.to_string()))
}
