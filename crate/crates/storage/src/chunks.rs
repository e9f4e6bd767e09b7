//! Raw chunk files: little-endian u16 symbols, stripe-major.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::Path;

use crate::error::{IoContext, Result, StoreError};
use crate::manifest::InputMode;

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).at(&tmp)?;
        f.write_all(bytes).at(&tmp)?;
        f.sync_all().at(&tmp)?;
    }
    fs::rename(&tmp, path).at(path)
}

pub fn symbols_to_le(symbols: &[u32]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|&s| u16::try_from(s).expect("symbol fits u16").to_le_bytes())
        .collect()
}

pub fn le_to_symbols(bytes: &[u8]) -> Option<Vec<u32>> {
    if !bytes.len().is_multiple_of(2) {
        return None;
    }
    Some(
        bytes
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
            .collect(),
    )
}

/// Map a payload to field symbols.
pub fn payload_to_symbols(payload: &[u8], mode: InputMode, q: u32) -> Result<Vec<u32>> {
    match mode {
        InputMode::Bytes => Ok(payload.iter().map(|&b| b as u32).collect()),
        InputMode::Symbols => {
            let symbols = le_to_symbols(payload).ok_or_else(|| {
                StoreError::InvalidArgs("symbol input must have even length".into())
            })?;
            if let Some(&bad) = symbols.iter().find(|&&s| s >= q) {
                return Err(StoreError::InvalidArgs(format!(
                    "input symbol {bad} is not below q = {q}"
                )));
            }
            Ok(symbols)
        }
    }
}

/// Inverse of [`payload_to_symbols`].
pub fn symbols_to_payload(symbols: &[u32], mode: InputMode) -> Result<Vec<u8>> {
    match mode {
        InputMode::Bytes => symbols
            .iter()
            .map(|&s| {
                u8::try_from(s)
                    .map_err(|_| StoreError::Corrupt(format!("decoded symbol {s} is not a byte")))
            })
            .collect(),
        InputMode::Symbols => Ok(symbols_to_le(symbols)),
    }
}

pub fn write_chunk(path: &Path, symbols: &[u32]) -> Result<()> {
    write_atomic(path, &symbols_to_le(symbols))
}

/// `None` if the chunk file is absent.
pub fn read_chunk(path: &Path, expected: usize, q: u32) -> Result<Option<Vec<u32>>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e).at(path),
    };
    let symbols = le_to_symbols(&bytes)
        .filter(|s| s.len() == expected)
        .ok_or_else(|| {
            StoreError::Corrupt(format!(
                "{} holds {} bytes, expected {}",
                path.display(),
                bytes.len(),
                2 * expected
            ))
        })?;
    if let Some(&bad) = symbols.iter().find(|&&s| s >= q) {
        return Err(StoreError::Corrupt(format!(
            "{} holds symbol {bad} outside GF({q})",
            path.display()
        )));
    }
    Ok(Some(symbols))
}
