//! Append-only JSON-lines record of store events.

use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{IoContext, Result};

pub const LEDGER_FILE: &str = "ledger.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Encode,
    Fail,
    Repair,
    Reconstruct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairMode {
    /// `d` symbols per stripe.
    Optimal,
    /// Full decode from `k` nodes, `kα` symbols per stripe.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub event: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(default)]
    pub helpers: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RepairMode>,
    pub stripes: usize,
    pub symbols_per_stripe: usize,
    pub symbols_downloaded: u64,
    /// B, the per-stripe cost of downloading the whole stripe.
    pub baseline_per_stripe: usize,
}

pub fn append(dir: &Path, event: &LedgerEvent) -> Result<()> {
    let path = dir.join(LEDGER_FILE);
    let mut line = serde_json::to_string(event)?;
    line.push('\n');
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .at(&path)?;
    f.write_all(line.as_bytes()).at(&path)
}

pub fn read(dir: &Path) -> Result<Vec<LedgerEvent>> {
    let path = dir.join(LEDGER_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e).at(&path),
    };
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Into::into))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepairLine {
    pub node: usize,
    pub mode: Option<RepairMode>,
    pub symbols_per_stripe: usize,
    pub baseline_per_stripe: usize,
    pub stripes: usize,
    pub symbols_downloaded: u64,
}

/// Totals over all repair events.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub events: usize,
    pub failures: usize,
    pub repairs: usize,
    pub optimal_repairs: usize,
    pub fallback_repairs: usize,
    pub repair_symbols: u64,
    /// What the same repairs would cost downloading B symbols per stripe.
    pub baseline_symbols: u64,
    pub per_repair: Vec<RepairLine>,
}

impl Stats {
    pub fn from_events(events: &[LedgerEvent]) -> Self {
        let mut s = Stats {
            events: events.len(),
            ..Default::default()
        };
        for e in events {
            match e.event {
                EventKind::Fail => s.failures += 1,
                EventKind::Repair => {
                    s.repairs += 1;
                    match e.mode {
                        Some(RepairMode::Optimal) => s.optimal_repairs += 1,
                        Some(RepairMode::Fallback) => s.fallback_repairs += 1,
                        None => {}
                    }
                    s.repair_symbols += e.symbols_downloaded;
                    s.baseline_symbols += (e.baseline_per_stripe * e.stripes) as u64;
                    s.per_repair.push(RepairLine {
                        node: e.node.unwrap_or_default(),
                        mode: e.mode,
                        symbols_per_stripe: e.symbols_per_stripe,
                        baseline_per_stripe: e.baseline_per_stripe,
                        stripes: e.stripes,
                        symbols_downloaded: e.symbols_downloaded,
                    });
                }
                EventKind::Encode | EventKind::Reconstruct => {}
            }
        }
        s
    }
}
