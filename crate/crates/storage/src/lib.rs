//! File striping, chunk storage, repair and bandwidth accounting on top of
//! `regen-core`.
//!
//! A store directory holds `manifest.json`, one chunk file per node
//! (`node-XXX.chunk`, little-endian u16 symbols, stripe-major) and an
//! append-only `ledger.jsonl`. Mutating commands hold `.regen.lock`.

pub mod chunks;
pub mod codec;
pub mod error;
pub mod ledger;
pub mod lock;
pub mod manifest;
pub mod store;

pub use codec::Codec;
pub use error::{Result, StoreError};
pub use ledger::{EventKind, LedgerEvent, RepairLine, RepairMode, Stats};
pub use manifest::{CauchyPoints, Family, InputMode, Manifest};
pub use store::{
    encode_bytes, encode_file, stats, EncodeOptions, MdsSummary, RepairOutcome, Store, SubsetCheck,
    VerifyReport,
};
