use thiserror::Error;

use crate::verifier::msr_params;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamsError {
    #[error("need 1 <= k <= d <= n - 1, got n={n} k={k} d={d}")]
    Range { n: usize, k: usize, d: usize },
    #[error("per-node storage alpha = d - k + 1 must be at least 2, got {0}")]
    AlphaTooSmall(usize),
    #[error("{0}")]
    Unsupported(String),
}

/// Parameters of an `[n, k, d]` MSR code with `β = 1`:
/// `α = d - k + 1` symbols per node and `B = kα` message symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub file_size: usize,
}

impl CodeParams {
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self, ParamsError> {
        let (alpha, file_size) = msr_params(n, k, d, 1)?;
        if alpha < 2 {
            return Err(ParamsError::AlphaTooSmall(alpha));
        }
        Ok(Self {
            n,
            k,
            d,
            alpha,
            file_size,
        })
    }

    /// Symbols downloaded to repair one node (`dβ`, `β = 1`).
    pub fn repair_bandwidth(&self) -> usize {
        self.d
    }

    /// Per-helper download.
    pub fn beta(&self) -> usize {
        1
    }
}
