//! The MISER code: a systematic MDS code with `d = 2k - 1` (native form
//! `n = 2k`, `d = n - 1`) whose parity generators align interference so that
//! any systematic node is exactly repaired from one symbol per helper.
//!
//! Nodes and message blocks are zero-based. Nodes `0..k` are systematic and
//! node `ℓ < k` stores message block `u_ℓ` verbatim; nodes `k..n` are parity.
//! Each node stores `α` symbols and its generator `G^(m)` is a `B × α` matrix
//! made of `k` components of size `α × α`.
//!
//! Parity node `m` uses column `c = m - k` of an `α × (n - k)` Cauchy matrix
//! `Ψ`. Column `j` of component `i` of its generator is `Σ_i ψ^(m)` when
//! `i = j` and `ψ_i^(m) e_j` otherwise, where `Σ_i` is diagonal
//! (`Σ_i = εI` in the standard construction).
//!
//! Codes with `n > 2k` or `d > 2k - 1` are obtained by shortening a code
//! with `k' = α`: the first `α - k` systematic nodes of the larger code are
//! pinned to zero and dropped. A shortened code keeps a handle on the code
//! it was cut from and routes repair and decoding through it.

mod decode;
mod repair;

use std::sync::Arc;

use itertools::Itertools;

use thiserror::Error;

use crate::cauchy::{CauchyError, CauchySpec};
use crate::gf::PrimeField;
use crate::linalg::{LinalgError, Matrix};
use crate::params::{CodeParams, ParamsError};

pub use decode::DecodeTrace;
pub use repair::RepairSymbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MiserError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("field too small: need q >= {needed}, got {q}")]
    FieldTooSmall { needed: usize, q: u32 },
    #[error(transparent)]
    Cauchy(#[from] CauchyError),
    #[error("invalid diagonal scaling: {0}")]
    InvalidSigma(String),
    #[error("expected {expected} symbols, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("symbol {value} is not a residue of GF({q})")]
    SymbolOutOfField { value: u32, q: u32 },
    #[error("node {node} out of range for n = {n}")]
    NodeIndex { node: usize, n: usize },
    #[error("node {0} listed more than once")]
    DuplicateNode(usize),
    #[error("node {0} is a parity node; optimal exact repair only covers systematic nodes")]
    UnsupportedParityRepair(usize),
    #[error("expected {expected} helper symbols, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("invalid helper set: {0}")]
    HelperSet(String),
    #[error("decoder invariant violated: {0}")]
    Corruption(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, MiserError>;

/// Diagonal scalings `Σ_i = diag(ε_{i,0}, …, ε_{i,α-1})` applied to the
/// desired component of parity generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sigma {
    entries: Vec<Vec<u32>>,
}

impl Sigma {
    /// `Σ_i = εI` for every `i`. Requires `ε ≠ 0` and `ε² ≠ 1`.
    pub fn uniform(field: PrimeField, alpha: usize, epsilon: u32) -> Result<Self> {
        Self::from_diagonals(field, vec![vec![epsilon; alpha]; alpha])
    }

    /// `diagonals[i][j] = ε_{i,j}`. Requires every `ε_{i,j} ≠ 0` and
    /// `ε_{i,j} ε_{j,i} ≠ 1` for `i ≠ j`.
    pub fn from_diagonals(field: PrimeField, diagonals: Vec<Vec<u32>>) -> Result<Self> {
        let alpha = diagonals.len();
        for (i, row) in diagonals.iter().enumerate() {
            if row.len() != alpha {
                return Err(MiserError::InvalidSigma(format!(
                    "Σ_{i} has {} entries, expected {alpha}",
                    row.len()
                )));
            }
            for (j, &e) in row.iter().enumerate() {
                if !field.contains(e) {
                    return Err(MiserError::SymbolOutOfField {
                        value: e,
                        q: field.modulus(),
                    });
                }
                if e == 0 {
                    return Err(MiserError::InvalidSigma(format!("ε_({i},{j}) = 0")));
                }
            }
        }
        for (i, j) in (0..alpha).tuple_combinations() {
            if field.mul(diagonals[i][j], diagonals[j][i]) == 1 {
                return Err(MiserError::InvalidSigma(format!(
                    "ε_({i},{j}) · ε_({j},{i}) = 1"
                )));
            }
        }
        Ok(Self { entries: diagonals })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i][j]
    }

    pub fn alpha(&self) -> usize {
        self.entries.len()
    }

    /// The common value when every `Σ_i` is the same multiple of identity.
    pub fn as_uniform(&self) -> Option<u32> {
        let first = *self.entries.first()?.first()?;
        self.entries
            .iter()
            .flatten()
            .all(|&e| e == first)
            .then_some(first)
    }
}

/// Smallest `ε` with `ε ≠ 0` and `ε² ≠ 1`; exists whenever `q >= 4`.
pub fn default_epsilon(field: PrimeField) -> Option<u32> {
    (2..field.modulus()).find(|&e| field.mul(e, e) != 1)
}

#[derive(Debug, Clone)]
pub struct MiserCode {
    params: CodeParams,
    field: PrimeField,
    cauchy: CauchySpec,
    psi: Matrix,
    sigma: Sigma,
    generators: Vec<Matrix>,
    shortened_by: usize,
    parent: Option<Arc<MiserCode>>,
}

impl MiserCode {
    /// Native `[2k, k, 2k - 1]` code with the default Cauchy matrix and the
    /// smallest admissible `ε`.
    pub fn construct(k: usize, field: PrimeField) -> Result<Self> {
        let alpha = k;
        let needed = (alpha + k).max(4);
        if field.size() < needed {
            return Err(MiserError::FieldTooSmall {
                needed,
                q: field.modulus(),
            });
        }
        let cauchy = CauchySpec::default_for(alpha, k, field)?;
        let eps = default_epsilon(field).expect("q >= 4");
        Self::with_cauchy(k, cauchy, Sigma::uniform(field, alpha, eps)?)
    }

    /// Unshortened code with `α = k`, `d = 2k - 1` and `n = k + t`, where
    /// the Cauchy spec is `k × t` (`t >= k`). With `t > k` repair requires
    /// the helper set to contain every surviving systematic node.
    pub fn with_cauchy(k: usize, cauchy: CauchySpec, sigma: Sigma) -> Result<Self> {
        let field = cauchy.field();
        let (s, t) = cauchy.shape();
        let alpha = k;
        if s != alpha {
            return Err(MiserError::Shape {
                expected: alpha,
                got: s,
            });
        }
        if sigma.alpha() != alpha {
            return Err(MiserError::InvalidSigma(format!(
                "expected {alpha} diagonals, got {}",
                sigma.alpha()
            )));
        }
        if t < k {
            return Err(ParamsError::Unsupported(format!(
                "need at least k = {k} parity nodes, got {t}"
            ))
            .into());
        }
        let n = k + t;
        let params = CodeParams::new(n, k, 2 * k - 1)?;
        let psi = cauchy.build();
        let generators = (0..n)
            .map(|m| Self::node_generator(field, &params, &psi, &sigma, m))
            .collect();
        Ok(Self {
            params,
            field,
            cauchy,
            psi,
            sigma,
            generators,
            shortened_by: 0,
            parent: None,
        })
    }

    /// Native code with caller-chosen diagonal scalings `Σ_i`.
    pub fn construct_sigma_variant(
        k: usize,
        field: PrimeField,
        diagonals: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let cauchy = CauchySpec::default_for(k, k, field)?;
        let sigma = Sigma::from_diagonals(field, diagonals)?;
        Self::with_cauchy(k, cauchy, sigma)
    }

    /// Any `[n, k, d]` with `2k - 1 <= d <= n - 1`: builds the
    /// `[n + i, k + i, d + i]` code with `i = d - 2k + 1` (so `k + i = α`)
    /// and shortens it by `i`. For `d = n - 1` the larger code is native.
    pub fn construct_general(params: CodeParams, field: PrimeField) -> Result<Self> {
        let CodeParams { n, k, d, alpha, .. } = params;
        if d + 1 < 2 * k {
            return Err(ParamsError::Unsupported(format!(
                "MISER needs d >= 2k - 1, got k={k} d={d}"
            ))
            .into());
        }
        let needed = (alpha + n - k).max(4);
        if field.size() < needed {
            return Err(MiserError::FieldTooSmall {
                needed,
                q: field.modulus(),
            });
        }
        let shorten_by = alpha - k;
        let cauchy = CauchySpec::default_for(alpha, n - k, field)?;
        let eps = default_epsilon(field).expect("q >= 4");
        let base = Self::with_cauchy(alpha, cauchy, Sigma::uniform(field, alpha, eps)?)?;
        base.shorten(shorten_by)
    }

    /// Derive the `[n - i, k - i, d - i]` code by pinning the first `i`
    /// message blocks to zero and dropping their systematic nodes.
    pub fn shorten(&self, i: usize) -> Result<Self> {
        if i >= self.params.k {
            return Err(ParamsError::Unsupported(format!(
                "cannot shorten by {i} a code with k = {}",
                self.params.k
            ))
            .into());
        }
        if i == 0 {
            return Ok(self.clone());
        }
        let root = Arc::new(self.root().clone());
        let total = self.shortened_by + i;
        let rp = root.params;
        let params = CodeParams::new(rp.n - total, rp.k - total, rp.d - total)?;
        debug_assert_eq!(params.alpha, rp.alpha);
        let alpha = rp.alpha;
        let rows: Vec<usize> = (total * alpha..rp.file_size).collect();
        let cols: Vec<usize> = (0..alpha).collect();
        let generators = (total..rp.n)
            .map(|m| root.generators[m].submatrix(&rows, &cols))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self {
            params,
            field: self.field,
            cauchy: self.cauchy.clone(),
            psi: self.psi.clone(),
            sigma: self.sigma.clone(),
            generators,
            shortened_by: total,
            parent: Some(root),
        })
    }

    fn node_generator(
        field: PrimeField,
        params: &CodeParams,
        psi: &Matrix,
        sigma: &Sigma,
        m: usize,
    ) -> Matrix {
        let (k, alpha) = (params.k, params.alpha);
        let mut g = Matrix::zeros(field, params.file_size, alpha);
        if m < k {
            for r in 0..alpha {
                g.set(m * alpha + r, r, 1);
            }
            return g;
        }
        let c = m - k;
        for i in 0..k {
            for j in 0..alpha {
                if i == j {
                    for r in 0..alpha {
                        g.set(i * alpha + r, j, field.mul(sigma.get(i, r), psi.get(r, c)));
                    }
                } else {
                    g.set(i * alpha + j, j, psi.get(i, c));
                }
            }
        }
        g
    }

    /// The unshortened code this one was derived from (itself if none).
    pub fn root(&self) -> &MiserCode {
        self.parent.as_deref().unwrap_or(self)
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn psi(&self) -> &Matrix {
        &self.psi
    }

    pub fn cauchy(&self) -> &CauchySpec {
        &self.cauchy
    }

    pub fn sigma(&self) -> &Sigma {
        &self.sigma
    }

    /// `ε` for the standard construction, `None` for a general `Σ` variant.
    pub fn epsilon(&self) -> Option<u32> {
        self.sigma.as_uniform()
    }

    pub fn shortened_by(&self) -> usize {
        self.shortened_by
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn generator(&self, node: usize) -> &Matrix {
        &self.generators[node]
    }

    /// Component `i` (rows `iα..(i+1)α`) of node `m`'s generator.
    pub fn component(&self, node: usize, i: usize) -> Matrix {
        let a = self.params.alpha;
        let rows: Vec<usize> = (i * a..(i + 1) * a).collect();
        let cols: Vec<usize> = (0..a).collect();
        self.generators[node]
            .submatrix(&rows, &cols)
            .expect("component in range")
    }

    /// Global kernel of the `j`th symbol stored at `node`.
    pub fn kernel(&self, node: usize, j: usize) -> Vec<u32> {
        self.generators[node].col(j)
    }

    pub fn is_systematic(&self, node: usize) -> bool {
        node < self.params.k
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.params.n {
            return Err(MiserError::NodeIndex {
                node,
                n: self.params.n,
            });
        }
        Ok(())
    }

    pub(crate) fn check_symbols(&self, symbols: &[u32], expected: usize) -> Result<()> {
        if symbols.len() != expected {
            return Err(MiserError::Shape {
                expected,
                got: symbols.len(),
            });
        }
        if let Some(&v) = symbols.iter().find(|&&v| !self.field.contains(v)) {
            return Err(MiserError::SymbolOutOfField {
                value: v,
                q: self.field.modulus(),
            });
        }
        Ok(())
    }

    /// Contents of one node: `uᵗ G^(node)`.
    pub fn encode_node(&self, message: &[u32], node: usize) -> Result<Vec<u32>> {
        self.check_node(node)?;
        self.check_symbols(message, self.params.file_size)?;
        let a = self.params.alpha;
        if self.is_systematic(node) {
            return Ok(message[node * a..(node + 1) * a].to_vec());
        }
        Ok(self.generators[node].left_mul_vec(message)?)
    }

    /// Contents of every node, `n` rows of `α` symbols.
    pub fn encode(&self, message: &[u32]) -> Result<Vec<Vec<u32>>> {
        (0..self.params.n)
            .map(|m| self.encode_node(message, m))
            .collect()
    }
}
