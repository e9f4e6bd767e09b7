//! Explicit minimum-storage regenerating codes over prime fields.
//!
//! * [`gf`] and [`linalg`]: prime-field arithmetic and dense matrices.
//! * [`cauchy`]: Cauchy matrices used to build the MISER parity generators.
//! * [`miser`]: the MISER code (`d >= 2k - 1`) with exact repair of
//!   systematic nodes, a staged decoder and shortening.
//! * [`dk1`]: the `d = k + 1` code with approximately-exact repair.
//! * [`verifier`]: parameter arithmetic and structural checks on any code
//!   given as nodal generator matrices.

pub mod cauchy;
pub mod dk1;
pub mod gf;
pub mod linalg;
pub mod miser;
pub mod params;
pub mod verifier;

pub use cauchy::{CauchyError, CauchySpec};
pub use dk1::{Dk1Code, Dk1Error, Dk1RepairPlan};
pub use gf::{FieldElement, GfError, PrimeField};
pub use linalg::{LinalgError, Matrix, Permutation};
pub use miser::{DecodeTrace, MiserCode, MiserError, RepairSymbol, Sigma};
pub use params::{CodeParams, ParamsError};
pub use verifier::{AlignmentReport, LinearCodeView, MdsReport, VerifyError};
