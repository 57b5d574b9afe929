//! Exact computation in the generalized Thompson's groups `F_n` and `T_n`.
//!
//! Elements are labelled n-ary tree pairs: a source tree, a target tree with
//! the same number of carets, and a cyclic rotation offset. Everything is
//! computed exactly — tree surgery for the group operations, arbitrary
//! precision rationals for the piecewise-linear circle maps that serve as the
//! semantic oracle.
//!
//! The main pieces:
//!
//! * [`ntree`] — rooted n-ary trees, expansion/contraction, joint expansions,
//!   and the tree ↔ n-adic subdivision correspondence.
//! * [`element`] — group elements of `T_n` as reduced tree pairs with a
//!   rotation; multiplication, inversion, orders, torsion balanced forms.
//! * [`plmap`] — exact piecewise-linear homeomorphisms of the circle, the
//!   ground truth every tree-pair operation is checked against.
//! * [`generators`] — the `x_i` and `c_j` families, the generating sets
//!   `Σ`, `Σ_n`, `Σ'`, and machine-checkable relation suites.
//! * [`words`] — pcq factorization, pumping rewrites of torsion powers, and
//!   constructive word-length upper bounds over the finite set `Σ`.
//! * [`metrics`] — breadth-first Cayley balls with exact word lengths, and
//!   sweep reports for the word-length inequalities.
//! * [`embed`] — caret-replacement embeddings `T_n → T_2` (and
//!   `T_{l(m-1)+1} → T_m`), with injectivity and torsion-obstruction scans.
//!
//! The `tng` binary exposes each report as a subcommand; the `examples/`
//! directory has one runnable walkthrough per capability.

pub mod cli;
pub mod element;
pub mod embed;
pub mod generators;
pub mod metrics;
pub mod ntree;
pub mod plmap;
pub mod words;

pub use element::{Element, OrderResult};
pub use generators::{evaluate_word, GenKind, GenLetter, Word};
pub use ntree::{Arity, NTree};
pub use plmap::{PLMap, Rational};
pub use words::PcqFactorization;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arity must be at least 2, got {0}")]
    BadArity(u32),
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(u32, u32),
    #[error("leaf index {index} out of range (leaf count {leaves})")]
    LeafOutOfRange { index: usize, leaves: usize },
    #[error("leaves {start}..{end} are not the children of a single caret")]
    NotContractible { start: usize, end: usize },
    #[error("tree pair caret counts differ: {0} vs {1}")]
    CaretMismatch(usize, usize),
    #[error("rotation {rotation} out of range (leaf count {leaves})")]
    RotationOutOfRange { rotation: usize, leaves: usize },
    #[error("element is not in F_n (rotation {0} after reduction)")]
    NotInF(usize),
    #[error("element has no finite order within cap {0}")]
    NotTorsion(usize),
    #[error("pumping identity failed to validate at k={k}, ell={ell}, n={n}")]
    PumpMismatch { k: usize, ell: usize, n: u32 },
    #[error("exponent {ell} out of range for k={k}, n={n}")]
    EllOutOfRange { ell: usize, k: usize, n: u32 },
    #[error("state cap {cap} exceeded after {reached} states")]
    CapExceeded { cap: usize, reached: usize },
    #[error("rewriting failed to produce a verified word: {0}")]
    RewriteFailed(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
