//! Constructions, verifiers and simulators for lower bounds on testing
//! k-cycle-freeness of Boolean functions over `F_p^n`.
//!
//! The crate is organised bottom-up:
//!
//! * [`ffield`]: arithmetic in `F_p` and `F_{p^k}` and the linear encoding
//!   `F_{p^k} -> F_p^k`.
//! * [`gadgets`]: the `A` and `B` matrix families built from a field generator.
//! * [`zvectors`]: vector collections over `Z_D`, sunflower detection, the
//!   two-symbol property, digit recoding and balanced partitions.
//! * [`pmf`]: local perfect-matching-free families and the transforms that
//!   produce them, plus USP verification.
//! * [`behrend`]: sets without non-trivial solutions of
//!   `x_1 + ... + x_r = r * x_{r+1}`.
//! * [`cwgen`]: the randomized hashing construction of balanced collections with
//!   unique partitions.
//! * [`tester`]: cycle counting, the canonical tester, distance to freeness and
//!   the single-function and domain-extension reductions.
//! * [`search`]: exhaustive and greedy search for extremal collections.
//!
//! Heavy loops run on rayon when the `parallel` feature is enabled (the
//! default) and sequentially otherwise. Every result is independent of the
//! number of worker threads.

pub mod behrend;
pub mod cwgen;
pub mod error;
pub mod exec;
pub mod ffield;
pub mod gadgets;
pub mod pmf;
pub mod rational;
pub mod search;
pub mod tester;
pub mod zvectors;

pub use error::{Error, Result};

/// A vector over `Z_D` or `F_p`, stored as residues.
pub type Vector = Vec<u32>;

/// Default enumeration budget shared by the exhaustive verifiers.
pub const DEFAULT_BUDGET: u64 = 100_000_000;
