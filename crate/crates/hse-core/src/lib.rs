//! Dense statevector simulation of aperiodically driven qudit brickwork
//! circuits, together with the metrology needed to decide whether the
//! generated temporal ensembles reproduce Haar moments on the full Hilbert
//! space or on dynamically disconnected subspaces.
//!
//! The crate is `no_std` (with `alloc`): everything here is pure
//! computation over explicitly passed state. IO, configuration and the
//! command line live in the companion `hse-cli` crate.
//!
//! Basis convention used throughout: an `N`-qudit product basis state with
//! per-site levels `(a_0, ..., a_{N-1})` is stored at index
//! `sum_i a_i * d^(N-1-i)`, i.e. big-endian base `d` with site 0 most
//! significant.

#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod diagnostics;
pub mod drive;
pub mod entropy;
pub mod haar;
pub mod krylov;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod state;

use alloc::string::String;
use core::fmt;

pub use num_complex::Complex64;

/// Errors surfaced by the numerical core.
///
/// `Domain` covers violated preconditions (bad dimensions, out-of-range
/// sites, invalid parameters); `Numerical` covers runtime invariant
/// violations such as non-convergence or a non-Hermitian input where a
/// Hermitian one is required; `CapExceeded` signals that a dense code path
/// was asked for a problem size beyond its configured cap.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Domain(String),
    Numerical(String),
    CapExceeded(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
            Error::CapExceeded(msg) => write!(f, "dense cap exceeded: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain_err<T>(msg: impl fmt::Display) -> Result<T> {
    Err(Error::Domain(alloc::format!("{msg}")))
}

pub(crate) fn numerical_err<T>(msg: impl fmt::Display) -> Result<T> {
    Err(Error::Numerical(alloc::format!("{msg}")))
}
