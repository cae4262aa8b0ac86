#![cfg_attr(not(feature = "std"), no_std)]
//! Unitarity of one-dimensional quantum cellular automata, decided from the
//! local rule through weighted de Bruijn graphs, with the standard rule
//! families and a brute-force global-matrix oracle.

extern crate alloc;

pub mod debruijn;
pub mod error;
pub mod families;
pub mod linalg;
pub mod oracle;
pub mod rule;
pub mod surjectivity;
pub mod transfer;
pub mod unitarity;

pub use error::{Error, Result};
pub use rule::{Amplitude, LocalConfig, RuleTable, Side, DEFAULT_TOLERANCE};
