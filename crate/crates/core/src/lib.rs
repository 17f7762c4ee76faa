//! Symbolic dynamics toolkit for distributional chaos.
//!
//! * [`measure`]: probability vectors, joint distributions, disintegration.
//! * [`entropy`]: Shannon and conditional entropy, the roughly-equal
//!   predicate, δ-independence, Hamming-ball constants, and randomized
//!   validators for the partition lemmas.
//! * [`shift`]: alphabets, blocks, Bernoulli and Markov shift measures,
//!   cylinder enumeration, the symbolic metric.
//! * [`builder`]: interval schedules, Hamming-separated greedy selection,
//!   and the scrambled tree.
//! * [`chaos`]: proximity densities, DC2 verdicts, tree verification.
//!
//! The crate is `no_std` with `alloc`; enable `std` for
//! `std::error::Error` on [`Error`].

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod builder;
pub mod chaos;
pub mod entropy;
pub mod error;
pub mod measure;
pub mod shift;

pub use error::{Error, Result};
pub use measure::{JointDistribution, ProbVector};
pub use shift::{Alphabet, Block, ShiftMeasure, SymbolicPoint};
