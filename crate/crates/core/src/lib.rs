//! ORBGRAND decoding of binary linear codes with syndrome-constrained error
//! pattern generation.
//!
//! Disjoint parity constraints taken from the row space of `H` let the
//! pattern generator discard candidates that cannot produce a codeword
//! before they are checked. Each constraint halves the search space, and
//! the decoder returns exactly what the unconstrained decoder returns.

pub mod bitlin;
pub mod channel_sim;
pub mod cli;
pub mod codes;
pub mod constraints;
pub mod decoder;
pub mod patterns;

pub use bitlin::{BitMatrix, BitVec};
pub use codes::{CodeId, LinearCode};
pub use constraints::{ConstraintLayout, ConstraintTargets};
pub use decoder::{DecodeBudget, DecodeOutcome, ReceivedFrame};
pub use patterns::PatternGenerator;
