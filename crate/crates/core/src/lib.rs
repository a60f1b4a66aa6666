//! Non-Markovian noise on two-qubit gates: the decoherence kernel, the
//! resulting population channels, their recovery operators and mitigation
//! cost, and estimation of the kernel from device shot counts.

// Negated comparisons are how NaN is rejected; index loops read better in
// the 4x4 matrix code.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod error;
pub mod expdata;
pub mod gamma;
pub mod kernel;
pub mod numerics;
pub mod recovery;

pub use error::{Error, Result};
