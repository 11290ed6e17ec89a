//! Belief-propagation detection of BPSK symbols on the fully connected
//! pairwise Markov random field induced by `y = H·x + n`.
//!
//! Node potentials carry the matched-filter output `z = Hᴴy/σ²`, edge
//! potentials the scaled Gram matrix `R = HᴴH/σ²`. Messages are exchanged
//! in a fixed serial order (or, optionally, a synchronous flooding
//! schedule) and kept in the log domain as log-likelihood ratios, one scalar
//! per directed edge.

mod messages;
mod mrf;

pub use messages::{beliefs, detect, iterate, BpConfig, Detection, MessageState, Schedule};
pub use mrf::{build_mrf, uniform_prior, MrfModel, PsiForm, PSI_FLOOR};
