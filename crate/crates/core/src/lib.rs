//! Belief-propagation detection for large full-rate STBCs built from cyclic
//! division algebras, with reference detectors and a Monte-Carlo BER harness.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common case.

// `!(x > 0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bp;
pub mod cda_stbc;
pub mod channel;
pub mod cli;
pub mod error;
pub mod reference;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};

pub type CodeSpecF64 = cda_stbc::CodeSpec<f64>;
pub type CodeSpecF32 = cda_stbc::CodeSpec<f32>;
pub type MrfModelF64 = bp::MrfModel<f64>;
pub type MrfModelF32 = bp::MrfModel<f32>;
pub type MessageStateF64 = bp::MessageState<f64>;
pub type MessageStateF32 = bp::MessageState<f32>;
pub type DetectionF64 = bp::Detection<f64>;
pub type DetectionF32 = bp::Detection<f32>;
pub type LinearSystemF64 = reference::LinearSystem<f64>;
pub type LinearSystemF32 = reference::LinearSystem<f32>;
pub type ChannelRealizationF64 = channel::ChannelRealization<f64>;
pub type ChannelRealizationF32 = channel::ChannelRealization<f32>;
