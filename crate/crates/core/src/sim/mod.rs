//! Monte-Carlo BER simulation: configuration, per-frame random streams,
//! the frame loop, analytical reference curves and result files.

pub mod config;
pub mod curves;
pub mod engine;
pub mod output;
pub mod rng;

pub use config::{CodeChoice, DetectorChoice, SimConfig, SnrSweep, Stopping};
pub use curves::{crossing_db, invert_curve, siso_awgn_ref, siso_rayleigh_ref};
pub use engine::{run_point, run_sweep, BerRecord};
pub use output::{emit_results, load_manifest, manifest_path, CsvWriter, Manifest};
