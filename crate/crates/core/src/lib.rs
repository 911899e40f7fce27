//! Coreset selection with per-class hypersphere models.
//!
//! Each class gets a small network trained one-vs-rest so that its own
//! samples embed near the origin and all other samples embed far from it.
//! The embedding norm is a conformity score; a per-class cutoff on it,
//! either a fixed keep ratio or the cutoff maximising Youden's J, decides
//! which samples stay in the coreset.
//!
//! ```no_run
//! use hypercore::data::synth_gaussian_mixture;
//! use hypercore::hypersphere::TrainConfig;
//! use hypercore::pipeline::{build_coreset, PruneMode};
//!
//! # fn main() -> hypercore::Result<()> {
//! let ds = synth_gaussian_mixture(10, 500, 16, 6.0, 42)?;
//! let coreset = build_coreset(&ds, PruneMode::Adaptive, &TrainConfig::default(), 4)?;
//! println!("removed {:.1}%", 100.0 * coreset.alpha_realized());
//! # Ok(())
//! # }
//! ```

pub mod data;
pub mod error;
pub mod eval;
pub mod hypersphere;
pub mod numerics;
pub mod pipeline;
pub mod rng;
pub mod thresholding;

pub use error::{Error, Result};
