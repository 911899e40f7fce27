//! Dense linear algebra, a small rectifier network and Adam, all in `f64`.

mod adam;
mod matrix;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use matrix::{axpy, dot, norm, DenseMatrix};
pub use mlp::{ForwardCache, Layer, MlpParams};
