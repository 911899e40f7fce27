//! Zero-centre hypersphere loss.
//!
//! In-class samples pay `h(‖φ‖)`, out-of-class samples pay
//! `-log(1 - exp(-h(‖φ‖)))`, with `h(a) = √(a² + 1) − 1`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::norm;

/// Smallest `h` fed to the out-of-class term; bounds its output at about 27.63.
pub const H_FLOOR: f64 = 1e-12;
/// Out-of-class gradients below this embedding norm are evaluated at the floor.
pub const GRAD_NORM_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryLabel {
    /// `y = 0`
    InClass,
    /// `y = 1`
    OutOfClass,
}

impl BinaryLabel {
    pub fn y(self) -> u8 {
        match self {
            BinaryLabel::InClass => 0,
            BinaryLabel::OutOfClass => 1,
        }
    }

    pub fn from_y(y: u8) -> Result<Self> {
        match y {
            0 => Ok(BinaryLabel::InClass),
            1 => Ok(BinaryLabel::OutOfClass),
            _ => Err(Error::Argument(format!("binary label must be 0 or 1, got {y}"))),
        }
    }
}

/// `√(a² + 1) − 1`, evaluated as `a² / (√(a² + 1) + 1)` to keep precision near zero.
#[inline]
pub fn pseudo_huber(a: f64) -> f64 {
    let a2 = a * a;
    a2 / ((a2 + 1.0).sqrt() + 1.0)
}

/// `-log(1 - e^{-h})`, capped at `anomaly_cap()` for `h <= H_FLOOR`.
#[inline]
pub fn anomaly_term(h: f64) -> f64 {
    let h = h.max(H_FLOOR);
    if h > LN_2 {
        -(-(-h).exp()).ln_1p()
    } else {
        -(-(-h).exp_m1()).ln()
    }
}

pub fn anomaly_cap() -> f64 {
    anomaly_term(H_FLOOR)
}

pub fn hypercore_loss(embedding: &[f64], y: BinaryLabel) -> Result<f64> {
    if embedding.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("embedding".into()));
    }
    let h = pseudo_huber(norm(embedding));
    Ok(match y {
        BinaryLabel::InClass => h,
        BinaryLabel::OutOfClass => anomaly_term(h),
    })
}

/// Loss value, with `scale * ∂L/∂φ` written into `grad`.
pub fn loss_and_grad_into(embedding: &[f64], y: BinaryLabel, scale: f64, grad: &mut [f64]) -> Result<f64> {
    if grad.len() != embedding.len() {
        return Err(Error::shape("loss gradient", embedding.len(), grad.len()));
    }
    if embedding.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("embedding".into()));
    }
    let n = norm(embedding);
    let h = pseudo_huber(n);
    match y {
        BinaryLabel::InClass => {
            let c = scale / (n * n + 1.0).sqrt();
            for (g, &e) in grad.iter_mut().zip(embedding) {
                *g = c * e;
            }
            Ok(h)
        }
        BinaryLabel::OutOfClass => {
            if n == 0.0 {
                grad.fill(0.0);
                return Ok(anomaly_term(h));
            }
            let n_eval = n.max(GRAD_NORM_FLOOR);
            let h_eval = pseudo_huber(n_eval);
            let s_eval = (n_eval * n_eval + 1.0).sqrt();
            // d/dh [-log(1 - e^{-h})] = -1 / (e^h - 1)
            let dl_dh = -1.0 / h_eval.exp_m1();
            let c = scale * dl_dh * (n_eval / s_eval) / n;
            for (g, &e) in grad.iter_mut().zip(embedding) {
                *g = c * e;
            }
            Ok(anomaly_term(h))
        }
    }
}

pub fn loss_grad_wrt_embedding(embedding: &[f64], y: BinaryLabel) -> Result<Vec<f64>> {
    let mut g = vec![0.0; embedding.len()];
    loss_and_grad_into(embedding, y, 1.0, &mut g)?;
    Ok(g)
}
