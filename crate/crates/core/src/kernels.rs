//! Smoothing kernels: the Gaussian predictor density `w`, the response CDF
//! kernel `K` (standard normal CDF truncated to `[-2, 2]`), and the product
//! weight over lag coordinates.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// `1 / sqrt(2 pi)`.
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// `ln sqrt(2 pi)`.
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// `erfc(sqrt 2)`, twice the normal tail mass beyond 2.
const ERFC_SQRT2: f64 = 0.045_500_263_896_358_42;

/// Half-width of the support of [`smooth_cdf_kernel`].
pub const KERNEL_SUPPORT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidths {
    /// Predictor bandwidth, shared across all lag coordinates.
    pub h: f64,
    /// Response bandwidth.
    pub h0: f64,
}

impl Bandwidths {
    pub fn new(h: f64, h0: f64) -> Result<Self> {
        if h > 0.0 && h0 > 0.0 && h.is_finite() && h0.is_finite() {
            Ok(Self { h, h0 })
        } else {
            Err(Error::InvalidBandwidth { h, h0 })
        }
    }
}

pub fn gaussian_density(v: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * v * v).exp()
}

pub fn log_gaussian_density(v: f64) -> f64 {
    -0.5 * v * v - LN_SQRT_2PI
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Response kernel `K`: the standard normal CDF restricted to `[-2, 2]` and
/// renormalized, so `K(-2) = 0`, `K(2) = 1` and `K` is strictly increasing between.
pub fn smooth_cdf_kernel(z: f64) -> f64 {
    if z <= -KERNEL_SUPPORT {
        0.0
    } else if z >= KERNEL_SUPPORT {
        1.0
    } else {
        // (Phi(z) - Phi(-2)) / (Phi(2) - Phi(-2)) with both differences taken in erfc form.
        let num = 0.5 * (libm::erfc(-z / SQRT_2) - ERFC_SQRT2);
        let mass = 1.0 - ERFC_SQRT2;
        (num / mass).clamp(0.0, 1.0)
    }
}

/// Derivative of [`smooth_cdf_kernel`]: the truncated normal density.
pub fn smooth_cdf_kernel_density(z: f64) -> f64 {
    if z.abs() >= KERNEL_SUPPORT {
        0.0
    } else {
        gaussian_density(z) / (1.0 - ERFC_SQRT2)
    }
}

/// `ln W_h(x_i, x) = sum_s [ln w((x_i[s] - x[s]) / h) - ln h]`. Slices must have equal length.
pub fn log_product_weight(x_i: &[f64], x: &[f64], h: f64) -> f64 {
    debug_assert_eq!(x_i.len(), x.len());
    let ln_h = h.ln();
    x_i.iter()
        .zip(x)
        .map(|(a, b)| log_gaussian_density((a - b) / h) - ln_h)
        .sum()
}

/// Product kernel weight `W_h(x_i, x) = prod_s (1/h) w((x_i[s] - x[s]) / h)`.
pub fn product_weight(x_i: &[f64], x: &[f64], h: f64) -> Result<f64> {
    if x_i.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_i.len(),
        });
    }
    Ok(log_product_weight(x_i, x, h).exp())
}
