//! Measurement-noise generation: Gaussian and symmetric alpha-stable.
//!
//! The alpha-stable sampler draws from the SaS law with characteristic
//! function `exp(-scale * |t|^alpha)` using the Chambers-Mallows-Stuck
//! transform of a uniform and an exponential variate (symmetric case).
//! At `alpha = 2` this is the Gaussian with variance `2 * scale`; lower
//! `alpha` gives heavier tails.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a symmetric alpha-stable law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Characteristic exponent, in (0, 2].
    pub alpha: f64,
    /// Dispersion, > 0: the `scale` in `exp(-scale * |t|^alpha)`.
    pub scale: f64,
}

impl NoiseSpec {
    pub fn new(alpha: f64, scale: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= 0.0 || alpha > 2.0 {
            return Err(Error::invalid(format!(
                "alpha must be in (0, 2], got {alpha}"
            )));
        }
        if scale.is_nan() || scale <= 0.0 {
            return Err(Error::invalid(format!("scale must be > 0, got {scale}")));
        }
        Ok(Self { alpha, scale })
    }
}

// keep the uniforms away from 0 and 1 so ln/cos stay finite
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.0..1.0f64).clamp(1e-12, 1.0 - 1e-12)
}

/// One draw from the SaS law with characteristic function
/// `exp(-scale * |t|^alpha)`.
///
/// Chambers-Mallows-Stuck, symmetric case: with `V` uniform on
/// `(-pi/2, pi/2)` and `W` unit exponential,
///
/// ```text
/// x0 = sin(alpha V) / cos(V)^(1/alpha) * (cos((1-alpha) V) / W)^((1-alpha)/alpha)
/// ```
///
/// has dispersion 1; the returned draw is `scale^(1/alpha) * x0`. The
/// formula covers the whole range `alpha` in (0, 2], reducing to
/// `tan(V)` (Cauchy) at `alpha = 1` and to `2 sin(V) sqrt(W)` (Gaussian,
/// variance 2) at `alpha = 2`.
pub fn sample_sas<R: Rng>(spec: &NoiseSpec, rng: &mut R) -> f64 {
    let alpha = spec.alpha;
    let v = PI * (open_unit(rng) - 0.5);
    let w = -open_unit(rng).ln();
    let x0 = (alpha * v).sin() / v.cos().powf(1.0 / alpha)
        * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    spec.scale.powf(1.0 / alpha) * x0
}

/// Zero-mean Gaussian draw with the given variance.
pub fn sample_gaussian<R: Rng>(variance: f64, rng: &mut R) -> f64 {
    assert!(variance > 0.0, "variance must be > 0, got {variance}");
    let z: f64 = rng.sample(StandardNormal);
    variance.sqrt() * z
}
