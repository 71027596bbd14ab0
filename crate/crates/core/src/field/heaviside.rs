use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Half-width of the smoothing band of the Heaviside and Dirac surrogates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Epsilon(f64);

impl Epsilon {
    pub const DEFAULT: Epsilon = Epsilon(1.5);

    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps.is_finite() {
            Ok(Epsilon(eps))
        } else {
            Err(Error::spec(format!("epsilon must be positive, got {eps}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Smoothed indicator of the interior `{phi < 0}`.
///
/// Equal to 1 below `-eps`, 0 above `eps`, and
/// `(1 - phi/eps - sin(pi phi / eps) / pi) / 2` in between, which joins both
/// constant branches continuously.
#[inline]
pub fn heaviside_in(phi: f64, eps: Epsilon) -> f64 {
    let e = eps.0;
    if phi < -e {
        1.0
    } else if phi > e {
        0.0
    } else {
        0.5 * (1.0 - phi / e - (PI * phi / e).sin() / PI)
    }
}

/// Smoothed Dirac delta, `-d heaviside_in / d phi`; supported on `|phi| <= eps`.
#[inline]
pub fn dirac(phi: f64, eps: Epsilon) -> f64 {
    let e = eps.0;
    if phi.abs() > e {
        0.0
    } else {
        (1.0 + (PI * phi / e).cos()) / (2.0 * e)
    }
}

/// Derivative of [`dirac`] in `phi`, zero outside the band.
#[inline]
pub fn dirac_prime(phi: f64, eps: Epsilon) -> f64 {
    let e = eps.0;
    if phi.abs() > e {
        0.0
    } else {
        -PI * (PI * phi / e).sin() / (2.0 * e * e)
    }
}
