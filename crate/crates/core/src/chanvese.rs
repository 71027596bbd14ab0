//! Two-phase piecewise-constant region model.
//!
//! Energy: `sum (I - c1)^2 H + sum (I - c2)^2 (1 - H) + lambda * sum delta |grad phi|`
//! with `H = heaviside_in(phi)`. The flow is the exact gradient of the
//! discrete energy, with both means refreshed every step.

use crate::error::{Error, Result};
use crate::field::{
    dirac, dirac_length, dirac_length_gradient, heaviside_in, Epsilon, LevelSet, ScalarField,
};

/// Denominator below which a region counts as empty.
pub const EMPTY_REGION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvParams {
    pub lambda_len: f64,
    pub eps: Epsilon,
    pub dt: f64,
    pub reinit_every: usize,
    pub reinit_steps: usize,
}

impl Default for CvParams {
    fn default() -> Self {
        CvParams {
            lambda_len: 0.1,
            eps: Epsilon::DEFAULT,
            dt: 0.5,
            reinit_every: 10,
            reinit_steps: 5,
        }
    }
}

impl CvParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.5) {
            return Err(Error::spec(format!(
                "chanvese dt {} must lie in (0, 0.5]",
                self.dt
            )));
        }
        if !(self.lambda_len >= 0.0) {
            return Err(Error::spec("chanvese lambda must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionMeans {
    /// Mean inside (`phi < 0`).
    pub c1: f64,
    /// Mean outside.
    pub c2: f64,
}

/// Heaviside-weighted means; an empty region falls back to the global mean.
pub fn region_means(image: &ScalarField, phi: &LevelSet, eps: Epsilon) -> RegionMeans {
    // Accumulate deviations from a reference sample so a constant image
    // yields means that are exactly that constant.
    let base = image.data().first().copied().unwrap_or(0.0);
    let (mut s_in, mut w_in, mut s_out, mut w_out) = (0.0, 0.0, 0.0, 0.0);
    for (&i, &p) in image.data().iter().zip(phi.data()) {
        let h = heaviside_in(p, eps);
        s_in += (i - base) * h;
        w_in += h;
        s_out += (i - base) * (1.0 - h);
        w_out += 1.0 - h;
    }
    let global = image.mean();
    RegionMeans {
        c1: if w_in < EMPTY_REGION {
            global
        } else {
            base + s_in / w_in
        },
        c2: if w_out < EMPTY_REGION {
            global
        } else {
            base + s_out / w_out
        },
    }
}

pub fn cv_energy(
    image: &ScalarField,
    phi: &LevelSet,
    means: RegionMeans,
    lambda_len: f64,
    eps: Epsilon,
) -> f64 {
    let fit: f64 = image
        .data()
        .iter()
        .zip(phi.data())
        .map(|(&i, &p)| {
            let h = heaviside_in(p, eps);
            (i - means.c1).powi(2) * h + (i - means.c2).powi(2) * (1.0 - h)
        })
        .sum();
    if lambda_len == 0.0 {
        fit
    } else {
        fit + lambda_len * dirac_length(phi, eps, None)
    }
}

/// Energy with the means at their optimum for `phi`.
pub fn cv_total_energy(image: &ScalarField, phi: &LevelSet, params: &CvParams) -> f64 {
    let means = region_means(image, phi, params.eps);
    cv_energy(image, phi, means, params.lambda_len, params.eps)
}

/// Descent speed `delta(phi) [(I - c1)^2 - (I - c2)^2] - lambda dL/dphi`,
/// where `L` is the discrete length. In the continuum the length part is
/// `lambda delta(phi) kappa`.
pub fn cv_speed(image: &ScalarField, phi: &LevelSet, params: &CvParams) -> ScalarField {
    let means = region_means(image, phi, params.eps);
    let mut speed = if params.lambda_len != 0.0 {
        dirac_length_gradient(phi, params.eps, None).map(|v| -params.lambda_len * v)
    } else {
        ScalarField::zeros(phi.width(), phi.height())
    };
    for (k, s) in speed.data_mut().iter_mut().enumerate() {
        let d = dirac(phi.data()[k], params.eps);
        if d == 0.0 {
            continue;
        }
        let i = image.data()[k];
        *s += d * ((i - means.c1).powi(2) - (i - means.c2).powi(2));
    }
    speed
}

pub fn cv_step(image: &ScalarField, phi: &LevelSet, params: &CvParams) -> LevelSet {
    let speed = cv_speed(image, phi, params);
    phi.zip_map(&speed, |p, s| p + params.dt * s)
}
