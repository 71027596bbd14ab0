//! Region-scalable fitting.
//!
//! Each pixel is compared with fitted intensities `f1`, `f2` that are
//! Gaussian-weighted averages of the image over the nearby interior and
//! exterior. The kernel scale `sigma_k` sets how local the fit is: a small
//! kernel tolerates intensity inhomogeneity, a kernel wider than the image
//! degenerates to the global two-phase model.

use crate::drlse::reg_energy;
use crate::error::{Error, Result};
use crate::field::{
    convolve_separable, dirac, dirac_length, div, gaussian_kernel, heaviside_in, laplacian,
    normalized_gradient, Epsilon, LevelSet, ScalarField,
};

/// Denominator below which a fitted value falls back to the plain local mean.
pub const DEGENERATE_WEIGHT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RsfParams {
    pub sigma_k: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub nu: f64,
    pub mu_reg: f64,
    pub eps: Epsilon,
    pub dt: f64,
}

impl Default for RsfParams {
    fn default() -> Self {
        RsfParams {
            sigma_k: 3.0,
            lambda1: 15.0,
            lambda2: 15.0,
            nu: 10.0,
            mu_reg: 1.0,
            eps: Epsilon::DEFAULT,
            dt: 0.2,
        }
    }
}

impl RsfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_k > 0.0) {
            return Err(Error::spec("rsf kernel sigma must be positive"));
        }
        if !(self.lambda1 > 0.0 && self.lambda2 > 0.0) {
            return Err(Error::spec("rsf lambda1 and lambda2 must be positive"));
        }
        if !(self.nu >= 0.0 && self.mu_reg >= 0.0) {
            return Err(Error::spec("rsf nu and mu must be >= 0"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::spec("rsf dt must be positive"));
        }
        if !(self.mu_reg * self.dt < 0.25) {
            return Err(Error::spec(format!(
                "rsf requires mu * dt < 0.25, got {}",
                self.mu_reg * self.dt
            )));
        }
        Ok(())
    }
}

/// Localizing kernel: symmetric, radially non-increasing, unit sum.
pub fn kernel_profile(sigma_k: f64) -> Vec<f64> {
    gaussian_kernel(sigma_k)
}

/// Fitted interior (`f1`) and exterior (`f2`) intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct FittingPair {
    pub f1: ScalarField,
    pub f2: ScalarField,
}

/// The model bound to one image. Convolutions that depend only on the image
/// are computed once, which leaves six per step.
#[derive(Clone, Debug)]
pub struct RsfModel<'a> {
    image: &'a ScalarField,
    params: RsfParams,
    kernel: Vec<f64>,
    /// `K * 1`, which differs from 1 only by rounding.
    k_one: ScalarField,
    /// `K * I`, also the fallback for a region with no weight.
    k_image: ScalarField,
    range: (f64, f64),
}

impl<'a> RsfModel<'a> {
    pub fn new(image: &'a ScalarField, params: RsfParams) -> Self {
        let kernel = kernel_profile(params.sigma_k);
        let k_one = convolve_separable(
            &ScalarField::filled(image.width(), image.height(), 1.0),
            &kernel,
        );
        let k_image = convolve_separable(image, &kernel);
        RsfModel {
            image,
            params,
            kernel,
            k_one,
            k_image,
            range: (image.min(), image.max()),
        }
    }

    pub fn params(&self) -> &RsfParams {
        &self.params
    }

    pub fn fits(&self, phi: &LevelSet) -> FittingPair {
        let m1 = phi.map(|p| heaviside_in(p, self.params.eps));
        let num1 = convolve_separable(&m1.zip_map(self.image, |a, b| a * b), &self.kernel);
        let den1 = convolve_separable(&m1, &self.kernel);
        let (lo, hi) = self.range;
        let (w, h) = phi.dims();
        let mut f1 = ScalarField::zeros(w, h);
        let mut f2 = ScalarField::zeros(w, h);
        for k in 0..phi.len() {
            let plain = self.k_image.data()[k];
            // the exterior sums follow by linearity since the masks add to one
            let (n1, d1) = (num1.data()[k], den1.data()[k]);
            let (n2, d2) = (plain - n1, self.k_one.data()[k] - d1);
            // a weighted mean lies within the image range; clamping only
            // removes the cancellation error of the exterior subtraction
            let ratio = |n: f64, d: f64| {
                if d < DEGENERATE_WEIGHT {
                    plain
                } else {
                    (n / d).clamp(lo, hi)
                }
            };
            f1.data_mut()[k] = ratio(n1, d1);
            f2.data_mut()[k] = ratio(n2, d2);
        }
        FittingPair { f1, f2 }
    }

    pub fn misfits(&self, fits: &FittingPair) -> (ScalarField, ScalarField) {
        let e = |f: &ScalarField| {
            let kf = convolve_separable(f, &self.kernel);
            let kf2 = convolve_separable(&f.map(|v| v * v), &self.kernel);
            let mut out = ScalarField::zeros(f.width(), f.height());
            for (k, o) in out.data_mut().iter_mut().enumerate() {
                let i = self.image.data()[k];
                // the expansion can cancel to a tiny negative value
                *o = (i * i * self.k_one.data()[k] - 2.0 * i * kf.data()[k] + kf2.data()[k])
                    .max(0.0);
            }
            out
        };
        (e(&fits.f1), e(&fits.f2))
    }

    pub fn energy(&self, phi: &LevelSet) -> f64 {
        let p = &self.params;
        let (e1, e2) = self.misfits(&self.fits(phi));
        let data: f64 = phi
            .data()
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let h = heaviside_in(v, p.eps);
                p.lambda1 * e1.data()[k] * h + p.lambda2 * e2.data()[k] * (1.0 - h)
            })
            .sum();
        let mut total = data;
        if p.nu != 0.0 {
            total += p.nu * dirac_length(phi, p.eps, None);
        }
        if p.mu_reg != 0.0 {
            total += p.mu_reg * reg_energy(phi);
        }
        total
    }

    /// Data term `delta (lambda1 e1 - lambda2 e2)` alone.
    pub fn data_force(&self, phi: &LevelSet) -> ScalarField {
        let p = &self.params;
        let (e1, e2) = self.misfits(&self.fits(phi));
        let mut out = ScalarField::zeros(phi.width(), phi.height());
        for (k, o) in out.data_mut().iter_mut().enumerate() {
            let d = dirac(phi.data()[k], p.eps);
            if d != 0.0 {
                *o = d * (p.lambda1 * e1.data()[k] - p.lambda2 * e2.data()[k]);
            }
        }
        out
    }

    /// Data force plus the curvature flow `nu delta kappa`
    /// plus the distance regularizer `mu (lap phi - kappa)`.
    pub fn speed(&self, phi: &LevelSet) -> ScalarField {
        let p = &self.params;
        let mut speed = self.data_force(phi);
        if p.nu == 0.0 && p.mu_reg == 0.0 {
            return speed;
        }
        let kappa = div(&normalized_gradient(phi));
        let lap = laplacian(phi);
        for (k, s) in speed.data_mut().iter_mut().enumerate() {
            let (v, c) = (phi.data()[k], kappa.data()[k]);
            *s += p.nu * dirac(v, p.eps) * c + p.mu_reg * (lap.data()[k] - c);
        }
        speed
    }

    pub fn step(&self, phi: &LevelSet) -> LevelSet {
        let speed = self.speed(phi);
        phi.zip_map(&speed, |v, s| v + self.params.dt * s)
    }
}

pub fn fitting_functions(image: &ScalarField, phi: &LevelSet, params: &RsfParams) -> FittingPair {
    RsfModel::new(image, *params).fits(phi)
}

/// Local misfits `e_i(x) = sum_y K(y - x) (I(x) - f_i(y))^2`, evaluated as
/// `I^2 (K*1) - 2 I (K*f_i) + K*(f_i^2)`.
pub fn misfits(
    image: &ScalarField,
    fits: &FittingPair,
    params: &RsfParams,
) -> (ScalarField, ScalarField) {
    RsfModel::new(image, *params).misfits(fits)
}

pub fn rsf_energy(image: &ScalarField, phi: &LevelSet, params: &RsfParams) -> f64 {
    RsfModel::new(image, *params).energy(phi)
}

pub fn rsf_data_force(image: &ScalarField, phi: &LevelSet, params: &RsfParams) -> ScalarField {
    RsfModel::new(image, *params).data_force(phi)
}

pub fn rsf_speed(image: &ScalarField, phi: &LevelSet, params: &RsfParams) -> ScalarField {
    RsfModel::new(image, *params).speed(phi)
}

pub fn rsf_step(image: &ScalarField, phi: &LevelSet, params: &RsfParams) -> LevelSet {
    RsfModel::new(image, *params).step(phi)
}
