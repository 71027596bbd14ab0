//! Edge-stopping function and the edge-stopped curvature flow
//! `phi_t = g * kappa * |grad phi|`.
//!
//! There is no balloon or advection term, so the flow only shrinks convex
//! contours: the initial contour has to enclose the object.

use crate::error::{Error, Result};
use crate::field::{
    curvature, dirac_length, gaussian_smooth, grad_central, grad_magnitude, Epsilon, LevelSet,
    ScalarField, EPS_GRAD,
};

/// Edge indicator `g` with values in `[0, 1]`; close to 0 on strong edges.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMap(ScalarField);

impl EdgeMap {
    /// Wrap an arbitrary indicator, e.g. a hand-built barrier.
    pub fn from_field(g: ScalarField) -> Result<Self> {
        if g.data().iter().all(|v| (0.0..=1.0).contains(v)) {
            Ok(EdgeMap(g))
        } else {
            Err(Error::spec("edge map values must lie in [0, 1]"))
        }
    }

    /// Constant `g = 1`, i.e. pure curvature flow.
    pub fn uniform(width: usize, height: usize) -> Self {
        EdgeMap(ScalarField::filled(width, height, 1.0))
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }
}

/// Intensity scale at which the edge indicator measures gradients.
///
/// Images are handled on `[0, 1]`, where even a full-contrast step has a
/// smoothed gradient well below 1 and `g` would stay near 1. Measuring on the
/// 8-bit scale makes `g` fall close to zero on real edges.
pub const EDGE_INTENSITY_SCALE: f64 = 255.0;

/// `g = 1 / (1 + |grad (G_sigma * f)|^2)` with `f` the image on the 8-bit
/// intensity scale.
pub fn edge_indicator(image: &ScalarField, sigma: f64) -> EdgeMap {
    let smoothed = gaussian_smooth(&image.map(|v| v * EDGE_INTENSITY_SCALE), sigma);
    let mag = grad_magnitude(&grad_central(&smoothed));
    EdgeMap(mag.map(|m| 1.0 / (1.0 + m * m)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeFlowParams {
    pub sigma: f64,
    pub dt: f64,
    pub eps: Epsilon,
}

impl Default for EdgeFlowParams {
    fn default() -> Self {
        EdgeFlowParams {
            sigma: 1.5,
            dt: 0.25,
            eps: Epsilon::DEFAULT,
        }
    }
}

impl EdgeFlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.25) {
            return Err(Error::spec(format!(
                "edgeflow dt {} must lie in (0, 0.25]",
                self.dt
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::spec("edgeflow sigma must be positive"));
        }
        Ok(())
    }
}

/// One explicit Euler step of the edge-stopped curvature flow.
pub fn edgeflow_step(phi: &LevelSet, g: &EdgeMap, dt: f64) -> LevelSet {
    let kappa = curvature(phi, EPS_GRAD);
    let mag = grad_magnitude(&grad_central(phi));
    let mut next = phi.clone();
    for (i, v) in next.data_mut().iter_mut().enumerate() {
        *v += dt * g.0.data()[i] * kappa.data()[i] * mag.data()[i];
    }
    next
}

/// Edge-weighted contour length, the quantity the flow decreases.
pub fn edgeflow_energy(phi: &LevelSet, g: &EdgeMap, eps: Epsilon) -> f64 {
    dirac_length(phi, eps, Some(&g.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::dice;
    use crate::init::{init_levelset, InitSpec, Shape};

    fn circle_sdf(n: usize, cx: f64, cy: f64, r: f64) -> LevelSet {
        init_levelset(&[InitSpec::sdf(Shape::Circle { cx, cy, r })], n, n).unwrap()
    }

    /// Area-equivalent radius of the interior.
    fn interior_radius(phi: &LevelSet) -> f64 {
        let area = phi.data().iter().filter(|&&v| v < 0.0).count() as f64;
        (area / std::f64::consts::PI).sqrt()
    }

    #[test]
    fn constant_image_gives_unit_indicator() {
        let g = edge_indicator(&ScalarField::filled(20, 20, 0.4), 1.5);
        assert!(g.field().data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn step_edge_minimum_sits_on_the_step() {
        let img = ScalarField::from_fn(64, 64, |x, _| if x < 32 { 0.2 } else { 0.8 });
        let g = edge_indicator(&img, 1.5);
        assert!(g.field().data().iter().all(|&v| v > 0.0 && v <= 1.0));
        let row: Vec<f64> = (0..64).map(|x| g.field()[(x, 20)]).collect();
        let (argmin, min) =
            row.iter().enumerate().fold(
                (0, f64::INFINITY),
                |(ai, m), (i, &v)| if v < m { (i, v) } else { (ai, m) },
            );
        // the smoothed step is symmetric about x = 31.5: both neighbours tie
        assert!(argmin == 31 || argmin == 32, "argmin {argmin}");
        assert!((row[31] - row[32]).abs() < 1e-12);
        assert!(min < 0.5, "{min}");
        // oracle: peak of the smoothed step derivative, 0.6 * 255 / (sigma sqrt(2 pi))
        let kernel = crate::field::gaussian_kernel(1.5);
        let r = kernel.len() / 2;
        let grad = 0.6 * EDGE_INTENSITY_SCALE * (kernel[r] + kernel[r + 1]) / 2.0;
        assert!((min - 1.0 / (1.0 + grad * grad)).abs() < 1e-9, "{min}");
    }

    #[test]
    fn flat_fields_do_not_move() {
        let g = EdgeMap::uniform(16, 16);
        let c = ScalarField::filled(16, 16, 0.7);
        assert_eq!(edgeflow_step(&c, &g, 0.25), c);
        let edge = ScalarField::from_fn(16, 16, |x, _| x as f64 - 7.5);
        let moved = edgeflow_step(&edge, &g, 0.25);
        assert!(moved.zip_map(&edge, |a, b| (a - b).abs()).max_abs() < 1e-9);
    }

    #[test]
    fn shrinking_circle_follows_analytic_radius() {
        // r(t)^2 = r0^2 - 2t for curvature flow
        let dt = 0.25;
        let g = EdgeMap::uniform(64, 64);
        let mut phi = circle_sdf(64, 31.6, 32.3, 20.0);
        let mut t = 0.0;
        for n in 1..=200 {
            phi = edgeflow_step(&phi, &g, dt);
            t += dt;
            if n % 40 == 0 {
                let expect = (400.0 - 2.0 * t).sqrt();
                let got = interior_radius(&phi);
                assert!(
                    (got - expect).abs() / expect < 0.05,
                    "t={t} got {got} expect {expect}"
                );
            }
        }
    }

    #[test]
    fn convex_area_strictly_shrinks() {
        let g = EdgeMap::uniform(48, 48);
        let mut phi = circle_sdf(48, 23.7, 24.2, 12.0);
        let mut area = phi.interior_mask().iter().filter(|&&m| m).count();
        let mut last_len = edgeflow_energy(&phi, &g, Epsilon::DEFAULT);
        for _ in 0..10 {
            for _ in 0..8 {
                phi = edgeflow_step(&phi, &g, 0.25);
            }
            let a = phi.interior_mask().iter().filter(|&&m| m).count();
            assert!(a < area);
            area = a;
            let len = edgeflow_energy(&phi, &g, Epsilon::DEFAULT);
            assert!(len < last_len);
            last_len = len;
        }
    }

    #[test]
    fn zero_indicator_ring_is_a_barrier() {
        let n = 64;
        let (c, ring) = (31.5, 14.0);
        let g = ScalarField::from_fn(n, n, |x, y| {
            let r = ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt();
            if (r - ring).abs() < 1.5 {
                0.0
            } else {
                1.0
            }
        });
        let g = EdgeMap::from_field(g).unwrap();
        let mut phi = circle_sdf(n, c, c, 24.0);
        let inside_ring: Vec<usize> = (0..n * n)
            .filter(|&i| {
                let (x, y) = ((i % n) as f64, (i / n) as f64);
                ((x - c).powi(2) + (y - c).powi(2)).sqrt() < ring - 2.0
            })
            .collect();
        for _ in 0..500 {
            phi = edgeflow_step(&phi, &g, 0.25);
        }
        assert!(inside_ring.iter().all(|&i| phi.data()[i] < 0.0));
    }

    #[test]
    fn contour_away_from_object_never_acquires_it() {
        let n = 64;
        let img = ScalarField::from_fn(n, n, |x, y| {
            if (x as f64 - 44.0).powi(2) + (y as f64 - 44.0).powi(2) <= 100.0 {
                0.8
            } else {
                0.2
            }
        });
        let object: Vec<bool> = img.data().iter().map(|&v| v > 0.5).collect();
        let g = edge_indicator(&img, 1.5);
        let mut phi = circle_sdf(n, 16.0, 16.0, 9.0);
        for _ in 0..500 {
            phi = edgeflow_step(&phi, &g, 0.25);
        }
        assert!(dice(&phi.interior_mask(), &object) < 0.1);
    }

    #[test]
    fn params_validation() {
        assert!(EdgeFlowParams::default().validate().is_ok());
        let bad = EdgeFlowParams {
            dt: 0.3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
