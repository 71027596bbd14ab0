//! Localized region statistics.
//!
//! Every narrow-band point `x` fits its own interior and exterior means over
//! the ball `B(x) = {y : |x - y| < r}` and is pushed toward the side whose
//! local mean explains the nearby band pixels better. Image content farther
//! than `r` from the band never influences the flow.

use crate::error::{Error, Result};
use crate::field::{dirac, div, heaviside_in, normalized_gradient, Epsilon, LevelSet, ScalarField};

/// Added to `max |speed|` when normalizing the time step.
pub const SPEED_FLOOR: f64 = 1e-12;
const DEGENERATE_WEIGHT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizedParams {
    pub radius: f64,
    pub lambda_len: f64,
    pub eps: Epsilon,
    pub cfl: f64,
    pub reinit_every: usize,
    pub reinit_steps: usize,
}

impl LocalizedParams {
    /// Defaults with the ball radius scaled to the image: `max(5, 10%)` of
    /// the shorter side.
    pub fn for_size(width: usize, height: usize) -> Self {
        let radius = (0.1 * width.min(height) as f64).round().max(5.0);
        LocalizedParams {
            radius,
            lambda_len: 0.5,
            eps: Epsilon::DEFAULT,
            cfl: 0.45,
            reinit_every: 10,
            reinit_steps: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius >= 2.0) {
            return Err(Error::spec(format!(
                "localized radius {} must be >= 2",
                self.radius
            )));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::spec(format!(
                "localized cfl {} must lie in (0, 0.5]",
                self.cfl
            )));
        }
        if !(self.lambda_len >= 0.0) {
            return Err(Error::spec("localized lambda must be >= 0"));
        }
        Ok(())
    }
}

/// Ball membership: strictly closer than `radius`.
#[inline]
pub fn ball_mask_contains(x: (i64, i64), y: (i64, i64), radius: f64) -> bool {
    let (dx, dy) = ((x.0 - y.0) as f64, (x.1 - y.1) as f64);
    dx * dx + dy * dy < radius * radius
}

/// Integer offsets of the ball around the origin.
pub fn ball_offsets(radius: f64) -> Vec<(i64, i64)> {
    let r = radius.ceil() as i64;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if ball_mask_contains((0, 0), (dx, dy), radius) {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Local interior (`u_loc`) and exterior (`v_loc`) means on the narrow band;
/// `NaN` at points off the band.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalStats {
    pub u_loc: ScalarField,
    pub v_loc: ScalarField,
}

impl LocalStats {
    pub fn is_defined(&self, x: usize, y: usize) -> bool {
        !self.u_loc[(x, y)].is_nan()
    }
}

fn on_band(p: f64, eps: Epsilon) -> bool {
    p.abs() <= eps.get()
}

/// Ball neighbours of `(x, y)` clipped to the grid, as flat indices.
fn ball_indices<'a>(
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    offsets: &'a [(i64, i64)],
) -> impl Iterator<Item = usize> + 'a {
    let (xi, yi) = (x as i64, y as i64);
    offsets.iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (xi + dx, yi + dy);
        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
            None
        } else {
            Some(ny as usize * w + nx as usize)
        }
    })
}

fn means_at(
    image: &ScalarField,
    heav: &[f64],
    x: usize,
    y: usize,
    offsets: &[(i64, i64)],
) -> (f64, f64) {
    let (w, h) = image.dims();
    let (mut s_in, mut w_in, mut s_out, mut w_out) = (0.0, 0.0, 0.0, 0.0);
    for k in ball_indices(x, y, w, h, offsets) {
        let (i, hv) = (image.data()[k], heav[k]);
        s_in += hv * i;
        w_in += hv;
        s_out += (1.0 - hv) * i;
        w_out += 1.0 - hv;
    }
    let u = (w_in >= DEGENERATE_WEIGHT).then(|| s_in / w_in);
    let v = (w_out >= DEGENERATE_WEIGHT).then(|| s_out / w_out);
    match (u, v) {
        (Some(u), Some(v)) => (u, v),
        (Some(u), None) => (u, u),
        (None, Some(v)) => (v, v),
        (None, None) => unreachable!("ball always contains its centre"),
    }
}

pub fn local_stats(image: &ScalarField, phi: &LevelSet, params: &LocalizedParams) -> LocalStats {
    let (w, h) = phi.dims();
    let heav: Vec<f64> = phi
        .data()
        .iter()
        .map(|&p| heaviside_in(p, params.eps))
        .collect();
    let offsets = ball_offsets(params.radius);
    let mut u_loc = ScalarField::filled(w, h, f64::NAN);
    let mut v_loc = ScalarField::filled(w, h, f64::NAN);
    for y in 0..h {
        for x in 0..w {
            if on_band(phi[(x, y)], params.eps) {
                let (u, v) = means_at(image, &heav, x, y, &offsets);
                u_loc[(x, y)] = u;
                v_loc[(x, y)] = v;
            }
        }
    }
    LocalStats { u_loc, v_loc }
}

pub fn localized_energy(image: &ScalarField, phi: &LevelSet, params: &LocalizedParams) -> f64 {
    let (w, h) = phi.dims();
    let heav: Vec<f64> = phi
        .data()
        .iter()
        .map(|&p| heaviside_in(p, params.eps))
        .collect();
    let offsets = ball_offsets(params.radius);
    let mut total = 0.0;
    for y in 0..h {
        for x in 0..w {
            let d = dirac(phi[(x, y)], params.eps);
            if d == 0.0 {
                continue;
            }
            let (u, v) = means_at(image, &heav, x, y, &offsets);
            let local: f64 = ball_indices(x, y, w, h, &offsets)
                .map(|k| {
                    let i = image.data()[k];
                    heav[k] * (i - u).powi(2) + (1.0 - heav[k]) * (i - v).powi(2)
                })
                .sum();
            total += d * local;
        }
    }
    total
}

/// Descent direction of the localized energy, restricted to the band:
///
/// `speed(x) = delta(x) sum_{y in B(x)} delta(y) [(I(x) - u(y))^2 - (I(x) - v(y))^2] + lambda delta(x) kappa(x)`.
///
/// Pixel `x` is judged by the means of every band point whose ball contains
/// it, since those are the local fits its label enters. The means are inner
/// minimizers, so their own dependence on `phi` adds nothing. Exactly zero
/// wherever `dirac(phi) = 0`.
pub fn localized_speed(
    image: &ScalarField,
    phi: &LevelSet,
    params: &LocalizedParams,
) -> ScalarField {
    let (w, h) = phi.dims();
    let delta: Vec<f64> = phi.data().iter().map(|&p| dirac(p, params.eps)).collect();
    let offsets = ball_offsets(params.radius);
    let stats = local_stats(image, phi, params);
    let kappa = (params.lambda_len != 0.0).then(|| div(&normalized_gradient(phi)));
    let mut speed = ScalarField::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let d = delta[y * w + x];
            if d == 0.0 {
                continue;
            }
            let i = image[(x, y)];
            let force: f64 = ball_indices(x, y, w, h, &offsets)
                .filter(|&k| delta[k] != 0.0)
                .map(|k| {
                    let (u, v) = (stats.u_loc.data()[k], stats.v_loc.data()[k]);
                    delta[k] * ((i - u).powi(2) - (i - v).powi(2))
                })
                .sum();
            let curv = kappa
                .as_ref()
                .map_or(0.0, |kf| params.lambda_len * kf[(x, y)]);
            speed[(x, y)] = d * (force + curv);
        }
    }
    speed
}

/// One normalized explicit step: `dt = cfl / (max |speed| + SPEED_FLOOR)`.
/// Reinitialization is scheduled by the caller.
pub fn localized_step(image: &ScalarField, phi: &LevelSet, params: &LocalizedParams) -> LevelSet {
    let speed = localized_speed(image, phi, params);
    let dt = params.cfl / (speed.max_abs() + SPEED_FLOOR);
    phi.zip_map(&speed, |p, s| p + dt * s)
}
