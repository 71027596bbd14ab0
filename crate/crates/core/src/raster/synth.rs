//! Synthetic test images with exact ground truth.
//!
//! Noise is additive Gaussian drawn with the Box–Muller transform from a
//! `ChaCha8Rng` seeded by `seed_from_u64(seed)`, one normal deviate per pixel
//! in row-major order. Values are clamped to `[0, 1]` after noise.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Identifies the noise generator described above, for provenance records.
pub const NOISE_GENERATOR: &str = "chacha8+box-muller";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Disk,
    TwoRegion,
    Ramp,
    Checker,
}

impl SynthKind {
    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Disk => "disk",
            SynthKind::TwoRegion => "tworegion",
            SynthKind::Ramp => "ramp",
            SynthKind::Checker => "checker",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(SynthKind::Disk),
            "tworegion" => Ok(SynthKind::TwoRegion),
            "ramp" => Ok(SynthKind::Ramp),
            "checker" => Ok(SynthKind::Checker),
            other => Err(Error::spec(format!(
                "unknown synthetic image kind '{other}'"
            ))),
        }
    }
}

/// Kind-specific geometry. The ramp image is a disk over a background with
/// an additive horizontal intensity ramp `slope * x / (width - 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SynthGeometry {
    Disk {
        cx: f64,
        cy: f64,
        radius: f64,
    },
    TwoRegion {
        split: f64,
    },
    Ramp {
        cx: f64,
        cy: f64,
        radius: f64,
        slope: f64,
    },
    Checker {
        cell: usize,
    },
}

impl SynthGeometry {
    pub fn kind(&self) -> SynthKind {
        match self {
            SynthGeometry::Disk { .. } => SynthKind::Disk,
            SynthGeometry::TwoRegion { .. } => SynthKind::TwoRegion,
            SynthGeometry::Ramp { .. } => SynthKind::Ramp,
            SynthGeometry::Checker { .. } => SynthKind::Checker,
        }
    }

    /// Whether pixel `(x, y)` belongs to the foreground.
    pub fn inside(&self, x: usize, y: usize) -> bool {
        let (xf, yf) = (x as f64, y as f64);
        match *self {
            SynthGeometry::Disk { cx, cy, radius } | SynthGeometry::Ramp { cx, cy, radius, .. } => {
                (xf - cx).powi(2) + (yf - cy).powi(2) <= radius * radius
            }
            SynthGeometry::TwoRegion { split } => xf >= split,
            SynthGeometry::Checker { cell } => (x / cell + y / cell) % 2 == 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub foreground: f64,
    pub background: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub geometry: SynthGeometry,
}

impl SynthSpec {
    pub const DEFAULT_RADIUS_FRACTION: f64 = 0.3;
    pub const DEFAULT_RAMP_SLOPE: f64 = 0.3;

    /// Noiseless spec with the kind's default geometry: a centered disk of
    /// radius `0.3 * min(width, height)`, a split at mid-width, or eight
    /// checker cells across the shorter side.
    pub fn new(kind: SynthKind, width: usize, height: usize) -> Self {
        let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
        let radius = Self::DEFAULT_RADIUS_FRACTION * width.min(height) as f64;
        let geometry = match kind {
            SynthKind::Disk => SynthGeometry::Disk { cx, cy, radius },
            SynthKind::TwoRegion => SynthGeometry::TwoRegion { split: cx },
            SynthKind::Ramp => SynthGeometry::Ramp {
                cx,
                cy,
                radius,
                slope: Self::DEFAULT_RAMP_SLOPE,
            },
            SynthKind::Checker => SynthGeometry::Checker {
                cell: (width.min(height) / 8).max(1),
            },
        };
        SynthSpec {
            width,
            height,
            foreground: 0.8,
            background: 0.2,
            noise_sigma: 0.0,
            seed: 0,
            geometry,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 {
            return Err(Error::spec(format!(
                "synthetic image must be at least 8x8, got {}x{}",
                self.width, self.height
            )));
        }
        for (name, v) in [
            ("foreground", self.foreground),
            ("background", self.background),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::spec(format!("{name} intensity {v} outside [0, 1]")));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::spec(format!(
                "noise sigma {} must be >= 0",
                self.noise_sigma
            )));
        }
        match self.geometry {
            SynthGeometry::Disk { radius, .. } | SynthGeometry::Ramp { radius, .. }
                if !(radius > 0.0) =>
            {
                Err(Error::spec("disk radius must be positive"))
            }
            SynthGeometry::Checker { cell: 0 } => Err(Error::spec("checker cell must be >= 1")),
            _ => Ok(()),
        }
    }
}

struct BoxMuller {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl BoxMuller {
    fn new(seed: u64) -> Self {
        BoxMuller {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        self.spare = Some(r * (TAU * u2).sin());
        r * (TAU * u2).cos()
    }
}

pub fn synth(spec: &SynthSpec) -> Result<ScalarField> {
    spec.validate()?;
    let mut noise = BoxMuller::new(spec.seed);
    let denom = (spec.width - 1) as f64;
    Ok(ScalarField::from_fn(spec.width, spec.height, |x, y| {
        let mut v = if spec.geometry.inside(x, y) {
            spec.foreground
        } else {
            spec.background
        };
        if let SynthGeometry::Ramp { slope, .. } = spec.geometry {
            v += slope * x as f64 / denom;
        }
        if spec.noise_sigma > 0.0 {
            v += spec.noise_sigma * noise.next();
        }
        v.clamp(0.0, 1.0)
    }))
}

/// Foreground mask of the spec's geometry (noise free).
pub fn truth_mask(spec: &SynthSpec) -> Vec<bool> {
    let mut mask = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        for x in 0..spec.width {
            mask.push(spec.geometry.inside(x, y));
        }
    }
    mask
}
