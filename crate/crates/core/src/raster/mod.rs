//! Image ingestion: Netpbm I/O, grayscale conversion, rescaling and
//! synthetic test images with known ground truth.

mod pnm;
mod synth;

pub use pnm::{
    decode_pnm, encode_pnm, load_pnm, load_pnm_with_comments, write_pnm, write_pnm_with_comments,
};
pub use synth::{synth, truth_mask, SynthGeometry, SynthKind, SynthSpec, NOISE_GENERATOR};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Luminance weights for RGB to gray.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Default cap on the longer image side before segmentation.
pub const DEFAULT_MAX_DIM: usize = 256;

/// Integer-sampled image with one (gray) or three (RGB) interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: u8,
    maxval: u16,
    samples: Vec<u16>,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: u8,
        maxval: u16,
        samples: Vec<u16>,
    ) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::spec(format!("unsupported channel count {channels}")));
        }
        if maxval == 0 {
            return Err(Error::spec("maxval must be positive"));
        }
        if samples.len() != width * height * channels as usize {
            return Err(Error::spec(format!(
                "{} samples do not fill {}x{}x{}",
                samples.len(),
                width,
                height,
                channels
            )));
        }
        if let Some(s) = samples.iter().find(|&&s| s > maxval) {
            return Err(Error::spec(format!("sample {s} exceeds maxval {maxval}")));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            maxval,
            samples,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn samples(&self) -> &[u16] {
        &self.samples
    }

    /// Quantize a field with values in `[0, 1]` to an 8-bit grayscale image.
    pub fn from_unit_field(f: &ScalarField) -> Self {
        let samples = f
            .data()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u16)
            .collect();
        RasterImage {
            width: f.width(),
            height: f.height(),
            channels: 1,
            maxval: 255,
            samples,
        }
    }

    /// Binary mask as an 8-bit image: 255 where set, 0 elsewhere.
    pub fn from_mask(width: usize, height: usize, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), width * height);
        RasterImage {
            width,
            height,
            channels: 1,
            maxval: 255,
            samples: mask.iter().map(|&m| if m { 255 } else { 0 }).collect(),
        }
    }

    /// Pixels of a 1-channel image above half of maxval.
    pub fn to_mask(&self) -> Vec<bool> {
        let half = u32::from(self.maxval) / 2;
        self.samples
            .chunks(self.channels as usize)
            .map(|px| u32::from(px[0]) > half)
            .collect()
    }
}

/// Gray field in `[0, 1]`: single-channel samples divide by maxval, RGB
/// samples are luminance-weighted first.
pub fn to_grayscale_normalized(img: &RasterImage) -> ScalarField {
    let scale = 1.0 / f64::from(img.maxval);
    let data: Vec<f64> = match img.channels {
        1 => img.samples.iter().map(|&s| f64::from(s) * scale).collect(),
        _ => img
            .samples
            .chunks_exact(3)
            .map(|px| {
                let l: f64 = px
                    .iter()
                    .zip(LUMA_WEIGHTS)
                    .map(|(&s, w)| f64::from(s) * w)
                    .sum();
                (l * scale).clamp(0.0, 1.0)
            })
            .collect(),
    };
    ScalarField::from_vec(img.width, img.height, data)
        .expect("sample count checked at construction")
}

/// Shrink so the longer side equals `max_dim`, preserving aspect ratio with
/// bilinear resampling. Fields that already fit are returned unchanged.
pub fn rescale_max_dim(f: &ScalarField, max_dim: usize) -> ScalarField {
    let (w, h) = f.dims();
    if w.max(h) <= max_dim {
        return f.clone();
    }
    let (nw, nh) = if w >= h {
        (
            max_dim,
            ((h * max_dim) as f64 / w as f64).round().max(1.0) as usize,
        )
    } else {
        (
            ((w * max_dim) as f64 / h as f64).round().max(1.0) as usize,
            max_dim,
        )
    };
    let sx = w as f64 / nw as f64;
    let sy = h as f64 / nh as f64;
    ScalarField::from_fn(nw, nh, |x, y| {
        // pixel-center alignment
        let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
        let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
        let top = f.get(x0, y0) * (1.0 - tx) + f.get(x1, y0) * tx;
        let bottom = f.get(x0, y1) * (1.0 - tx) + f.get(x1, y1) * tx;
        top * (1.0 - ty) + bottom * ty
    })
}
