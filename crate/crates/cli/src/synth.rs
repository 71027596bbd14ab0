//! `synth`: synthetic test images with exact ground truth.

use std::path::{Path, PathBuf};

use clap::Args;
use levelseg::raster::{
    synth, truth_mask, write_pnm_with_comments, RasterImage, SynthGeometry, SynthKind, SynthSpec,
    NOISE_GENERATOR,
};

use crate::fail::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// disk, tworegion, ramp or checker.
    #[arg(long, default_value = "disk", value_parser = parse_kind)]
    pub kind: SynthKind,
    /// Image size as WIDTHxHEIGHT.
    #[arg(long, default_value = "128x128", value_parser = parse_size)]
    pub size: (usize, usize),
    #[arg(long)]
    pub fg: Option<f64>,
    #[arg(long)]
    pub bg: Option<f64>,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Disk or ramp centre as X,Y.
    #[arg(long, value_parser = parse_pair)]
    pub center: Option<(f64, f64)>,
    /// Disk or ramp radius.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ramp amplitude across the image width.
    #[arg(long, allow_hyphen_values = true)]
    pub slope: Option<f64>,
    /// Output image (binary PGM).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the noise-free foreground mask here.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<SynthKind, String> {
    s.parse().map_err(|e: levelseg::Error| e.to_string())
}

pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
    let dim = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}"));
    Ok((dim(w)?, dim(h)?))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected X,Y")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    Ok((num(a)?, num(b)?))
}

impl SynthArgs {
    pub fn spec(&self) -> CliResult<SynthSpec> {
        let (width, height) = self.size;
        let mut spec = SynthSpec::new(self.kind, width, height);
        spec.foreground = self.fg.unwrap_or(spec.foreground);
        spec.background = self.bg.unwrap_or(spec.background);
        spec.noise_sigma = self.noise;
        spec.seed = self.seed;
        match &mut spec.geometry {
            SynthGeometry::Disk { cx, cy, radius } | SynthGeometry::Ramp { cx, cy, radius, .. } => {
                if let Some((x, y)) = self.center {
                    (*cx, *cy) = (x, y);
                }
                *radius = self.radius.unwrap_or(*radius);
            }
            _ if self.center.is_some() || self.radius.is_some() => {
                return Err(Failure::usage(format!(
                    "--center and --radius only apply to disk and ramp, not {}",
                    self.kind
                )));
            }
            _ => {}
        }
        match &mut spec.geometry {
            SynthGeometry::Ramp { slope, .. } => *slope = self.slope.unwrap_or(*slope),
            _ if self.slope.is_some() => {
                return Err(Failure::usage(format!(
                    "--slope only applies to ramp, not {}",
                    self.kind
                )))
            }
            _ => {}
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Header comment recording how an image was generated. `segment` reads the
/// `seed=` and `rng=` tokens back into its manifest.
pub fn provenance(spec: &SynthSpec) -> String {
    let mut line = format!(
        "levelseg synth kind={} size={}x{} fg={} bg={} noise={} seed={} rng={}",
        spec.geometry.kind(),
        spec.width,
        spec.height,
        spec.foreground,
        spec.background,
        spec.noise_sigma,
        spec.seed,
        NOISE_GENERATOR
    );
    match spec.geometry {
        SynthGeometry::Disk { cx, cy, radius } => {
            line += &format!(" center={cx},{cy} radius={radius}")
        }
        SynthGeometry::Ramp {
            cx,
            cy,
            radius,
            slope,
        } => line += &format!(" center={cx},{cy} radius={radius} slope={slope}"),
        SynthGeometry::TwoRegion { split } => line += &format!(" split={split}"),
        SynthGeometry::Checker { cell } => line += &format!(" cell={cell}"),
    }
    line
}

/// The value of a `key=` token in a provenance comment, if any.
pub fn provenance_value<'a>(comments: &'a [String], key: &str) -> Option<&'a str> {
    comments
        .iter()
        .flat_map(|c| c.split_whitespace())
        .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('='))
}

pub fn seed_from_comments(comments: &[String]) -> Option<u64> {
    provenance_value(comments, "seed")?.parse().ok()
}

pub fn write_synth(spec: &SynthSpec, out: &Path, truth: Option<&Path>) -> CliResult<()> {
    let field = synth(spec)?;
    let comments = [provenance(spec)];
    write_pnm_with_comments(&RasterImage::from_unit_field(&field), &comments, out)?;
    if let Some(t) = truth {
        let mask = RasterImage::from_mask(spec.width, spec.height, &truth_mask(spec));
        write_pnm_with_comments(&mask, &comments, t)?;
    }
    Ok(())
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let spec = args.spec()?;
    write_synth(&spec, &args.out, args.truth.as_deref())
}
