//! `segment`: evolve one model on one image and export the result.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Args;
use levelseg::contour::{
    contours_to_csv, contours_to_svg, filter_by_length, render_overlay, DEFAULT_MIN_LEN,
};
use levelseg::engine::{evolve, Algorithm, AlgorithmParams, SegmentationResult};
use levelseg::init::{init_levelset, InitMode, InitSpec, Shape};
use levelseg::raster::{
    encode_pnm, load_pnm_with_comments, rescale_max_dim, to_grayscale_normalized, DEFAULT_MAX_DIM,
};
use levelseg::{write_atomic, ScalarField};
use serde_json::{Map, Value};

use crate::fail::{CliResult, Failure};
use crate::manifest::{self, phi_sha256};
use crate::params::{flag_name, knob_values, ModelOverrides};
use crate::synth::{provenance_value, seed_from_comments};

#[derive(Args, Debug)]
pub struct SegmentArgs {
    /// edgeflow, chanvese, drlse, rsf or localized.
    #[arg(long, value_parser = parse_algo, required_unless_present = "replay")]
    pub algo: Option<Algorithm>,
    /// Input PGM or PPM image.
    #[arg(long, required_unless_present = "replay")]
    pub input: Option<PathBuf>,
    /// Initial contour, `circle:cx,cy,r` or `rect:x0,y0,x1,y1`. Repeat for a
    /// union of several contours. Defaults to the middle 60% rectangle.
    #[arg(long, value_parser = parse_shape)]
    pub init: Vec<Shape>,
    /// `sdf` or `step[:height]`; defaults to the model's own choice.
    #[arg(long, value_parser = parse_init_mode)]
    pub init_mode: Option<InitMode>,
    /// Iteration budget; defaults to the model's.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Iterations between convergence checks and energy samples.
    #[arg(long)]
    pub check_every: Option<usize>,
    /// Consecutive unchanged checks that count as converged.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Stop early once the interior stops changing.
    #[arg(long, value_parser = parse_on_off)]
    pub converge: Option<bool>,
    /// Output files are named `<prefix>.overlay.ppm`, `.contours.csv`,
    /// `.contours.svg` and `.manifest.json`.
    #[arg(long)]
    pub out_prefix: PathBuf,
    /// Contours shorter than this many pixels are dropped from the exports.
    #[arg(long)]
    pub min_contour_len: Option<f64>,
    /// Longer image side is shrunk to this before segmenting.
    #[arg(long)]
    pub max_dim: Option<usize>,
    /// Write the manifest here instead of `<prefix>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Re-run the configuration recorded in a manifest.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelOverrides,
}

pub fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: levelseg::Error| e.to_string())
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse().map_err(|e: levelseg::Error| e.to_string())
}

fn parse_init_mode(s: &str) -> Result<InitMode, String> {
    match s {
        "sdf" => Ok(InitMode::Sdf),
        "step" => Ok(InitMode::BinaryStep(levelseg::init::DEFAULT_STEP_HEIGHT)),
        _ => {
            let h = s
                .strip_prefix("step:")
                .ok_or_else(|| format!("'{s}' is neither sdf nor step[:height]"))?;
            h.parse()
                .map(InitMode::BinaryStep)
                .map_err(|e| format!("'{h}': {e}"))
        }
    }
}

pub fn parse_on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(format!("expected on or off, got '{s}'")),
    }
}

fn init_mode_text(m: InitMode) -> String {
    match m {
        InitMode::Sdf => "sdf".into(),
        InitMode::BinaryStep(h) => format!("step:{h}"),
    }
}

/// Everything that determines a run, before the image is read.
#[derive(Clone, Debug)]
struct RunConfig {
    algo: Algorithm,
    input: PathBuf,
    shapes: Vec<Shape>,
    init_mode: Option<InitMode>,
    max_iters: Option<usize>,
    check_every: Option<usize>,
    patience: Option<usize>,
    converge: bool,
    max_dim: usize,
    min_len: f64,
    model: ModelOverrides,
}

impl RunConfig {
    fn from_args(a: &SegmentArgs) -> Self {
        RunConfig {
            algo: a.algo.expect("clap enforces --algo"),
            input: a.input.clone().expect("clap enforces --input"),
            shapes: a.init.clone(),
            init_mode: a.init_mode,
            max_iters: a.iters,
            check_every: a.check_every,
            patience: a.patience,
            converge: a.converge.unwrap_or(true),
            max_dim: a.max_dim.unwrap_or(DEFAULT_MAX_DIM),
            min_len: a.min_contour_len.unwrap_or(DEFAULT_MIN_LEN),
            model: a.model.clone(),
        }
    }

    fn from_manifest(path: &Path) -> CliResult<Self> {
        let doc = manifest::read(path)?;
        let bad = |key: &str| {
            Failure::input(anyhow::anyhow!(
                "{}: missing or invalid '{key}'",
                path.display()
            ))
        };
        let text = |key: &str| doc.get(key).and_then(Value::as_str).ok_or_else(|| bad(key));
        let count = |key: &str| {
            doc.get(key)
                .and_then(Value::as_u64)
                .map(|n| n as usize)
                .ok_or_else(|| bad(key))
        };
        let algo: Algorithm = text("algo")?.parse().map_err(|_| bad("algo"))?;
        let shapes = text("init")?
            .split(';')
            .map(str::parse)
            .collect::<Result<Vec<Shape>, _>>()
            .map_err(|_| bad("init"))?;
        let init_mode = parse_init_mode(text("init_mode")?).map_err(|_| bad("init_mode"))?;
        let (width, height) = (count("width")?, count("height")?);
        let defaults = AlgorithmParams::defaults(algo, width, height);
        Ok(RunConfig {
            algo,
            input: PathBuf::from(text("input")?),
            shapes,
            init_mode: Some(init_mode),
            max_iters: Some(count("max_iters")?),
            check_every: Some(count("check_every")?),
            patience: Some(count("converge_patience")?),
            converge: doc
                .get("converge")
                .and_then(Value::as_bool)
                .ok_or_else(|| bad("converge"))?,
            max_dim: count("max_dim")?,
            min_len: doc
                .get("min_contour_len")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("min_contour_len"))?,
            model: ModelOverrides::from_manifest(&doc, &defaults.model)?,
        })
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

/// Load an image as a `[0, 1]` gray field no larger than `max_dim`, along
/// with its original size and header comments.
pub fn load_gray(
    path: &Path,
    max_dim: usize,
) -> CliResult<(ScalarField, (usize, usize), Vec<String>)> {
    let (img, comments) = load_pnm_with_comments(path)?;
    let gray = to_grayscale_normalized(&img);
    Ok((
        rescale_max_dim(&gray, max_dim),
        (img.width(), img.height()),
        comments,
    ))
}

/// Resolve the model parameters for one algorithm on a `width x height`
/// image. Knobs the model does not have are returned, not rejected.
pub fn resolve_params(
    algo: Algorithm,
    (width, height): (usize, usize),
    max_iters: Option<usize>,
    check_every: Option<usize>,
    patience: Option<usize>,
    converge: bool,
    model: &ModelOverrides,
) -> CliResult<(AlgorithmParams, Vec<&'static str>)> {
    let mut p = AlgorithmParams::defaults(algo, width, height);
    p.max_iters = max_iters.unwrap_or(p.max_iters);
    // a budget below the default check interval still gets checked
    p.check_every = check_every.unwrap_or(p.check_every.min(p.max_iters.max(1)));
    p.converge_patience = patience.unwrap_or(p.converge_patience);
    p.enable_convergence = converge;
    let unused = model.apply(&mut p.model)?;
    Ok((p, unused))
}

pub fn run(args: &SegmentArgs) -> CliResult<()> {
    let config = match &args.replay {
        Some(path) => {
            if args.algo.is_some()
                || args.input.is_some()
                || !args.init.is_empty()
                || args.init_mode.is_some()
                || args.iters.is_some()
                || args.check_every.is_some()
                || args.patience.is_some()
                || args.converge.is_some()
                || args.max_dim.is_some()
                || args.min_contour_len.is_some()
                || !args.model.is_empty()
            {
                return Err(Failure::usage("--replay takes its parameters from the manifest; only --out-prefix and --manifest may accompany it"));
            }
            RunConfig::from_manifest(path)
                .map_err(|f| f.context(format!("replaying {}", path.display())))?
        }
        None => RunConfig::from_args(args),
    };
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out_prefix, ".manifest.json"));
    execute(&config, &args.out_prefix, &manifest_path)
}

fn execute(c: &RunConfig, prefix: &Path, manifest_path: &Path) -> CliResult<()> {
    if c.max_dim < 2 {
        return Err(Failure::usage("--max-dim must be at least 2"));
    }
    let (image, (in_w, in_h), comments) = load_gray(&c.input, c.max_dim)
        .map_err(|f| f.context(format!("reading {}", c.input.display())))?;
    let dims = image.dims();

    let (params, unused) = resolve_params(
        c.algo,
        dims,
        c.max_iters,
        c.check_every,
        c.patience,
        c.converge,
        &c.model,
    )?;
    if let Some(k) = unused.first() {
        return Err(Failure::usage(format!(
            "{} does not apply to {}",
            flag_name(k),
            c.algo
        )));
    }

    let default_init = c.algo.default_init(dims.0, dims.1);
    let shapes = if c.shapes.is_empty() {
        vec![default_init.shape]
    } else {
        c.shapes.clone()
    };
    let mode = c.init_mode.unwrap_or(default_init.mode);
    let specs: Vec<InitSpec> = shapes
        .iter()
        .map(|&shape| InitSpec { shape, mode })
        .collect();
    let phi0 =
        init_levelset(&specs, dims.0, dims.1).map_err(|e| Failure::from(e).context("--init"))?;

    let result = evolve(&image, &phi0, &params)?;
    let kept = filter_by_length(&result.contours, c.min_len);

    let overlay = with_suffix(prefix, ".overlay.ppm");
    let csv = with_suffix(prefix, ".contours.csv");
    let svg = with_suffix(prefix, ".contours.svg");
    for p in [&overlay, &csv, &svg, &manifest_path.to_path_buf()] {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)
                .map_err(|e| Failure::input(anyhow::anyhow!("{}: {e}", dir.display())))?;
        }
    }
    write_atomic(&overlay, &encode_pnm(&render_overlay(&image, &kept), &[]))?;
    write_atomic(&csv, contours_to_csv(&kept).as_bytes())?;
    write_atomic(&svg, contours_to_svg(&kept, dims.0, dims.1).as_bytes())?;

    let mut doc = Map::new();
    let mut put = |k: &str, v: Value| {
        doc.insert(k.to_string(), v);
    };
    put("tool", "levelseg".into());
    put("version", env!("CARGO_PKG_VERSION").into());
    put("algo", c.algo.name().into());
    put("input", c.input.to_string_lossy().into_owned().into());
    put("input_width", in_w.into());
    put("input_height", in_h.into());
    put("width", dims.0.into());
    put("height", dims.1.into());
    put("max_dim", c.max_dim.into());
    put(
        "init",
        shapes
            .iter()
            .map(Shape::to_string)
            .collect::<Vec<_>>()
            .join(";")
            .into(),
    );
    put("init_mode", init_mode_text(mode).into());
    put("max_iters", params.max_iters.into());
    put("check_every", params.check_every.into());
    put("converge_patience", params.converge_patience.into());
    put("converge", params.enable_convergence.into());
    put("min_contour_len", c.min_len.into());
    for (k, v) in knob_values(&params.model) {
        put(k, v.into());
    }
    record_result(&mut put, &result);
    put("contours_total", result.contours.len().into());
    put("contours_kept", kept.len().into());
    put("overlay", overlay.to_string_lossy().into_owned().into());
    put("contours_csv", csv.to_string_lossy().into_owned().into());
    put("contours_svg", svg.to_string_lossy().into_owned().into());
    put(
        "manifest",
        manifest_path.to_string_lossy().into_owned().into(),
    );
    if let Some(seed) = seed_from_comments(&comments) {
        put("seed", seed.into());
        if let Some(rng) = provenance_value(&comments, "rng") {
            put("noise_generator", rng.into());
        }
    }
    manifest::write(manifest_path, &doc)?;

    println!(
        "{}: {} iterations ({}), {:.1} ms, {} of {} contours kept",
        c.algo,
        result.iterations_run,
        if result.converged {
            "converged"
        } else {
            "budget reached"
        },
        result.wall_ms,
        kept.len(),
        result.contours.len()
    );
    Ok(())
}

fn record_result(put: &mut impl FnMut(&str, Value), r: &SegmentationResult) {
    put("iterations_run", r.iterations_run.into());
    put("converged", r.converged.into());
    put("wall_ms", r.wall_ms.into());
    put("reinit_calls", r.reinit_calls.into());
    put("phi_sha256", phi_sha256(&r.phi_final).into());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_mode_syntax() {
        assert_eq!(parse_init_mode("sdf"), Ok(InitMode::Sdf));
        assert_eq!(parse_init_mode("step"), Ok(InitMode::BinaryStep(2.0)));
        assert_eq!(parse_init_mode("step:1.5"), Ok(InitMode::BinaryStep(1.5)));
        assert!(parse_init_mode("steep").is_err());
        for m in [InitMode::Sdf, InitMode::BinaryStep(0.75)] {
            assert_eq!(parse_init_mode(&init_mode_text(m)), Ok(m));
        }
    }

    #[test]
    fn suffixes_append_to_the_prefix() {
        assert_eq!(
            with_suffix(Path::new("out/run1"), ".overlay.ppm"),
            PathBuf::from("out/run1.overlay.ppm")
        );
        assert_eq!(with_suffix(Path::new("a.b"), ".x"), PathBuf::from("a.b.x"));
    }

    #[test]
    fn short_budgets_shrink_the_check_interval() {
        let (p, unused) = resolve_params(
            Algorithm::ChanVese,
            (32, 32),
            Some(3),
            None,
            None,
            true,
            &ModelOverrides::default(),
        )
        .unwrap();
        assert_eq!((p.max_iters, p.check_every), (3, 3));
        assert!(unused.is_empty());
    }
}
