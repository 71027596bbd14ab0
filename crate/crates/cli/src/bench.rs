//! `bench`: run several models over a directory of images.
//!
//! Each image is segmented by each requested model with its default
//! initialization and parameters (plus any overrides). Rows are sorted by
//! `(image, algo)` so the report does not depend on scheduling.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::Args;
use levelseg::engine::{evolve, Algorithm};
use levelseg::field::dice;
use levelseg::init::init_levelset;
use levelseg::raster::{load_pnm, DEFAULT_MAX_DIM};
use levelseg::{write_atomic, ScalarField};

use crate::corpus::{write_default_corpus, TRUTH_SUFFIX};
use crate::fail::{CliResult, Failure};
use crate::params::{flag_name, has_knob, ModelOverrides};
use crate::segment::{load_gray, parse_algo, parse_on_off, resolve_params};

pub const REPORT_HEADER: &str = "image,algo,iterations,wall_ms,dice,converged";

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of PGM/PPM images; `<name>.truth.pgm` siblings are ground
    /// truth masks.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Comma-separated model list.
    #[arg(long, value_delimiter = ',', value_parser = parse_algo, default_value = "rsf,drlse,localized")]
    pub algos: Vec<Algorithm>,
    /// CSV report path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the bundled synthetic corpus into this directory. Without
    /// `--corpus` the benchmark then runs on it.
    #[arg(long)]
    pub make_default_corpus: Option<PathBuf>,
    /// Iteration budget for every model; defaults to each model's own.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, value_parser = parse_on_off, default_value = "on")]
    pub converge: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
    /// Worker threads. Runs share cores, so timings are only comparable
    /// with one job per free core.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub model: ModelOverrides,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub algo: Algorithm,
    pub iterations: usize,
    pub wall_ms: f64,
    pub dice: Option<f64>,
    pub converged: bool,
}

struct CorpusImage {
    id: String,
    path: PathBuf,
    truth: Option<PathBuf>,
}

fn is_image(p: &Path) -> bool {
    let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
    let ext = p
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    matches!(ext.as_deref(), Some("pgm" | "ppm" | "pnm")) && !name.ends_with(TRUTH_SUFFIX)
}

fn scan_corpus(dir: &Path) -> CliResult<Vec<CorpusImage>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| Failure::input(anyhow::anyhow!("{}: {e}", dir.display())))?;
    let mut images = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Failure::input(anyhow::anyhow!("{}: {e}", dir.display())))?
            .path();
        if !path.is_file() || !is_image(&path) {
            continue;
        }
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        let truth = dir.join(format!("{id}{TRUTH_SUFFIX}"));
        images.push(CorpusImage {
            truth: truth.is_file().then_some(truth),
            id,
            path,
        });
    }
    if images.is_empty() {
        return Err(Failure::input(anyhow::anyhow!(
            "{}: no PGM/PPM images in corpus",
            dir.display()
        )));
    }
    images.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(images)
}

fn load_truth(path: &Path, dims: (usize, usize)) -> CliResult<Vec<bool>> {
    let img = load_pnm(path)?;
    if (img.width(), img.height()) != dims {
        return Err(Failure::input(anyhow::anyhow!(
            "{}: truth is {}x{} but the image is segmented at {}x{}",
            path.display(),
            img.width(),
            img.height(),
            dims.0,
            dims.1
        )));
    }
    Ok(img.to_mask())
}

fn run_one(
    args: &BenchArgs,
    image: &ScalarField,
    truth: Option<&[bool]>,
    algo: Algorithm,
) -> CliResult<(usize, f64, Option<f64>, bool)> {
    let (w, h) = image.dims();
    let (params, _) = resolve_params(
        algo,
        (w, h),
        args.iters,
        None,
        None,
        args.converge,
        &args.model,
    )?;
    let phi0 = init_levelset(&[algo.default_init(w, h)], w, h)?;
    let r = evolve(image, &phi0, &params)?;
    let d = truth.map(|t| dice(&r.phi_final.interior_mask(), t));
    Ok((r.iterations_run, r.wall_ms, d, r.converged))
}

pub fn format_report(rows: &[BenchRow]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in rows {
        let dice = r.dice.map(|d| format!("{d:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{:.3},{},{}",
            r.image, r.algo, r.iterations, r.wall_ms, dice, r.converged
        )
        .unwrap();
    }
    out
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    if let Some(dir) = &args.make_default_corpus {
        write_default_corpus(dir)?;
        println!("wrote default corpus to {}", dir.display());
    }
    let Some(corpus) = args.corpus.as_ref().or(args.make_default_corpus.as_ref()) else {
        return Err(Failure::usage(
            "--corpus is required unless --make-default-corpus is given",
        ));
    };
    let Some(report) = &args.report else {
        if args.corpus.is_none() {
            return Ok(());
        }
        return Err(Failure::usage("--report is required to run a benchmark"));
    };
    if args.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    if args.algos.is_empty() {
        return Err(Failure::usage("--algos must name at least one model"));
    }
    let mut algos = args.algos.clone();
    algos.sort();
    algos.dedup();
    for (knob, _) in args.model.given() {
        if !algos.iter().any(|&a| has_knob(a, knob)) {
            return Err(Failure::usage(format!(
                "{} applies to none of the requested models",
                flag_name(knob)
            )));
        }
    }

    let images = scan_corpus(corpus)?;
    let mut loaded = Vec::with_capacity(images.len());
    for img in &images {
        let (gray, _, _) = load_gray(&img.path, args.max_dim)
            .map_err(|f| f.context(format!("reading {}", img.path.display())))?;
        let truth = img
            .truth
            .as_deref()
            .map(|t| load_truth(t, gray.dims()))
            .transpose()?;
        loaded.push((img.id.clone(), gray, truth));
    }

    let tasks: Vec<(usize, Algorithm)> = (0..loaded.len())
        .flat_map(|i| algos.iter().map(move |&a| (i, a)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<CliResult<BenchRow>>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..args.jobs.min(tasks.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(i, algo)) = tasks.get(k) else {
                    break;
                };
                let (id, gray, truth) = &loaded[i];
                let row = run_one(args, gray, truth.as_deref(), algo)
                    .map(|(iterations, wall_ms, dice, converged)| BenchRow {
                        image: id.clone(),
                        algo,
                        iterations,
                        wall_ms,
                        dice,
                        converged,
                    })
                    .map_err(|f| f.context(format!("{algo} on {id}")));
                results.lock().unwrap().push(row);
            });
        }
    });
    let mut rows = results
        .into_inner()
        .unwrap()
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;
    rows.sort_by(|a, b| (&a.image, a.algo.name()).cmp(&(&b.image, b.algo.name())));

    if let Some(dir) = report.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::input(anyhow::anyhow!("{}: {e}", dir.display())))?;
    }
    write_atomic(report, format_report(&rows).as_bytes())?;
    println!("wrote {} rows to {}", rows.len(), report.display());
    Ok(())
}
