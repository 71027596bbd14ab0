//! `levelseg`: level-set segmentation from the command line.

mod bench;
mod corpus;
mod fail;
mod manifest;
mod params;
mod segment;
mod synth;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "levelseg",
    version,
    about = "Level-set active contour segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment one image and export contours, an overlay and a manifest.
    Segment(segment::SegmentArgs),
    /// Generate a synthetic image and, optionally, its ground truth.
    Synth(synth::SynthArgs),
    /// Benchmark models over a corpus and write a CSV report.
    Bench(bench::BenchArgs),
}

fn main() {
    // clap exits with status 2 on bad flags
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Segment(a) => segment::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Bench(a) => bench::run(a),
    };
    if let Err(f) = outcome {
        eprintln!("error: {}", render_chain(&f.error));
        std::process::exit(f.code);
    }
}

/// Join the error chain, skipping causes a message already ends with.
fn render_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain().map(ToString::to_string) {
        if out.ends_with(&cause) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&cause);
    }
    out
}
