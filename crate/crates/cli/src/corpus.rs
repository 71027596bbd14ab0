//! The bundled benchmark corpus: five 128x128 disk-type images with known
//! ground truth, written by `bench --make-default-corpus`.

use std::path::Path;

use levelseg::raster::{SynthGeometry, SynthKind, SynthSpec};

use crate::fail::{CliResult, Failure};
use crate::synth::write_synth;

pub const TRUTH_SUFFIX: &str = ".truth.pgm";

pub fn default_corpus() -> Vec<(&'static str, SynthSpec)> {
    let disk = |noise, seed| SynthSpec {
        noise_sigma: noise,
        seed,
        ..SynthSpec::new(SynthKind::Disk, 128, 128)
    };
    let mut ramp = SynthSpec {
        foreground: 0.4,
        background: 0.3,
        noise_sigma: 0.05,
        seed: 42,
        ..SynthSpec::new(SynthKind::Ramp, 128, 128)
    };
    if let SynthGeometry::Ramp { slope, .. } = &mut ramp.geometry {
        *slope = 0.3;
    }
    vec![
        ("disk_n05_s42", disk(0.05, 42)),
        ("disk_n08_s43", disk(0.08, 43)),
        ("disk_n10_s7", disk(0.10, 7)),
        (
            "lowcontrast_s5",
            SynthSpec {
                foreground: 0.6,
                background: 0.4,
                ..disk(0.05, 5)
            },
        ),
        ("ramp_s42", ramp),
    ]
}

/// Write every corpus image as `<name>.pgm` with a `<name>.truth.pgm` mask.
pub fn write_default_corpus(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::input(anyhow::anyhow!("{}: {e}", dir.display())))?;
    for (name, spec) in default_corpus() {
        let out = dir.join(format!("{name}.pgm"));
        let truth = dir.join(format!("{name}{TRUTH_SUFFIX}"));
        write_synth(&spec, &out, Some(&truth))?;
    }
    Ok(())
}
