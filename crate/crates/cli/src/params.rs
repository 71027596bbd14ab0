//! Per-model command-line overrides.
//!
//! Every tunable model parameter has a knob name. The same names serve as
//! flag names (with `-` for `_`) and as manifest keys, which is what makes
//! a manifest replayable.

use clap::Args;
use levelseg::engine::{Algorithm, ModelParams};
use levelseg::Epsilon;
use serde_json::{Map, Value};

use crate::fail::{CliResult, Failure};

#[derive(Args, Clone, Debug, Default)]
pub struct ModelOverrides {
    /// Length (curvature) weight: chanvese, drlse, localized.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Time step: edgeflow, chanvese, drlse, rsf.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Width of the smoothed Heaviside and Dirac functions.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Distance regularization weight: drlse, rsf.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Weighted-area force: drlse.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Edge indicator smoothing scale: edgeflow, drlse.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Locality kernel scale: rsf.
    #[arg(long)]
    pub kernel_sigma: Option<f64>,
    /// Interior fitting weight: rsf.
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Exterior fitting weight: rsf.
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Length weight: rsf.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Local ball radius in pixels: localized.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Normalized step size: localized.
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Iterations between reinitializations: chanvese, localized.
    #[arg(long)]
    pub reinit_every: Option<usize>,
    /// Pseudo-time steps per reinitialization: chanvese, localized.
    #[arg(long)]
    pub reinit_steps: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KnobValue {
    Real(f64),
    Count(usize),
}

impl From<KnobValue> for Value {
    fn from(v: KnobValue) -> Value {
        match v {
            KnobValue::Real(x) => Value::from(x),
            KnobValue::Count(n) => Value::from(n),
        }
    }
}

enum Slot<'a> {
    Real(&'a mut f64),
    Count(&'a mut usize),
    Eps(&'a mut Epsilon),
}

/// The knobs of one model, in a fixed order.
fn slots(m: &mut ModelParams) -> Vec<(&'static str, Slot<'_>)> {
    use Slot::{Count, Eps, Real};
    match m {
        ModelParams::EdgeFlow(p) => vec![
            ("sigma", Real(&mut p.sigma)),
            ("dt", Real(&mut p.dt)),
            ("epsilon", Eps(&mut p.eps)),
        ],
        ModelParams::ChanVese(p) => vec![
            ("lambda", Real(&mut p.lambda_len)),
            ("dt", Real(&mut p.dt)),
            ("epsilon", Eps(&mut p.eps)),
            ("reinit_every", Count(&mut p.reinit_every)),
            ("reinit_steps", Count(&mut p.reinit_steps)),
        ],
        ModelParams::Drlse(p) => vec![
            ("mu", Real(&mut p.mu)),
            ("lambda", Real(&mut p.lambda_len)),
            ("alpha", Real(&mut p.alpha)),
            ("dt", Real(&mut p.dt)),
            ("sigma", Real(&mut p.sigma)),
            ("epsilon", Eps(&mut p.eps)),
        ],
        ModelParams::Rsf(p) => vec![
            ("kernel_sigma", Real(&mut p.sigma_k)),
            ("lambda1", Real(&mut p.lambda1)),
            ("lambda2", Real(&mut p.lambda2)),
            ("nu", Real(&mut p.nu)),
            ("mu", Real(&mut p.mu_reg)),
            ("dt", Real(&mut p.dt)),
            ("epsilon", Eps(&mut p.eps)),
        ],
        ModelParams::Localized(p) => vec![
            ("radius", Real(&mut p.radius)),
            ("lambda", Real(&mut p.lambda_len)),
            ("epsilon", Eps(&mut p.eps)),
            ("cfl", Real(&mut p.cfl)),
            ("reinit_every", Count(&mut p.reinit_every)),
            ("reinit_steps", Count(&mut p.reinit_steps)),
        ],
    }
}

/// Resolved `(knob, value)` pairs of a model, every default included.
pub fn knob_values(m: &ModelParams) -> Vec<(&'static str, KnobValue)> {
    let mut m = *m;
    slots(&mut m)
        .into_iter()
        .map(|(name, slot)| {
            let v = match slot {
                Slot::Real(x) => KnobValue::Real(*x),
                Slot::Count(n) => KnobValue::Count(*n),
                Slot::Eps(e) => KnobValue::Real(e.get()),
            };
            (name, v)
        })
        .collect()
}

pub fn has_knob(algo: Algorithm, knob: &str) -> bool {
    knob_values(&ModelParams::defaults(algo, 64, 64))
        .iter()
        .any(|(k, _)| *k == knob)
}

pub fn flag_name(knob: &str) -> String {
    format!("--{}", knob.replace('_', "-"))
}

impl ModelOverrides {
    /// Knobs given on the command line.
    pub fn given(&self) -> Vec<(&'static str, KnobValue)> {
        let reals = [
            ("lambda", self.lambda),
            ("dt", self.dt),
            ("epsilon", self.epsilon),
            ("mu", self.mu),
            ("alpha", self.alpha),
            ("sigma", self.sigma),
            ("kernel_sigma", self.kernel_sigma),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("nu", self.nu),
            ("radius", self.radius),
            ("cfl", self.cfl),
        ];
        let counts = [
            ("reinit_every", self.reinit_every),
            ("reinit_steps", self.reinit_steps),
        ];
        reals
            .into_iter()
            .filter_map(|(k, v)| v.map(|x| (k, KnobValue::Real(x))))
            .chain(
                counts
                    .into_iter()
                    .filter_map(|(k, v)| v.map(|n| (k, KnobValue::Count(n)))),
            )
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.given().is_empty()
    }

    /// Apply every given knob the model has. Returns the knobs it lacks.
    pub fn apply(&self, m: &mut ModelParams) -> CliResult<Vec<&'static str>> {
        set_knobs(m, &self.given())
    }

    /// Rebuild overrides from manifest entries; missing keys stay unset.
    pub fn from_manifest(doc: &Map<String, Value>, m: &ModelParams) -> CliResult<Self> {
        let mut out = ModelOverrides::default();
        for (name, default) in knob_values(m) {
            let Some(v) = doc.get(name) else { continue };
            let bad = || {
                Failure::input(anyhow::anyhow!(
                    "manifest key '{name}' has an invalid value {v}"
                ))
            };
            match default {
                KnobValue::Real(_) => {
                    let x = v.as_f64().ok_or_else(bad)?;
                    *out.real_mut(name) = Some(x);
                }
                KnobValue::Count(_) => {
                    let n = v.as_u64().ok_or_else(bad)? as usize;
                    *out.count_mut(name) = Some(n);
                }
            }
        }
        Ok(out)
    }

    fn real_mut(&mut self, name: &str) -> &mut Option<f64> {
        match name {
            "lambda" => &mut self.lambda,
            "dt" => &mut self.dt,
            "epsilon" => &mut self.epsilon,
            "mu" => &mut self.mu,
            "alpha" => &mut self.alpha,
            "sigma" => &mut self.sigma,
            "kernel_sigma" => &mut self.kernel_sigma,
            "lambda1" => &mut self.lambda1,
            "lambda2" => &mut self.lambda2,
            "nu" => &mut self.nu,
            "radius" => &mut self.radius,
            "cfl" => &mut self.cfl,
            other => unreachable!("no real knob '{other}'"),
        }
    }

    fn count_mut(&mut self, name: &str) -> &mut Option<usize> {
        match name {
            "reinit_every" => &mut self.reinit_every,
            "reinit_steps" => &mut self.reinit_steps,
            other => unreachable!("no count knob '{other}'"),
        }
    }
}

fn set_knobs(
    m: &mut ModelParams,
    given: &[(&'static str, KnobValue)],
) -> CliResult<Vec<&'static str>> {
    let mut slots = slots(m);
    let mut unused = Vec::new();
    for &(name, value) in given {
        let Some((_, slot)) = slots.iter_mut().find(|(k, _)| *k == name) else {
            unused.push(name);
            continue;
        };
        match (slot, value) {
            (Slot::Real(x), KnobValue::Real(v)) => **x = v,
            (Slot::Count(n), KnobValue::Count(v)) => **n = v,
            (Slot::Eps(e), KnobValue::Real(v)) => {
                **e = Epsilon::new(v).map_err(|err| Failure::usage(format!("--epsilon: {err}")))?
            }
            _ => unreachable!("knob '{name}' has a fixed type"),
        }
    }
    Ok(unused)
}
