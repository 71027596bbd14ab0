//! Evolution driver shared by all models.
//!
//! [`evolve`] steps a model up to `max_iters` times. Every `check_every`
//! iterations it records the model energy and compares the interior sign
//! pattern with the previous snapshot; `converge_patience` consecutive
//! unchanged snapshots end the run early.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::chanvese::{cv_step, cv_total_energy, CvParams};
use crate::contour::{extract_zero_set, Contour};
use crate::drlse::{drlse_energy, drlse_step, DrlseParams};
use crate::edge::{edge_indicator, edgeflow_energy, edgeflow_step, EdgeFlowParams, EdgeMap};
use crate::error::{Error, Result};
use crate::field::{sussman_reinit, LevelSet, ScalarField, REINIT_DTAU};
use crate::init::{default_shape, InitSpec, DEFAULT_STEP_HEIGHT};
use crate::localized::{localized_energy, localized_step, LocalizedParams};
use crate::rsf::{RsfModel, RsfParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    EdgeFlow,
    ChanVese,
    Drlse,
    Rsf,
    Localized,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::EdgeFlow,
        Algorithm::ChanVese,
        Algorithm::Drlse,
        Algorithm::Rsf,
        Algorithm::Localized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::EdgeFlow => "edgeflow",
            Algorithm::ChanVese => "chanvese",
            Algorithm::Drlse => "drlse",
            Algorithm::Rsf => "rsf",
            Algorithm::Localized => "localized",
        }
    }

    pub fn default_max_iters(self) -> usize {
        match self {
            Algorithm::EdgeFlow | Algorithm::ChanVese => 500,
            Algorithm::Drlse | Algorithm::Localized => 1000,
            Algorithm::Rsf => 400,
        }
    }

    /// Default initial contour: the middle 60% rectangle. The two models with
    /// a distance regularizer start from a binary step, which they repair on
    /// their own; a distance function would carry kinks at the image border
    /// that the replicate-edge regularizer can only flatten by raising its
    /// own energy.
    pub fn default_init(self, width: usize, height: usize) -> InitSpec {
        let shape = default_shape(width, height);
        match self {
            Algorithm::Drlse | Algorithm::Rsf => InitSpec::binary_step(shape, DEFAULT_STEP_HEIGHT),
            _ => InitSpec::sdf(shape),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::spec(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    EdgeFlow(EdgeFlowParams),
    ChanVese(CvParams),
    Drlse(DrlseParams),
    Rsf(RsfParams),
    Localized(LocalizedParams),
}

impl ModelParams {
    pub fn defaults(algo: Algorithm, width: usize, height: usize) -> Self {
        match algo {
            Algorithm::EdgeFlow => ModelParams::EdgeFlow(EdgeFlowParams::default()),
            Algorithm::ChanVese => ModelParams::ChanVese(CvParams::default()),
            Algorithm::Drlse => ModelParams::Drlse(DrlseParams::default()),
            Algorithm::Rsf => ModelParams::Rsf(RsfParams::default()),
            Algorithm::Localized => {
                ModelParams::Localized(LocalizedParams::for_size(width, height))
            }
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            ModelParams::EdgeFlow(_) => Algorithm::EdgeFlow,
            ModelParams::ChanVese(_) => Algorithm::ChanVese,
            ModelParams::Drlse(_) => Algorithm::Drlse,
            ModelParams::Rsf(_) => Algorithm::Rsf,
            ModelParams::Localized(_) => Algorithm::Localized,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::EdgeFlow(p) => p.validate(),
            ModelParams::ChanVese(p) => p.validate(),
            ModelParams::Drlse(p) => p.validate(),
            ModelParams::Rsf(p) => p.validate(),
            ModelParams::Localized(p) => p.validate(),
        }
    }

    /// `(every, steps)` when the model reinitializes.
    fn reinit_schedule(&self) -> Option<(usize, usize)> {
        match self {
            ModelParams::ChanVese(p) => Some((p.reinit_every, p.reinit_steps)),
            ModelParams::Localized(p) => Some((p.reinit_every, p.reinit_steps)),
            _ => None,
        }
        .filter(|&(every, steps)| every > 0 && steps > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgorithmParams {
    pub model: ModelParams,
    pub max_iters: usize,
    pub check_every: usize,
    pub converge_patience: usize,
    pub enable_convergence: bool,
}

impl AlgorithmParams {
    pub const DEFAULT_CHECK_EVERY: usize = 10;
    pub const DEFAULT_PATIENCE: usize = 3;

    pub fn defaults(algo: Algorithm, width: usize, height: usize) -> Self {
        AlgorithmParams {
            model: ModelParams::defaults(algo, width, height),
            max_iters: algo.default_max_iters(),
            check_every: Self::DEFAULT_CHECK_EVERY,
            converge_patience: Self::DEFAULT_PATIENCE,
            enable_convergence: true,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.model.algorithm()
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::spec("max_iters must be at least 1"));
        }
        if self.check_every == 0 || self.check_every > self.max_iters {
            return Err(Error::spec(format!(
                "check_every {} must lie in [1, max_iters = {}]",
                self.check_every, self.max_iters
            )));
        }
        if self.converge_patience == 0 {
            return Err(Error::spec("converge_patience must be at least 1"));
        }
        self.model.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentationResult {
    pub phi_final: LevelSet,
    /// Every zero-set contour, unfiltered.
    pub contours: Vec<Contour>,
    pub iterations_run: usize,
    pub wall_ms: f64,
    /// `(iteration, energy)` at iteration 0 and every `check_every`.
    pub energy_trace: Vec<(usize, f64)>,
    pub converged: bool,
    pub reinit_calls: usize,
}

/// Interior sign pattern `{phi < 0}`.
pub type SignMask = Vec<bool>;

/// Compare the current interior with the previous snapshot.
pub fn convergence_check(prev: &[bool], phi: &LevelSet) -> (bool, SignMask) {
    let current = phi.interior_mask();
    assert_eq!(prev.len(), current.len(), "sign mask dimensions differ");
    (prev == current.as_slice(), current)
}

/// A model bound to one image, with image-only quantities precomputed.
enum Bound<'a> {
    EdgeFlow(EdgeFlowParams, EdgeMap),
    ChanVese(&'a ScalarField, CvParams),
    Drlse(DrlseParams, EdgeMap),
    Rsf(RsfModel<'a>),
    Localized(&'a ScalarField, LocalizedParams),
}

impl<'a> Bound<'a> {
    fn new(image: &'a ScalarField, model: ModelParams) -> Self {
        match model {
            ModelParams::EdgeFlow(p) => Bound::EdgeFlow(p, edge_indicator(image, p.sigma)),
            ModelParams::ChanVese(p) => Bound::ChanVese(image, p),
            ModelParams::Drlse(p) => Bound::Drlse(p, edge_indicator(image, p.sigma)),
            ModelParams::Rsf(p) => Bound::Rsf(RsfModel::new(image, p)),
            ModelParams::Localized(p) => Bound::Localized(image, p),
        }
    }

    fn step(&self, phi: &LevelSet) -> LevelSet {
        match self {
            Bound::EdgeFlow(p, g) => edgeflow_step(phi, g, p.dt),
            Bound::ChanVese(i, p) => cv_step(i, phi, p),
            Bound::Drlse(p, g) => drlse_step(phi, g, p),
            Bound::Rsf(m) => m.step(phi),
            Bound::Localized(i, p) => localized_step(i, phi, p),
        }
    }

    fn energy(&self, phi: &LevelSet) -> f64 {
        match self {
            Bound::EdgeFlow(p, g) => edgeflow_energy(phi, g, p.eps),
            Bound::ChanVese(i, p) => cv_total_energy(i, phi, p),
            Bound::Drlse(p, g) => drlse_energy(phi, g, p),
            Bound::Rsf(m) => m.energy(phi),
            Bound::Localized(i, p) => localized_energy(i, phi, p),
        }
    }
}

pub fn evolve(
    image: &ScalarField,
    phi0: &LevelSet,
    params: &AlgorithmParams,
) -> Result<SegmentationResult> {
    image.check_same_dims(phi0)?;
    params.validate()?;
    if !image.all_finite() {
        return Err(Error::spec("image contains non-finite values"));
    }
    if !phi0.all_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let model = Bound::new(image, params.model);
    let reinit = params.model.reinit_schedule();

    let start = Instant::now();
    let mut phi = phi0.clone();
    let mut energy_trace = vec![(0, model.energy(&phi))];
    let mut snapshot = phi.interior_mask();
    let (mut stable_checks, mut converged, mut reinit_calls) = (0, false, 0);
    let mut iterations_run = 0;
    for it in 1..=params.max_iters {
        phi = model.step(&phi);
        if let Some((every, steps)) = reinit {
            if it % every == 0 {
                phi = sussman_reinit(&phi, steps, REINIT_DTAU);
                reinit_calls += 1;
            }
        }
        if !phi.all_finite() {
            return Err(Error::NonFinite { iteration: it });
        }
        iterations_run = it;
        if it % params.check_every == 0 {
            energy_trace.push((it, model.energy(&phi)));
            let (stable, current) = convergence_check(&snapshot, &phi);
            snapshot = current;
            stable_checks = if stable { stable_checks + 1 } else { 0 };
            if params.enable_convergence && stable_checks >= params.converge_patience {
                converged = true;
                break;
            }
        }
    }
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    Ok(SegmentationResult {
        contours: extract_zero_set(&phi),
        phi_final: phi,
        iterations_run,
        wall_ms,
        energy_trace,
        converged,
        reinit_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{init_levelset, Shape};

    fn circle_phi(n: usize, r: f64) -> LevelSet {
        init_levelset(
            &[InitSpec::sdf(Shape::Circle {
                cx: n as f64 / 2.0,
                cy: n as f64 / 2.0,
                r,
            })],
            n,
            n,
        )
        .unwrap()
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("snake".parse::<Algorithm>().is_err());
    }

    #[test]
    fn defaults_are_valid() {
        for a in Algorithm::ALL {
            let p = AlgorithmParams::defaults(a, 128, 96);
            assert!(p.validate().is_ok(), "{a}");
            assert_eq!(p.algorithm(), a);
        }
        let mut p = AlgorithmParams::defaults(Algorithm::ChanVese, 32, 32);
        p.max_iters = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn single_iteration() {
        let img = ScalarField::from_fn(24, 24, |x, _| if x < 12 { 0.1 } else { 0.9 });
        let mut p = AlgorithmParams::defaults(Algorithm::ChanVese, 24, 24);
        p.max_iters = 1;
        p.check_every = 1;
        let r = evolve(&img, &circle_phi(24, 6.0), &p).unwrap();
        assert_eq!(r.iterations_run, 1);
        assert_eq!(r.energy_trace.len(), 2);
    }

    #[test]
    fn constant_image_converges_in_three_checks() {
        let img = ScalarField::filled(32, 32, 0.5);
        let p = AlgorithmParams::defaults(Algorithm::ChanVese, 32, 32);
        let r = evolve(&img, &circle_phi(32, 8.0), &p).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations_run, 3 * p.check_every);
    }

    #[test]
    fn disabled_convergence_runs_full_budget() {
        let img = ScalarField::filled(32, 32, 0.5);
        let mut p = AlgorithmParams::defaults(Algorithm::ChanVese, 32, 32);
        p.enable_convergence = false;
        p.max_iters = 60;
        let r = evolve(&img, &circle_phi(32, 8.0), &p).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_run, 60);
        let its: Vec<usize> = r.energy_trace.iter().map(|e| e.0).collect();
        assert_eq!(its, vec![0, 10, 20, 30, 40, 50, 60]);
        assert_eq!(r.reinit_calls, 60 / p.model.reinit_schedule().unwrap().0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let img = ScalarField::filled(16, 16, 0.5);
        let p = AlgorithmParams::defaults(Algorithm::Rsf, 16, 16);
        assert!(matches!(
            evolve(&img, &circle_phi(20, 5.0), &p),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nan_is_reported_with_iteration() {
        let mut img = ScalarField::filled(16, 16, 0.5);
        let mut phi = circle_phi(16, 5.0);
        let p = AlgorithmParams::defaults(Algorithm::ChanVese, 16, 16);
        phi.set(3, 3, f64::NAN);
        assert!(matches!(
            evolve(&img, &phi, &p),
            Err(Error::NonFinite { iteration: 0 })
        ));
        // squared misfits overflow on absurd intensities and turn into NaN
        img = ScalarField::from_fn(16, 16, |x, _| if x < 8 { 0.0 } else { 1e200 });
        match evolve(&img, &circle_phi(16, 5.0), &p) {
            Err(Error::NonFinite { iteration }) => assert_eq!(iteration, 1),
            other => panic!("expected numerical failure, got {other:?}"),
        }
    }

    #[test]
    fn convergence_check_semantics() {
        let phi = circle_phi(16, 5.0);
        let mask = phi.interior_mask();
        assert!(convergence_check(&mask, &phi).0);
        let mut flipped = mask.clone();
        flipped[0] = !flipped[0];
        assert!(!convergence_check(&flipped, &phi).0);
    }

    #[test]
    fn oscillation_never_converges() {
        // one pixel alternates sign between checks: patience is never reached
        let a = circle_phi(16, 5.0);
        let mut b = a.clone();
        b.set(0, 0, -1.0);
        let mut snapshot = a.interior_mask();
        let mut stable = 0;
        for k in 0..20 {
            let phi = if k % 2 == 0 { &b } else { &a };
            let (s, next) = convergence_check(&snapshot, phi);
            snapshot = next;
            stable = if s { stable + 1 } else { 0 };
            assert!(stable < 3);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let img = ScalarField::from_fn(32, 32, |x, y| {
            if (x as f64 - 15.0).hypot(y as f64 - 16.0) < 8.0 {
                0.8
            } else {
                0.2
            }
        });
        for a in Algorithm::ALL {
            let mut p = AlgorithmParams::defaults(a, 32, 32);
            p.max_iters = 30;
            let phi0 = init_levelset(&[a.default_init(32, 32)], 32, 32).unwrap();
            let r1 = evolve(&img, &phi0, &p).unwrap();
            let r2 = evolve(&img, &phi0, &p).unwrap();
            assert_eq!(r1.phi_final, r2.phi_final, "{a}");
            assert_eq!(r1.iterations_run, r2.iterations_run);
        }
    }
}
