use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::CalibrationError;

/// An unnormalized log density over `R^dim`.
pub trait Target {
    fn dim(&self) -> usize;

    fn log_density(&self, x: &[f64]) -> f64;

    /// The terms of `log_density` that involve coordinate `c`. Differences
    /// in this value must equal differences in `log_density` when only `c`
    /// changes.
    fn log_density_coord(&self, x: &[f64], c: usize) -> f64 {
        let _ = c;
        self.log_density(x)
    }

    /// Extra directions for joint random-walk moves, tried after every
    /// coordinate sweep. Useful along ridges the coordinate moves cross
    /// slowly.
    fn directions(&self) -> Vec<Vec<f64>> {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub warmup: usize,
    pub draws: usize,
    /// Sweeps per kept draw.
    pub thin: usize,
    pub seed: u64,
    pub initial_step: f64,
    /// Per-coordinate acceptance rate the warmup adaptation aims for.
    pub target_accept: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig::star()
    }
}

impl SamplerConfig {
    /// 50 warmup sweeps and 150 draws.
    pub fn star() -> Self {
        SamplerConfig {
            warmup: 50,
            draws: 150,
            thin: 1,
            seed: 0,
            initial_step: 1.0,
            target_accept: 0.35,
        }
    }

    /// 30 warmup sweeps and 100 draws.
    pub fn binary() -> Self {
        SamplerConfig {
            warmup: 30,
            draws: 100,
            ..SamplerConfig::star()
        }
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        let bad = |m: &str| Err(CalibrationError::InvalidConfig(m.to_string()));
        if self.warmup == 0 || self.draws == 0 || self.thin == 0 {
            return bad("warmup, draws and thin must be at least 1");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return bad("target_accept must be in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub warmup: usize,
    pub draws: usize,
    pub thin: usize,
    pub seed: u64,
    /// Accepted fraction of all proposals after warmup.
    pub acceptance_rate: f64,
    pub min_step: f64,
    pub max_step: f64,
}

#[derive(Clone, Debug)]
pub struct Chain {
    /// `draws` states, one per kept sweep.
    pub samples: Vec<Vec<f64>>,
    pub step_sizes: Vec<f64>,
    pub diagnostics: Diagnostics,
}

const MIN_STEP: f64 = 1e-4;
const MAX_STEP: f64 = 1e2;

/// Component-wise random-walk Metropolis.
///
/// Each sweep proposes `x_c + step_c * z` for every coordinate in order, then
/// `x + step_d * z * d` for every direction `d` of the target. During warmup,
/// each `log step` moves by `(accepted - target) / sqrt(t + 1)` after sweep
/// `t`; step sizes are frozen afterwards so the kept draws come from a fixed
/// Markov kernel. `step_sizes` lists coordinates first, then directions.
pub fn sample<T: Target + ?Sized>(
    target: &T,
    init: Vec<f64>,
    cfg: &SamplerConfig,
) -> Result<Chain, CalibrationError> {
    cfg.validate()?;
    if init.len() != target.dim() {
        return Err(CalibrationError::DimensionMismatch);
    }
    if !target.log_density(&init).is_finite() {
        return Err(CalibrationError::Initialization);
    }
    let directions = target.directions();
    if directions.iter().any(|d| d.len() != init.len()) {
        return Err(CalibrationError::DimensionMismatch);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = init;
    let moves = x.len() + directions.len();
    let mut log_step = vec![cfg.initial_step.ln(); moves];
    let mut accepted = vec![false; moves];

    for t in 0..cfg.warmup {
        sweep(target, &directions, &mut x, &log_step, &mut rng, &mut accepted);
        let rate = 1.0 / ((t + 1) as f64).sqrt();
        for (ls, &a) in log_step.iter_mut().zip(&accepted) {
            let a = if a { 1.0 } else { 0.0 };
            *ls = (*ls + rate * (a - cfg.target_accept)).clamp(MIN_STEP.ln(), MAX_STEP.ln());
        }
    }

    let mut samples = Vec::with_capacity(cfg.draws);
    let mut n_accepted = 0usize;
    for _ in 0..cfg.draws {
        for _ in 0..cfg.thin {
            sweep(target, &directions, &mut x, &log_step, &mut rng, &mut accepted);
            n_accepted += accepted.iter().filter(|a| **a).count();
        }
        samples.push(x.clone());
    }
    let proposals = cfg.draws * cfg.thin * moves;
    let step_sizes: Vec<f64> = log_step.iter().map(|l| l.exp()).collect();
    let diagnostics = Diagnostics {
        warmup: cfg.warmup,
        draws: cfg.draws,
        thin: cfg.thin,
        seed: cfg.seed,
        acceptance_rate: if proposals == 0 {
            0.0
        } else {
            n_accepted as f64 / proposals as f64
        },
        min_step: step_sizes.iter().copied().fold(f64::INFINITY, f64::min),
        max_step: step_sizes.iter().copied().fold(0.0, f64::max),
    };
    Ok(Chain {
        samples,
        step_sizes,
        diagnostics,
    })
}

fn sweep<T: Target + ?Sized>(
    target: &T,
    directions: &[Vec<f64>],
    x: &mut [f64],
    log_step: &[f64],
    rng: &mut ChaCha8Rng,
    accepted: &mut [bool],
) {
    for c in 0..x.len() {
        let z: f64 = StandardNormal.sample(rng);
        let u: f64 = rand::Rng::random(rng);
        let old = x[c];
        let before = target.log_density_coord(x, c);
        x[c] = old + log_step[c].exp() * z;
        let after = target.log_density_coord(x, c);
        // u in [0, 1): ln(0) = -inf always accepts a finite proposal
        if after.is_finite() && u.ln() < after - before {
            accepted[c] = true;
        } else {
            x[c] = old;
            accepted[c] = false;
        }
    }
    let n = x.len();
    for (k, d) in directions.iter().enumerate() {
        let z: f64 = StandardNormal.sample(rng);
        let u: f64 = rand::Rng::random(rng);
        let scale = log_step[n + k].exp() * z;
        let before = target.log_density(x);
        let proposal: Vec<f64> = x.iter().zip(d).map(|(x, d)| x + scale * d).collect();
        let after = target.log_density(&proposal);
        accepted[n + k] = after.is_finite() && u.ln() < after - before;
        if accepted[n + k] {
            x.copy_from_slice(&proposal);
        }
    }
}
