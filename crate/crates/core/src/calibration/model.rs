use serde::{Deserialize, Serialize};

use super::sampler::Target;
use super::{BinaryObservations, CalibrationError, StarObservations};

pub const MU_LOW: f64 = 1.0;
pub const MU_HIGH: f64 = 4.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// log N(x; mean, 1)
pub fn log_normal(x: f64, mean: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d - HALF_LN_2PI
}

/// log of the U(1, 4) density, `-inf` outside the support.
pub fn log_uniform_prior(mu: f64) -> f64 {
    if (MU_LOW..=MU_HIGH).contains(&mu) {
        -(MU_HIGH - MU_LOW).ln()
    } else {
        f64::NEG_INFINITY
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log sigmoid(x), stable for large |x|.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Bernoulli log-likelihood of `label` with logit `x`.
pub fn log_bernoulli_logit(label: bool, x: f64) -> f64 {
    if label {
        log_sigmoid(x)
    } else {
        log_sigmoid(-x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarModelState {
    pub mu: Vec<f64>,
    pub m: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryModelState {
    pub m: Vec<f64>,
    pub b: Vec<f64>,
    pub t: Vec<f64>,
}

impl StarModelState {
    /// Prior means: mu = 2.5, everything else 0.
    pub fn initial(models: usize, annotators: usize) -> Self {
        StarModelState {
            mu: vec![(MU_LOW + MU_HIGH) / 2.0; models],
            m: vec![0.0; models],
            b: vec![0.0; annotators],
        }
    }

    /// Layout `[mu.., m.., b..]`.
    pub fn to_vec(&self) -> Vec<f64> {
        [self.mu.as_slice(), &self.m, &self.b].concat()
    }

    pub fn from_slice(x: &[f64], models: usize) -> Self {
        StarModelState {
            mu: x[..models].to_vec(),
            m: x[models..2 * models].to_vec(),
            b: x[2 * models..].to_vec(),
        }
    }
}

impl BinaryModelState {
    pub fn initial(models: usize, annotators: usize, turns: usize) -> Self {
        BinaryModelState {
            m: vec![0.0; models],
            b: vec![0.0; annotators],
            t: vec![0.0; turns],
        }
    }

    /// Layout `[m.., b.., t..]`.
    pub fn to_vec(&self) -> Vec<f64> {
        [self.m.as_slice(), &self.b, &self.t].concat()
    }

    pub fn from_slice(x: &[f64], models: usize, annotators: usize) -> Self {
        BinaryModelState {
            m: x[..models].to_vec(),
            b: x[models..models + annotators].to_vec(),
            t: x[models + annotators..].to_vec(),
        }
    }
}

pub fn log_joint_star(state: &StarModelState, obs: &StarObservations) -> Result<f64, CalibrationError> {
    let (i, j) = (obs.models.len(), obs.annotators.len());
    if state.mu.len() != i || state.m.len() != i || state.b.len() != j {
        return Err(CalibrationError::DimensionMismatch);
    }
    let mut lp = 0.0;
    for (mu, m) in state.mu.iter().zip(&state.m) {
        lp += log_uniform_prior(*mu) + log_normal(*m, *mu);
    }
    if lp == f64::NEG_INFINITY {
        return Ok(lp);
    }
    lp += state.b.iter().map(|b| log_normal(*b, 0.0)).sum::<f64>();
    for s in &obs.scores {
        lp += log_normal(s.score, state.m[s.model] + state.b[s.annotator]);
    }
    Ok(lp)
}

pub fn log_joint_binary(state: &BinaryModelState, obs: &BinaryObservations) -> Result<f64, CalibrationError> {
    if state.m.len() != obs.models.len()
        || state.b.len() != obs.annotators.len()
        || state.t.len() != obs.turns
    {
        return Err(CalibrationError::DimensionMismatch);
    }
    let mut lp: f64 = state
        .m
        .iter()
        .chain(&state.b)
        .chain(&state.t)
        .map(|v| log_normal(*v, 0.0))
        .sum();
    for l in &obs.labels {
        lp += log_bernoulli_logit(l.label, state.m[l.model] + state.b[l.annotator] + state.t[l.turn]);
    }
    Ok(lp)
}

fn by_index(n: usize, keys: impl Iterator<Item = usize>) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (o, k) in keys.enumerate() {
        out[k].push(o);
    }
    out
}

/// The star posterior as a sampler target over `[mu.., m.., b..]`.
pub struct StarTarget<'a> {
    obs: &'a StarObservations,
    by_model: Vec<Vec<usize>>,
    by_annotator: Vec<Vec<usize>>,
}

impl<'a> StarTarget<'a> {
    pub fn new(obs: &'a StarObservations) -> Self {
        StarTarget {
            obs,
            by_model: by_index(obs.models.len(), obs.scores.iter().map(|s| s.model)),
            by_annotator: by_index(obs.annotators.len(), obs.scores.iter().map(|s| s.annotator)),
        }
    }

    fn models(&self) -> usize {
        self.obs.models.len()
    }

    fn lik(&self, x: &[f64], idx: &[usize]) -> f64 {
        let i = self.models();
        idx.iter()
            .map(|&o| {
                let s = &self.obs.scores[o];
                log_normal(s.score, x[i + s.model] + x[2 * i + s.annotator])
            })
            .sum()
    }
}

impl Target for StarTarget<'_> {
    fn dim(&self) -> usize {
        2 * self.models() + self.obs.annotators.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        log_joint_star(&StarModelState::from_slice(x, self.models()), self.obs)
            .expect("dimensions fixed at construction")
    }

    /// Shifting every model up and every annotator down by the same amount
    /// leaves the likelihood unchanged.
    fn directions(&self) -> Vec<Vec<f64>> {
        let i = self.models();
        let mut d = vec![1.0; 2 * i];
        d.extend(std::iter::repeat_n(-1.0, self.obs.annotators.len()));
        vec![d]
    }

    fn log_density_coord(&self, x: &[f64], c: usize) -> f64 {
        let i = self.models();
        if c < i {
            log_uniform_prior(x[c]) + log_normal(x[i + c], x[c])
        } else if c < 2 * i {
            let k = c - i;
            log_normal(x[c], x[k]) + self.lik(x, &self.by_model[k])
        } else {
            log_normal(x[c], 0.0) + self.lik(x, &self.by_annotator[c - 2 * i])
        }
    }
}

/// The binary posterior as a sampler target over `[m.., b.., t..]`.
pub struct BinaryTarget<'a> {
    obs: &'a BinaryObservations,
    touching: Vec<Vec<usize>>,
}

impl<'a> BinaryTarget<'a> {
    pub fn new(obs: &'a BinaryObservations) -> Self {
        let (i, j) = (obs.models.len(), obs.annotators.len());
        let mut touching = vec![Vec::new(); i + j + obs.turns];
        for (o, l) in obs.labels.iter().enumerate() {
            touching[l.model].push(o);
            touching[i + l.annotator].push(o);
            touching[i + j + l.turn].push(o);
        }
        BinaryTarget { obs, touching }
    }
}

impl Target for BinaryTarget<'_> {
    fn dim(&self) -> usize {
        self.touching.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let (i, j) = (self.obs.models.len(), self.obs.annotators.len());
        log_joint_binary(&BinaryModelState::from_slice(x, i, j), self.obs)
            .expect("dimensions fixed at construction")
    }

    /// Likelihood-preserving shifts between models and annotators and
    /// between models and turns.
    fn directions(&self) -> Vec<Vec<f64>> {
        let (i, j, k) = (self.obs.models.len(), self.obs.annotators.len(), self.obs.turns);
        let shift = |other: usize, offset: usize| {
            let mut d = vec![0.0; i + j + k];
            d[..i].fill(1.0);
            d[offset..offset + other].fill(-1.0);
            d
        };
        let mut out = Vec::new();
        if j > 0 {
            out.push(shift(j, i));
        }
        if k > 0 {
            out.push(shift(k, i + j));
        }
        out
    }

    fn log_density_coord(&self, x: &[f64], c: usize) -> f64 {
        let (i, j) = (self.obs.models.len(), self.obs.annotators.len());
        let mut lp = log_normal(x[c], 0.0);
        for &o in &self.touching[c] {
            let l = &self.obs.labels[o];
            lp += log_bernoulli_logit(l.label, x[l.model] + x[i + l.annotator] + x[i + j + l.turn]);
        }
        lp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_single_observation_closed_form() {
        let obs = StarObservations::from_indices(1, 1, [(0, 0, 2.5)]).unwrap();
        let state = StarModelState {
            mu: vec![2.5],
            m: vec![2.5],
            b: vec![0.0],
        };
        let expected = -(3.0f64.ln()) + 3.0 * (-0.5 * (2.0 * std::f64::consts::PI).ln());
        let got = log_joint_star(&state, &obs).unwrap();
        assert!((got - expected).abs() < 1e-12);

        let outside = StarModelState {
            mu: vec![5.0],
            ..state.clone()
        };
        assert_eq!(log_joint_star(&outside, &obs).unwrap(), f64::NEG_INFINITY);

        let doubled = StarObservations::from_indices(1, 1, [(0, 0, 2.5), (0, 0, 2.5)]).unwrap();
        let diff = log_joint_star(&state, &doubled).unwrap() - got;
        assert!((diff - log_normal(2.5, 2.5)).abs() < 1e-12);
    }

    #[test]
    fn binary_zero_state_closed_form() {
        let state = BinaryModelState::initial(1, 1, 1);
        let pos = BinaryObservations::from_indices(1, 1, 1, [(0, 0, 0, true)]).unwrap();
        let neg = BinaryObservations::from_indices(1, 1, 1, [(0, 0, 0, false)]).unwrap();
        let expected = 3.0 * (-0.5 * (2.0 * std::f64::consts::PI).ln()) + 0.5f64.ln();
        let lp = log_joint_binary(&state, &pos).unwrap();
        assert!((lp - expected).abs() < 1e-12);
        assert_eq!(lp, log_joint_binary(&state, &neg).unwrap());

        // likelihood term alone rises with M under a positive label
        let mut prev = f64::NEG_INFINITY;
        for m in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            let l = log_bernoulli_logit(true, m);
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn stable_log_sigmoid() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
        assert_eq!(log_sigmoid(800.0), 0.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coordinate_terms_match_full_density_differences() {
        let star = StarObservations::from_indices(2, 3, [(0, 0, 3.0), (1, 0, 1.0), (1, 2, 4.0), (0, 1, 2.0)]).unwrap();
        let target = StarTarget::new(&star);
        let x = vec![2.0, 3.1, 1.5, 2.2, -0.3, 0.4, 0.1];
        for c in 0..target.dim() {
            let mut y = x.clone();
            y[c] += 0.37;
            let full = target.log_density(&y) - target.log_density(&x);
            let local = target.log_density_coord(&y, c) - target.log_density_coord(&x, c);
            assert!((full - local).abs() < 1e-10, "coordinate {c}");
        }

        let bin = BinaryObservations::from_indices(2, 2, 2, [(0, 0, 0, true), (1, 1, 1, false), (0, 1, 1, true)]).unwrap();
        let target = BinaryTarget::new(&bin);
        let x = vec![0.2, -0.5, 1.0, 0.3, -1.2, 0.7];
        for c in 0..target.dim() {
            let mut y = x.clone();
            y[c] -= 0.81;
            let full = target.log_density(&y) - target.log_density(&x);
            let local = target.log_density_coord(&y, c) - target.log_density_coord(&x, c);
            assert!((full - local).abs() < 1e-10, "coordinate {c}");
        }
    }
}
