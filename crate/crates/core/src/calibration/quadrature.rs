//! Posterior moments by tensor-product Simpson integration, used to check
//! the sampler on small instances.
//!
//! Every observation involves exactly one variable from each latent group
//! (models, annotators and, for the binary model, turns). Conditioned on all
//! groups but the largest, the variables of that group are independent, so
//! the largest group is integrated one variable at a time and only the other
//! groups need a full tensor grid.

use serde::{Deserialize, Serialize};

use super::model::{log_bernoulli_logit, log_normal, log_uniform_prior, sigmoid, MU_HIGH, MU_LOW};
use super::summary::Moments;
use super::{BinaryObservations, CalibrationError, StarObservations};
use crate::lm::log_sum_exp;

/// Largest total number of latent variables (excluding the integrated-out
/// `mu`) the oracle accepts.
pub const MAX_ORACLE_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Points per axis; odd.
    pub points: usize,
    /// Unbounded latents are integrated over `[-half_width, half_width]`
    /// around their prior mean; star `M_i` over `[1 - hw, 4 + hw]`.
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points: 201,
            half_width: 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub moments: Vec<Moments>,
    /// Largest change in any mean or variance between this grid and one with
    /// twice the spacing.
    pub refinement_delta: f64,
}

struct Axis {
    x: Vec<f64>,
    /// log Simpson weight + log prior density.
    logw: Vec<f64>,
}

fn simpson_log_weights(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / (n - 1) as f64;
    let x = (0..n).map(|k| a + h * k as f64).collect();
    let w = (0..n)
        .map(|k| {
            let c = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (c * h / 3.0).ln()
        })
        .collect();
    (x, w)
}

fn normal_axis(half_width: f64, n: usize) -> Axis {
    let (x, w) = simpson_log_weights(-half_width, half_width, n);
    let logw = x.iter().zip(&w).map(|(x, w)| w + log_normal(*x, 0.0)).collect();
    Axis { x, logw }
}

/// `M ~ N(mu, 1)` with `mu ~ U(1, 4)` integrated out numerically.
fn star_model_axis(half_width: f64, n: usize) -> Axis {
    let (x, w) = simpson_log_weights(MU_LOW - half_width, MU_HIGH + half_width, n);
    let (mu, mu_w) = simpson_log_weights(MU_LOW, MU_HIGH, n);
    let logw = x
        .iter()
        .zip(&w)
        .map(|(m, w)| {
            let terms: Vec<f64> = mu
                .iter()
                .zip(&mu_w)
                .map(|(u, uw)| uw + log_uniform_prior(*u) + log_normal(*m, *u))
                .collect();
            w + log_sum_exp(&terms)
        })
        .collect();
    Axis { x, logw }
}

struct Problem<L: Fn(f64, usize) -> f64, G: Fn(f64) -> f64> {
    /// Variables per group and the axis they share.
    groups: Vec<(usize, Axis)>,
    /// Per observation, the variable index in each group.
    obs: Vec<Vec<usize>>,
    /// Log-likelihood of observation `o` given the sum of its latents.
    loglik: L,
    /// Moments are reported for `transform(x)` of group 0 variables.
    transform: G,
}

impl<L: Fn(f64, usize) -> f64, G: Fn(f64) -> f64> Problem<L, G> {
    fn solve(&self) -> Vec<Moments> {
        let n_groups = self.groups.len();
        let inner = (0..n_groups)
            .rev()
            .max_by_key(|&g| self.groups[g].0)
            .expect("at least one group");
        let outer_vars: Vec<(usize, usize)> = (0..n_groups)
            .filter(|&g| g != inner)
            .flat_map(|g| (0..self.groups[g].0).map(move |v| (g, v)))
            .collect();
        let outer_pos = |g: usize, v: usize| outer_vars.iter().position(|&p| p == (g, v)).unwrap();
        // per inner variable: (observation, positions of its outer variables)
        let n_inner = self.groups[inner].0;
        let mut inner_obs: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); n_inner];
        for (o, vars) in self.obs.iter().enumerate() {
            let outer: Vec<usize> = (0..n_groups)
                .filter(|&g| g != inner)
                .map(|g| outer_pos(g, vars[g]))
                .collect();
            inner_obs[vars[inner]].push((o, outer));
        }

        let n_targets = self.groups[0].0;
        let inner_axis = &self.groups[inner].1;
        let points = inner_axis.x.len();
        let total_outer = points.pow(outer_vars.len() as u32);
        let mut log_mass = Vec::with_capacity(total_outer);
        // per outer point and target variable: E[g], E[g^2]
        let mut cond = Vec::with_capacity(total_outer * n_targets);
        let mut idx = vec![0usize; outer_vars.len()];
        let mut values = vec![0.0; outer_vars.len()];
        let mut logf = vec![0.0; points];
        let mut local = vec![(0.0, 0.0); n_inner];
        for _ in 0..total_outer {
            let mut lw = 0.0;
            for (k, &(g, _)) in outer_vars.iter().enumerate() {
                let axis = &self.groups[g].1;
                values[k] = axis.x[idx[k]];
                lw += axis.logw[idx[k]];
            }
            for (v, obs) in inner_obs.iter().enumerate() {
                for (p, f) in logf.iter_mut().enumerate() {
                    let x = inner_axis.x[p];
                    *f = inner_axis.logw[p]
                        + obs
                            .iter()
                            .map(|(o, pos)| (self.loglik)(x + pos.iter().map(|&q| values[q]).sum::<f64>(), *o))
                            .sum::<f64>();
                }
                let lz = log_sum_exp(&logf);
                lw += lz;
                if inner == 0 {
                    let (mut e1, mut e2) = (0.0, 0.0);
                    for (p, f) in logf.iter().enumerate() {
                        let w = (f - lz).exp();
                        let g = (self.transform)(inner_axis.x[p]);
                        e1 += w * g;
                        e2 += w * g * g;
                    }
                    local[v] = (e1, e2);
                }
            }
            log_mass.push(lw);
            for t in 0..n_targets {
                if inner == 0 {
                    cond.push(local[t]);
                } else {
                    let g = (self.transform)(values[outer_pos(0, t)]);
                    cond.push((g, g * g));
                }
            }
            // odometer
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < points {
                    break;
                }
                idx[k] = 0;
            }
        }

        let lz = log_sum_exp(&log_mass);
        let weights: Vec<f64> = log_mass.iter().map(|l| (l - lz).exp()).collect();
        (0..n_targets)
            .map(|t| {
                let (mut e1, mut e2) = (0.0, 0.0);
                for (p, w) in weights.iter().enumerate() {
                    let (a, b) = cond[p * n_targets + t];
                    e1 += w * a;
                    e2 += w * b;
                }
                Moments {
                    mean: e1,
                    variance: (e2 - e1 * e1).max(0.0),
                }
            })
            .collect()
    }
}

fn check_grid(grid: &GridConfig) -> Result<usize, CalibrationError> {
    if grid.points < 5 || grid.points.is_multiple_of(2) || grid.half_width.is_nan() || grid.half_width <= 0.0 {
        return Err(CalibrationError::InvalidConfig(
            "grid needs an odd number of points >= 5 and a positive half-width".into(),
        ));
    }
    Ok((grid.points - 1) / 2 + 1)
}

fn refine(
    grid: &GridConfig,
    solve: impl Fn(usize) -> Vec<Moments>,
) -> Result<OracleResult, CalibrationError> {
    let coarse = check_grid(grid)?;
    let fine = solve(grid.points);
    let rough = solve(coarse);
    let refinement_delta = fine
        .iter()
        .zip(&rough)
        .map(|(a, b)| (a.mean - b.mean).abs().max((a.variance - b.variance).abs()))
        .fold(0.0, f64::max);
    Ok(OracleResult {
        moments: fine,
        refinement_delta,
    })
}

/// Posterior mean and variance of each star-model `M_i`.
pub fn quadrature_oracle_star(obs: &StarObservations, grid: &GridConfig) -> Result<OracleResult, CalibrationError> {
    obs.validate()?;
    let dim = obs.models.len() + obs.annotators.len();
    if dim > MAX_ORACLE_DIM {
        return Err(CalibrationError::OracleDimension(dim));
    }
    let vars: Vec<Vec<usize>> = obs.scores.iter().map(|s| vec![s.model, s.annotator]).collect();
    refine(grid, |n| {
        Problem {
            groups: vec![
                (obs.models.len(), star_model_axis(grid.half_width, n)),
                (obs.annotators.len(), normal_axis(grid.half_width, n)),
            ],
            obs: vars.clone(),
            loglik: |sum, o| log_normal(obs.scores[o].score, sum),
            transform: |m| m,
        }
        .solve()
    })
}

/// Posterior mean and variance of each `sigmoid(M_i)` under the binary model.
pub fn quadrature_oracle_binary(obs: &BinaryObservations, grid: &GridConfig) -> Result<OracleResult, CalibrationError> {
    let dim = obs.models.len() + obs.annotators.len() + obs.turns;
    if dim > MAX_ORACLE_DIM {
        return Err(CalibrationError::OracleDimension(dim));
    }
    let vars: Vec<Vec<usize>> = obs
        .labels
        .iter()
        .map(|l| vec![l.model, l.annotator, l.turn])
        .collect();
    refine(grid, |n| {
        Problem {
            groups: vec![
                (obs.models.len(), normal_axis(grid.half_width, n)),
                (obs.annotators.len(), normal_axis(grid.half_width, n)),
                (obs.turns, normal_axis(grid.half_width, n)),
            ],
            obs: vars.clone(),
            loglik: |sum, o| log_bernoulli_logit(obs.labels[o].label, sum),
            transform: sigmoid,
        }
        .solve()
    })
}
