use serde::{Deserialize, Serialize};

use super::model::{sigmoid, BinaryModelState, StarModelState, StarTarget, BinaryTarget};
use super::sampler::{sample, Diagnostics, SamplerConfig};
use super::{BinaryObservations, CalibrationError, StarObservations};
use crate::metrics::compensated_sum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    /// Empirical mean and (population) variance.
    pub fn of(values: &[f64]) -> Option<Moments> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = compensated_sum(values.iter().copied()) / n;
        let variance = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
        Some(Moments { mean, variance })
    }
}

fn per_model<S>(
    samples: &[S],
    models: usize,
    value: impl Fn(&S, usize) -> f64,
) -> Result<Vec<Moments>, CalibrationError> {
    if samples.is_empty() {
        return Err(CalibrationError::NoSamples);
    }
    Ok((0..models)
        .map(|i| {
            let v: Vec<f64> = samples.iter().map(|s| value(s, i)).collect();
            Moments::of(&v).expect("nonempty")
        })
        .collect())
}

/// Posterior mean and variance of each `M_i`.
pub fn posterior_summary_star(samples: &[StarModelState]) -> Result<Vec<Moments>, CalibrationError> {
    let models = samples.first().map_or(0, |s| s.m.len());
    per_model(samples, models, |s, i| s.m[i])
}

/// Posterior mean and variance of each `sigmoid(M_i)`, applied per draw.
pub fn posterior_summary_binary(samples: &[BinaryModelState]) -> Result<Vec<Moments>, CalibrationError> {
    let models = samples.first().map_or(0, |s| s.m.len());
    per_model(samples, models, |s, i| sigmoid(s.m[i]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Star,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPosterior {
    pub model: String,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub kind: ModelKind,
    pub posteriors: Vec<ModelPosterior>,
    pub annotators: usize,
    pub observations: usize,
    pub diagnostics: Diagnostics,
    pub config: SamplerConfig,
    /// Full chain states; not serialized.
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

impl CalibrationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    fn new(
        kind: ModelKind,
        labels: &[String],
        moments: Vec<Moments>,
        annotators: usize,
        observations: usize,
        chain: super::sampler::Chain,
        cfg: &SamplerConfig,
    ) -> Self {
        CalibrationResult {
            kind,
            posteriors: labels
                .iter()
                .zip(moments)
                .map(|(l, m)| ModelPosterior {
                    model: l.clone(),
                    mean: m.mean,
                    variance: m.variance,
                })
                .collect(),
            annotators,
            observations,
            diagnostics: chain.diagnostics,
            config: cfg.clone(),
            samples: chain.samples,
        }
    }
}

/// Samples the star-model posterior from the prior-mean start and
/// summarizes each model's `M_i`.
pub fn calibrate_star(obs: &StarObservations, cfg: &SamplerConfig) -> Result<CalibrationResult, CalibrationError> {
    obs.validate()?;
    let (i, j) = (obs.models.len(), obs.annotators.len());
    let target = StarTarget::new(obs);
    let chain = sample(&target, StarModelState::initial(i, j).to_vec(), cfg)?;
    let states: Vec<StarModelState> = chain
        .samples
        .iter()
        .map(|x| StarModelState::from_slice(x, i))
        .collect();
    let moments = posterior_summary_star(&states)?;
    Ok(CalibrationResult::new(
        ModelKind::Star,
        &obs.models,
        moments,
        j,
        obs.scores.len(),
        chain,
        cfg,
    ))
}

/// Samples the binary-model posterior and summarizes `sigmoid(M_i)`.
pub fn calibrate_binary(obs: &BinaryObservations, cfg: &SamplerConfig) -> Result<CalibrationResult, CalibrationError> {
    let (i, j, k) = (obs.models.len(), obs.annotators.len(), obs.turns);
    let target = BinaryTarget::new(obs);
    let chain = sample(&target, BinaryModelState::initial(i, j, k).to_vec(), cfg)?;
    let states: Vec<BinaryModelState> = chain
        .samples
        .iter()
        .map(|x| BinaryModelState::from_slice(x, i, j))
        .collect();
    let moments = posterior_summary_binary(&states)?;
    Ok(CalibrationResult::new(
        ModelKind::Binary,
        &obs.models,
        moments,
        j,
        obs.labels.len(),
        chain,
        cfg,
    ))
}
