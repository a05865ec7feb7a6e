use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub count: usize,
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Mean and population standard deviation, both from compensated sums.
pub fn logp_stats(values: &[f64]) -> Result<MeanStd, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite(bad));
    }
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
    Ok(MeanStd {
        mean,
        std: var.sqrt(),
        count: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_symmetric_lists() {
        let s = logp_stats(&[-5.0, -5.0]).unwrap();
        assert_eq!((s.mean, s.std), (-5.0, 0.0));
        let s = logp_stats(&[-4.0, -6.0]).unwrap();
        assert_eq!((s.mean, s.std), (-5.0, 1.0));
    }

    #[test]
    fn rejects_empty_and_infinite_input() {
        assert!(matches!(logp_stats(&[]), Err(MetricsError::Empty)));
        assert!(matches!(
            logp_stats(&[-1.0, f64::NEG_INFINITY]),
            Err(MetricsError::NonFinite(_))
        ));
    }

    #[test]
    fn compensation_recovers_cancelled_terms() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(v.iter().sum::<f64>(), 0.0);
        assert_eq!(compensated_sum(v), 1.0);
    }
}
