use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::CalibrationError;

/// One 1-4 score `S_ij` given by annotator `j` to model `i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarScore {
    pub model: usize,
    pub annotator: usize,
    pub score: f64,
}

/// One binary label `S_ijk` for turn `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryLabel {
    pub model: usize,
    pub annotator: usize,
    pub turn: usize,
    pub label: bool,
}

/// Conversation scores. Scores are treated as real-valued observations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarObservations {
    pub models: Vec<String>,
    pub annotators: Vec<String>,
    pub scores: Vec<StarScore>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryObservations {
    pub models: Vec<String>,
    pub annotators: Vec<String>,
    pub turns: usize,
    pub labels: Vec<BinaryLabel>,
}

fn index_labels<'a>(labels: impl Iterator<Item = &'a str>) -> BTreeMap<String, usize> {
    let set: BTreeSet<&str> = labels.collect();
    set.into_iter()
        .enumerate()
        .map(|(i, l)| (l.to_string(), i))
        .collect()
}

fn names(index: &BTreeMap<String, usize>) -> Vec<String> {
    index.keys().cloned().collect()
}

impl StarObservations {
    pub fn new(
        models: Vec<String>,
        annotators: Vec<String>,
        scores: Vec<StarScore>,
    ) -> Result<Self, CalibrationError> {
        let obs = StarObservations {
            models,
            annotators,
            scores,
        };
        obs.validate()?;
        Ok(obs)
    }

    /// Unlabelled instance with `models` x `annotators` latents.
    pub fn from_indices(
        models: usize,
        annotators: usize,
        scores: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, CalibrationError> {
        Self::new(
            (0..models).map(|i| format!("m{i}")).collect(),
            (0..annotators).map(|j| format!("a{j}")).collect(),
            scores
                .into_iter()
                .map(|(model, annotator, score)| StarScore {
                    model,
                    annotator,
                    score,
                })
                .collect(),
        )
    }

    /// Maps labels to dense indices in sorted label order.
    pub fn from_labeled<S: AsRef<str>>(rows: &[(S, S, f64)]) -> Result<Self, CalibrationError> {
        let m = index_labels(rows.iter().map(|r| r.0.as_ref()));
        let a = index_labels(rows.iter().map(|r| r.1.as_ref()));
        let scores = rows
            .iter()
            .map(|(mi, aj, s)| StarScore {
                model: m[mi.as_ref()],
                annotator: a[aj.as_ref()],
                score: *s,
            })
            .collect();
        Self::new(names(&m), names(&a), scores)
    }

    /// CSV with header `model,annotator,score`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, CalibrationError> {
        #[derive(Deserialize)]
        struct Row {
            model: String,
            annotator: String,
            score: f64,
        }
        let mut rows = Vec::new();
        for (i, rec) in csv::Reader::from_reader(reader).deserialize().enumerate() {
            let r: Row = rec.map_err(|e| CalibrationError::Csv {
                row: i + 1,
                message: e.to_string(),
            })?;
            rows.push((r.model, r.annotator, r.score));
        }
        Self::from_labeled(&rows)
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        let mut seen = vec![false; self.models.len()];
        for s in &self.scores {
            if s.model >= self.models.len() || s.annotator >= self.annotators.len() {
                return Err(CalibrationError::InvalidObservations(format!(
                    "index out of range in {s:?}"
                )));
            }
            if !s.score.is_finite() {
                return Err(CalibrationError::InvalidObservations(format!(
                    "non-finite score {}",
                    s.score
                )));
            }
            seen[s.model] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(CalibrationError::InvalidObservations(format!(
                "model {} has no observations",
                self.models[i]
            )));
        }
        Ok(())
    }
}

impl BinaryObservations {
    pub fn new(
        models: Vec<String>,
        annotators: Vec<String>,
        turns: usize,
        labels: Vec<BinaryLabel>,
    ) -> Result<Self, CalibrationError> {
        for l in &labels {
            if l.model >= models.len() || l.annotator >= annotators.len() || l.turn >= turns {
                return Err(CalibrationError::InvalidObservations(format!(
                    "index out of range in {l:?}"
                )));
            }
        }
        Ok(BinaryObservations {
            models,
            annotators,
            turns,
            labels,
        })
    }

    pub fn from_indices(
        models: usize,
        annotators: usize,
        turns: usize,
        labels: impl IntoIterator<Item = (usize, usize, usize, bool)>,
    ) -> Result<Self, CalibrationError> {
        Self::new(
            (0..models).map(|i| format!("m{i}")).collect(),
            (0..annotators).map(|j| format!("a{j}")).collect(),
            turns,
            labels
                .into_iter()
                .map(|(model, annotator, turn, label)| BinaryLabel {
                    model,
                    annotator,
                    turn,
                    label,
                })
                .collect(),
        )
    }

    /// Models and annotators map in sorted label order; turn indices are
    /// used as given (0-based), so the turn count is `max + 1`.
    pub fn from_labeled<S: AsRef<str>>(rows: &[(S, S, usize, bool)]) -> Result<Self, CalibrationError> {
        let m = index_labels(rows.iter().map(|r| r.0.as_ref()));
        let a = index_labels(rows.iter().map(|r| r.1.as_ref()));
        let turns = rows.iter().map(|r| r.2 + 1).max().unwrap_or(0);
        let labels = rows
            .iter()
            .map(|(mi, aj, k, l)| BinaryLabel {
                model: m[mi.as_ref()],
                annotator: a[aj.as_ref()],
                turn: *k,
                label: *l,
            })
            .collect();
        Self::new(names(&m), names(&a), turns, labels)
    }

    /// CSV with header `model,annotator,turn,label`; labels are 0 or 1.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, CalibrationError> {
        #[derive(Deserialize)]
        struct Row {
            model: String,
            annotator: String,
            turn: usize,
            label: u8,
        }
        let mut rows = Vec::new();
        for (i, rec) in csv::Reader::from_reader(reader).deserialize().enumerate() {
            let r: Row = rec.map_err(|e| CalibrationError::Csv {
                row: i + 1,
                message: e.to_string(),
            })?;
            let label = match r.label {
                0 => false,
                1 => true,
                other => {
                    return Err(CalibrationError::Csv {
                        row: i + 1,
                        message: format!("label must be 0 or 1, got {other}"),
                    })
                }
            };
            rows.push((r.model, r.annotator, r.turn, label));
        }
        Self::from_labeled(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_map_in_sorted_order() {
        let obs = StarObservations::from_labeled(&[("beam", "zed", 3.0), ("beam", "amy", 2.0), ("greedy", "amy", 1.0)])
            .unwrap();
        assert_eq!(obs.models, ["beam", "greedy"]);
        assert_eq!(obs.annotators, ["amy", "zed"]);
        assert_eq!(obs.scores[0].annotator, 1);
        assert_eq!(obs.scores[2].model, 1);
    }

    #[test]
    fn csv_ingestion() {
        let text = "model,annotator,score\nb,x,4\na,y,2\n";
        let obs = StarObservations::read_csv(text.as_bytes()).unwrap();
        assert_eq!(obs.scores.len(), 2);
        assert_eq!(obs.scores[0].model, 1);

        let text = "model,annotator,turn,label\nb,x,0,1\na,y,2,0\n";
        let obs = BinaryObservations::read_csv(text.as_bytes()).unwrap();
        assert_eq!(obs.turns, 3);
        assert!(obs.labels[0].label);

        let bad = "model,annotator,turn,label\nb,x,0,2\n";
        assert!(matches!(
            BinaryObservations::read_csv(bad.as_bytes()),
            Err(CalibrationError::Csv { row: 1, .. })
        ));
    }

    #[test]
    fn every_model_needs_a_score() {
        assert!(StarObservations::from_indices(2, 1, [(0, 0, 2.0)]).is_err());
        assert!(StarObservations::from_indices(1, 1, [(0, 1, 2.0)]).is_err());
        assert!(StarObservations::from_indices(1, 1, [(0, 0, f64::NAN)]).is_err());
    }
}
