use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{distinct_n, distinct_n_grouped, logp_stats, MeanStd, MetricsError, Pooling};

/// One generated turn: the selected response, the candidate set it was
/// selected from, and its log-probability. Token sequences exclude `<eos>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnMetrics {
    pub selected: Vec<String>,
    pub candidates: Vec<Vec<String>>,
    pub selected_logp: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConversationMetricsInput {
    pub turns: Vec<TurnMetrics>,
}

impl ConversationMetricsInput {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for (i, t) in self.turns.iter().enumerate() {
            if !t.candidates.contains(&t.selected) {
                return Err(MetricsError::InvalidInput(format!(
                    "turn {i}: selected response is not among the candidates"
                )));
            }
            if t.selected_logp.is_nan() || t.selected_logp > 0.0 {
                return Err(MetricsError::InvalidInput(format!(
                    "turn {i}: log-probability {} is not <= 0",
                    t.selected_logp
                )));
            }
        }
        Ok(())
    }
}

pub const DISTINCT_ORDERS: [usize; 3] = [1, 2, 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistinctCell {
    pub n: usize,
    pub post: f64,
    /// `None` when every turn had a single candidate.
    pub pre: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: String,
    pub conversations: usize,
    pub turns: usize,
    pub logp: MeanStd,
    pub distinct: Vec<DistinctCell>,
    /// Conversations without generated tokens, left out of distinct-n.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pooling: Pooling,
    pub rows: Vec<StrategyRow>,
}

fn strategy_rank(name: &str) -> (usize, &str) {
    let known = ["greedy", "beam", "iter-beam"];
    (known.iter().position(|k| *k == name).unwrap_or(known.len()), name)
}

/// Builds one row per strategy. Rows are ordered greedy, beam, iter-beam,
/// then any other strategy by name.
pub fn build_report(
    inputs: &BTreeMap<String, Vec<ConversationMetricsInput>>,
    pooling: Pooling,
) -> Result<MetricsReport, MetricsError> {
    if inputs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut names: Vec<&String> = inputs.keys().collect();
    names.sort_by_key(|n| strategy_rank(n));
    let mut rows = Vec::new();
    for name in names {
        let convs = &inputs[name];
        for c in convs {
            c.validate()?;
        }
        let logps: Vec<f64> = convs
            .iter()
            .flat_map(|c| c.turns.iter().map(|t| t.selected_logp))
            .collect();
        let logp = logp_stats(&logps)
            .map_err(|_| MetricsError::InvalidInput(format!("strategy {name} has no generated turns")))?;

        let post: Vec<Vec<Vec<String>>> = convs
            .iter()
            .map(|c| c.turns.iter().map(|t| t.selected.clone()).collect())
            .collect();
        let single = convs
            .iter()
            .flat_map(|c| &c.turns)
            .all(|t| t.candidates.len() <= 1);
        let pre_turns: Vec<Vec<Vec<Vec<String>>>> = convs
            .iter()
            .map(|c| c.turns.iter().map(|t| t.candidates.clone()).collect())
            .collect();

        let mut distinct = Vec::new();
        let mut skipped = 0;
        for n in DISTINCT_ORDERS {
            let p = distinct_n(&post, n)?;
            skipped = p.skipped;
            let pre = if single {
                None
            } else {
                Some(match pooling {
                    Pooling::Conversation => {
                        let pooled: Vec<Vec<Vec<String>>> =
                            pre_turns.iter().map(|turns| turns.concat()).collect();
                        distinct_n(&pooled, n)?.value
                    }
                    Pooling::Turn => distinct_n_grouped(&pre_turns, n)?.value,
                })
            };
            distinct.push(DistinctCell {
                n,
                post: p.value,
                pre,
            });
        }
        rows.push(StrategyRow {
            strategy: name.clone(),
            conversations: convs.len(),
            turns: logps.len(),
            logp,
            distinct,
            skipped,
        });
    }
    Ok(MetricsReport { pooling, rows })
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned plain-text table: log-p as mean +- std, then post and pre
    /// distinct-n for each n. Missing pre values print as `-`.
    pub fn render(&self) -> String {
        let mut header = vec![
            "strategy".to_string(),
            "convs".to_string(),
            "turns".to_string(),
            "log-p".to_string(),
        ];
        for n in DISTINCT_ORDERS {
            header.push(format!("d{n} post"));
            header.push(format!("d{n} pre"));
        }
        let mut table = vec![header];
        for r in &self.rows {
            let mut line = vec![
                r.strategy.clone(),
                r.conversations.to_string(),
                r.turns.to_string(),
                format!("{:.2} +- {:.2}", r.logp.mean, r.logp.std),
            ];
            for c in &r.distinct {
                line.push(format!("{:.3}", c.post));
                line.push(c.pre.map_or("-".to_string(), |v| format!("{v:.3}")));
            }
            table.push(line);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|i| table.iter().map(|l| l[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &table {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        let pooling = match self.pooling {
            Pooling::Conversation => "conversation",
            Pooling::Turn => "turn",
        };
        writeln!(
            out,
            "\nlog-p: mean +- population std over selected responses.\n\
             distinct-n: unique n-grams / tokens per conversation, averaged over conversations; \
             post = selected responses, pre = candidate sets pooled per {pooling}."
        )
        .unwrap();
        out
    }
}
