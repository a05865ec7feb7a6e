use std::collections::HashMap;

use super::filters::{ban_explored, ban_repeating, Banned};
use super::trace::{IterationOutcome, IterationTrace, SearchTrace, TraceStep};
use super::{Candidate, CandidateSet, Hypothesis, SearchConfig, SearchError};
use crate::lm::{next_logprobs, Context, DistributionProvider, TokenId, Vocabulary};

/// Output of one expansion step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    /// The next beam: the best `K` candidates that did not end in `<eos>`.
    pub live: Vec<Hypothesis>,
    /// Candidates ending in `<eos>` that ranked within the overall top `K`.
    pub finished: Vec<Hypothesis>,
}

struct Scored {
    score: f64,
    logprob: f64,
    parent: usize,
    token: TokenId,
}

/// Expands every hypothesis by every token and keeps the top `k`.
///
/// Candidates rejected by `banned_for(parent)` or with zero probability are
/// dropped before ranking. Ties are broken by parent index, then token id.
fn expand<M, F>(
    hyps: &[Hypothesis],
    model: &M,
    ctx: &Context,
    k: usize,
    mut banned_for: F,
) -> Result<StepResult, SearchError>
where
    M: DistributionProvider + ?Sized,
    F: FnMut(&Hypothesis) -> Banned,
{
    let mut scored = Vec::new();
    for (i, parent) in hyps.iter().enumerate() {
        let banned = banned_for(parent);
        if banned.all {
            continue;
        }
        let dist = next_logprobs(model, ctx, &parent.tokens)?;
        for (v, &lp) in dist.values().iter().enumerate() {
            let token = TokenId(v as u32);
            if lp == f64::NEG_INFINITY || banned.contains(token) {
                continue;
            }
            scored.push(Scored {
                score: parent.score + lp,
                logprob: lp,
                parent: i,
                token,
            });
        }
    }
    let order = |a: &Scored, b: &Scored| {
        b.score
            .total_cmp(&a.score)
            .then(a.parent.cmp(&b.parent))
            .then(a.token.cmp(&b.token))
    };
    // Each parent has one <eos> extension, so the first k + parents entries
    // hold the top k overall and the top k non-<eos>. The order is total, so
    // selecting before sorting gives the same prefix as a full sort.
    let keep = k + hyps.len();
    if scored.len() > keep {
        scored.select_nth_unstable_by(keep - 1, order);
        scored.truncate(keep);
    }
    scored.sort_by(order);
    let make = |s: &Scored| hyps[s.parent].extend(s.token, s.logprob);
    let finished = scored
        .iter()
        .take(k)
        .filter(|s| s.token == Vocabulary::EOS)
        .map(make)
        .collect();
    let live = scored
        .iter()
        .filter(|s| s.token != Vocabulary::EOS)
        .take(k)
        .map(make)
        .collect();
    Ok(StepResult { live, finished })
}

/// One beam search step without blocking or exclusion.
///
/// Each candidate `h ‖ v` scores `s(h) + log p(v | h)`. The returned beam is
/// refilled to `k` from the remaining parents when top-ranked candidates
/// finish.
pub fn beam_step<M: DistributionProvider + ?Sized>(
    hyps: &[Hypothesis],
    model: &M,
    ctx: &Context,
    k: usize,
) -> Result<StepResult, SearchError> {
    if hyps.is_empty() || hyps.iter().any(|h| h.finished) {
        return Err(SearchError::InvalidHypotheses);
    }
    expand(hyps, model, ctx, k, |_| Banned::default())
}

/// Hypotheses explored by earlier iterations, indexed by length.
#[derive(Default)]
pub(crate) struct Explored {
    by_len: HashMap<usize, Vec<Vec<TokenId>>>,
}

impl Explored {
    pub fn add_step(&mut self, step: &TraceStep) {
        for h in step.hypotheses() {
            self.by_len.entry(h.len()).or_default().push(h.tokens.clone());
        }
    }

    fn of_len(&self, len: usize) -> &[Vec<TokenId>] {
        self.by_len.get(&len).map_or(&[], Vec::as_slice)
    }
}

/// One beam search, advanced a step at a time so iterations can be
/// interleaved.
pub(crate) struct BeamRun {
    iteration: usize,
    live: Vec<Hypothesis>,
    finished: Vec<Hypothesis>,
    steps: Vec<TraceStep>,
    /// Best partial hypothesis of the latest nonempty beam.
    fallback: Option<Hypothesis>,
    done: bool,
}

impl BeamRun {
    pub fn new(iteration: usize) -> Self {
        BeamRun {
            iteration,
            live: vec![Hypothesis::root()],
            finished: Vec::new(),
            steps: Vec::new(),
            fallback: None,
            done: false,
        }
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn last_step(&self) -> Option<&TraceStep> {
        self.steps.last()
    }

    pub fn step<M: DistributionProvider + ?Sized>(
        &mut self,
        model: &M,
        ctx: &Context,
        cfg: &SearchConfig,
        explored: Option<&Explored>,
    ) -> Result<(), SearchError> {
        if self.done {
            return Ok(());
        }
        let result = expand(&self.live, model, ctx, cfg.beam_width, |parent| {
            let mut banned = Banned::default();
            if cfg.block_ngram > 0 {
                ban_repeating(&parent.tokens, cfg.block_ngram, &mut banned);
            }
            if let Some(explored) = explored {
                let prior = explored.of_len(parent.len() + 1).iter().map(Vec::as_slice);
                ban_explored(&parent.tokens, prior, cfg.epsilon, &mut banned);
            }
            banned
        })?;
        let room = cfg.max_candidates - self.finished.len();
        self.finished
            .extend(result.finished.iter().take(room).cloned());
        if let Some(best) = result.live.first() {
            self.fallback = Some(best.clone());
        }
        let length = self.steps.len() + 1;
        self.live = result.live.clone();
        self.steps.push(TraceStep {
            live: result.live,
            finished: result.finished,
        });
        self.done = self.finished.len() >= cfg.max_candidates
            || length >= cfg.max_length
            || self.live.is_empty();
        Ok(())
    }

    pub fn run_to_end<M: DistributionProvider + ?Sized>(
        &mut self,
        model: &M,
        ctx: &Context,
        cfg: &SearchConfig,
        explored: Option<&Explored>,
    ) -> Result<(), SearchError> {
        while !self.done {
            self.step(model, ctx, cfg, explored)?;
        }
        Ok(())
    }

    /// Closes the run: returns its finished candidates (or the force-terminated
    /// fallback) together with its trace.
    pub fn finish<M: DistributionProvider + ?Sized>(
        self,
        model: &M,
        ctx: &Context,
        cfg: &SearchConfig,
    ) -> Result<(Vec<Candidate>, IterationTrace), SearchError> {
        let alpha = cfg.length_penalty_alpha;
        let (candidates, outcome) = if !self.finished.is_empty() {
            let c = self
                .finished
                .into_iter()
                .map(|h| Candidate::new(h, alpha, self.iteration, false))
                .collect();
            (c, IterationOutcome::Finished)
        } else if let Some(partial) = self.fallback {
            let dist = next_logprobs(model, ctx, &partial.tokens)?;
            let closed = partial.extend(Vocabulary::EOS, dist.get(Vocabulary::EOS));
            (
                vec![Candidate::new(closed, alpha, self.iteration, true)],
                IterationOutcome::ForceTerminated,
            )
        } else {
            (Vec::new(), IterationOutcome::Exhausted)
        };
        let trace = IterationTrace {
            iteration: self.iteration,
            outcome,
            steps: self.steps,
        };
        Ok((candidates, trace))
    }
}

/// Beam search with n-gram blocking.
///
/// Stops once `max_candidates` hypotheses have finished or the hypotheses
/// reach `max_length` tokens. If nothing finished, the best partial
/// hypothesis is closed with `<eos>` and returned alone.
pub fn beam_search<M: DistributionProvider + ?Sized>(
    model: &M,
    ctx: &Context,
    cfg: &SearchConfig,
) -> Result<(CandidateSet, SearchTrace), SearchError> {
    cfg.validate()?;
    let mut run = BeamRun::new(0);
    run.run_to_end(model, ctx, cfg, None)?;
    let (candidates, trace) = run.finish(model, ctx, cfg)?;
    Ok((
        CandidateSet { candidates },
        SearchTrace {
            iterations: vec![trace],
        },
    ))
}
