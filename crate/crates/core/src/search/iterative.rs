//! Iterative beam search.
//!
//! Runs `R` beam searches with the same width. Iteration `l` sets the score of
//! any candidate whose Hamming distance to an equal-length hypothesis explored
//! by iterations `< l` is below `epsilon` to `-inf`, which removes it before
//! top-K selection. Hypotheses of different lengths are never within
//! `epsilon` of each other, so iteration `l` at step `t` only depends on step
//! `t` of earlier iterations; the sequential and lock-step parallel schedules
//! therefore produce the same result.

use super::beam::{BeamRun, Explored};
use super::hypothesis::selection_order;
use super::trace::SearchTrace;
use super::{CandidateSet, IterMode, SearchConfig, SearchError};
use crate::lm::{Context, DistributionProvider};

/// Returns the best finished hypothesis of every iteration (at most
/// `iterations` candidates) and the full exploration trace.
pub fn iterative_beam_search<M: DistributionProvider + ?Sized>(
    model: &M,
    ctx: &Context,
    cfg: &SearchConfig,
    mode: IterMode,
) -> Result<(CandidateSet, SearchTrace), SearchError> {
    cfg.validate()?;
    let mut explored = Explored::default();
    let mut runs: Vec<BeamRun> = (0..cfg.iterations).map(BeamRun::new).collect();
    match mode {
        IterMode::Sequential => {
            for run in &mut runs {
                run.run_to_end(model, ctx, cfg, Some(&explored))?;
                for step in run.steps() {
                    explored.add_step(step);
                }
            }
        }
        IterMode::Parallel => {
            while runs.iter().any(|r| !r.is_done()) {
                for run in runs.iter_mut().filter(|r| !r.is_done()) {
                    run.step(model, ctx, cfg, Some(&explored))?;
                    if let Some(step) = run.last_step() {
                        explored.add_step(step);
                    }
                }
            }
        }
    }

    let mut candidates = Vec::new();
    let mut trace = SearchTrace::default();
    for run in runs {
        let (mut finished, it) = run.finish(model, ctx, cfg)?;
        finished.sort_by(selection_order);
        candidates.extend(finished.into_iter().next());
        trace.iterations.push(it);
    }
    Ok((CandidateSet { candidates }, trace))
}
