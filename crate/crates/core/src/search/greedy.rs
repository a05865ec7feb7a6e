use super::{Hypothesis, SearchConfig, SearchError};
use crate::lm::{next_logprobs, Context, DistributionProvider, Vocabulary};

/// Picks the most likely token at every step (lowest id on ties) until
/// `<eos>`; after `max_length` tokens without `<eos>`, appends it.
pub fn greedy_decode<M: DistributionProvider + ?Sized>(
    model: &M,
    ctx: &Context,
    cfg: &SearchConfig,
) -> Result<Hypothesis, SearchError> {
    cfg.validate()?;
    let mut hyp = Hypothesis::root();
    while !hyp.finished {
        let dist = next_logprobs(model, ctx, &hyp.tokens)?;
        let token = if hyp.len() >= cfg.max_length {
            Vocabulary::EOS
        } else {
            dist.argmax()
        };
        hyp = hyp.extend(token, dist.get(token));
    }
    Ok(hyp)
}
