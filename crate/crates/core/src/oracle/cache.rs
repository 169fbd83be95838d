use std::collections::HashMap;

use crate::metrics::{bleu_from_counts, rouge_from_counts, BLEU_ORDER};
use crate::seq::Token;

use super::beam::ScoreFn;

/// Gold-side n-gram table shared by every beam node of one oracle call.
///
/// Only n-grams that occur in the gold can contribute clipped overlap, so
/// hypothesis counts are kept for those alone, indexed by a dense id.
#[derive(Debug, Clone)]
pub struct GoldIndex {
    gold: Vec<Token>,
    ids: HashMap<Vec<Token>, usize>,
    ref_counts: Vec<u32>,
}

impl GoldIndex {
    pub fn new(gold: &[Token]) -> Self {
        let mut ids = HashMap::new();
        let mut ref_counts = Vec::new();
        for n in 1..=BLEU_ORDER.min(gold.len()) {
            for gram in gold.windows(n) {
                let id = *ids.entry(gram.to_vec()).or_insert_with(|| {
                    ref_counts.push(0);
                    ref_counts.len() - 1
                });
                ref_counts[id] += 1;
            }
        }
        GoldIndex {
            gold: gold.to_vec(),
            ids,
            ref_counts,
        }
    }

    pub fn gold(&self) -> &[Token] {
        &self.gold
    }

    fn ref_total(&self, n: usize) -> usize {
        (self.gold.len() + 1).saturating_sub(n)
    }
}

/// A beam node: a sequence, its score, and the clipped-overlap counters
/// that let one appended token be scored by touching at most four n-grams.
#[derive(Debug, Clone)]
pub struct BeamEntry {
    pub seq: Vec<Token>,
    pub score: f64,
    hyp_counts: Vec<u32>,
    overlaps: [usize; BLEU_ORDER],
}

impl BeamEntry {
    /// Entry for the bare prefix, scored and with its counters populated.
    pub fn root(prefix: &[Token], index: &GoldIndex, score_fn: ScoreFn) -> Self {
        let mut entry = BeamEntry {
            seq: Vec::with_capacity(prefix.len() + 8),
            score: f64::NEG_INFINITY,
            hyp_counts: vec![0; index.ref_counts.len()],
            overlaps: [0; BLEU_ORDER],
        };
        for &t in prefix {
            entry.push(t, index);
        }
        entry.score = entry.cached_score(index, score_fn);
        entry
    }

    fn push(&mut self, token: Token, index: &GoldIndex) {
        self.seq.push(token);
        let len = self.seq.len();
        for n in 1..=BLEU_ORDER.min(len) {
            // If the last n tokens are not a gold n-gram, no longer suffix is.
            let Some(&id) = index.ids.get(&self.seq[len - n..]) else {
                break;
            };
            if self.hyp_counts[id] < index.ref_counts[id] {
                self.overlaps[n - 1] += 1;
            }
            self.hyp_counts[id] += 1;
        }
    }

    /// Score of `seq` computed from the cached counters.
    pub fn cached_score(&self, index: &GoldIndex, score_fn: ScoreFn) -> f64 {
        let len = self.seq.len();
        match score_fn {
            ScoreFn::Rouge2 => {
                rouge_from_counts(
                    self.overlaps[1],
                    (len + 1).saturating_sub(2),
                    index.ref_total(2),
                )
                .f1
            }
            ScoreFn::Bleu4 => {
                let totals: [usize; BLEU_ORDER] =
                    std::array::from_fn(|k| (len + 1).saturating_sub(k + 1));
                bleu_from_counts(&self.overlaps, &totals, len, index.gold.len())
            }
        }
    }
}

/// Appends `token` to `entry` and rescores it incrementally.
pub fn cached_extend(
    entry: &BeamEntry,
    token: Token,
    index: &GoldIndex,
    score_fn: ScoreFn,
) -> BeamEntry {
    let mut next = entry.clone();
    next.push(token, index);
    next.score = next.cached_score(index, score_fn);
    next
}
