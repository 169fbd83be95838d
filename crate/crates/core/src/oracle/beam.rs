use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::metrics::{bleu4, rouge_n, TIE_EPSILON};
use crate::seq::Token;

use super::cache::{cached_extend, BeamEntry, GoldIndex};
use super::Label;

/// Sentence-level score the beam oracle maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreFn {
    /// ROUGE-2 F1.
    Rouge2,
    /// Smoothed sentence BLEU-4.
    Bleu4,
}

impl ScoreFn {
    pub fn score(self, hyp: &[Token], gold: &[Token]) -> f64 {
        match self {
            ScoreFn::Rouge2 => rouge_n(hyp, gold, 2).f1,
            ScoreFn::Bleu4 => bleu4(hyp, gold),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreFn::Rouge2 => "rouge2",
            ScoreFn::Bleu4 => "bleu4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeamConfig {
    pub beam_size: usize,
    pub beam_length: usize,
    pub score_fn: ScoreFn,
}

impl BeamConfig {
    pub fn new(beam_size: usize, beam_length: usize, score_fn: ScoreFn) -> Result<Self> {
        let cfg = BeamConfig {
            beam_size,
            beam_length,
            score_fn,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam_size == 0 {
            return Err(Error::InvalidConfig("beam_size must be at least 1".into()));
        }
        if self.beam_length == 0 {
            return Err(Error::InvalidConfig(
                "beam_length must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamOutcome {
    /// Token at position `|prefix|` of `best_seq`, or End when stopping at
    /// the prefix scores best.
    pub token: Label,
    /// Prefix followed by the best completion found.
    pub best_seq: Vec<Token>,
    pub best_score: f64,
}

/// Distinct gold tokens in order of first appearance.
pub fn gold_candidates(gold: &[Token]) -> Vec<Token> {
    let mut seen = HashSet::new();
    gold.iter().copied().filter(|t| seen.insert(*t)).collect()
}

/// Expand, score, keep the top `beam_size`, for `beam_length` rounds.
/// The best node seen in any round, the bare prefix included, is returned,
/// so shorter completions are kept when extending them only lowers the
/// score. Ties keep the earlier node (shorter first, then frontier order,
/// then candidate order).
fn search<N: Clone>(
    root: N,
    candidates: &[Token],
    cfg: &BeamConfig,
    extend: impl Fn(&N, Token) -> N,
    score: impl Fn(&N) -> f64,
) -> (N, f64) {
    let root_score = score(&root);
    let mut best = (root.clone(), root_score);
    let mut frontier = vec![root];
    for _ in 0..cfg.beam_length {
        let mut pool: Vec<(N, f64)> = Vec::with_capacity(frontier.len() * candidates.len());
        for node in &frontier {
            for &w in candidates {
                let child = extend(node, w);
                let s = score(&child);
                pool.push((child, s));
            }
        }
        if pool.is_empty() {
            break;
        }
        pool.sort_by(|a, b| b.1.total_cmp(&a.1));
        pool.truncate(cfg.beam_size);
        if pool[0].1 > best.1 {
            best = pool[0].clone();
        }
        frontier = pool.into_iter().map(|(n, _)| n).collect();
    }
    best
}

fn outcome(prefix: &[Token], best_seq: Vec<Token>, best_score: f64) -> BeamOutcome {
    let token = best_seq
        .get(prefix.len())
        .map_or(Label::End, |&t| Label::Token(t));
    BeamOutcome {
        token,
        best_seq,
        best_score,
    }
}

/// Approximate dynamic oracle for ROUGE-2 / BLEU-4 by beam search over the
/// gold unigrams, scoring with the incremental n-gram cache.
pub fn beam_oracle_next(prefix: &[Token], gold: &[Token], cfg: &BeamConfig) -> Result<BeamOutcome> {
    cfg.validate()?;
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let index = GoldIndex::new(gold);
    let candidates = gold_candidates(gold);
    let root = BeamEntry::root(prefix, &index, cfg.score_fn);
    let (best, score) = search(
        root,
        &candidates,
        cfg,
        |e, w| cached_extend(e, w, &index, cfg.score_fn),
        |e| e.score,
    );
    Ok(outcome(prefix, best.seq, score))
}

/// Same search, rescoring every node from scratch. Baseline for the cache.
pub fn beam_oracle_next_naive(
    prefix: &[Token],
    gold: &[Token],
    cfg: &BeamConfig,
) -> Result<BeamOutcome> {
    cfg.validate()?;
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let candidates = gold_candidates(gold);
    let (best, score) = search(
        prefix.to_vec(),
        &candidates,
        cfg,
        |seq, w| {
            let mut s = seq.clone();
            s.push(w);
            s
        },
        |seq| cfg.score_fn.score(seq, gold),
    );
    Ok(outcome(prefix, best, score))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SupervisionSource {
    Beam,
    GoldCopy,
}

impl SupervisionSource {
    pub fn name(self) -> &'static str {
        match self {
            SupervisionSource::Beam => "beam",
            SupervisionSource::GoldCopy => "gold_copy",
        }
    }
}

/// The better of the beam completion and the positional gold copy.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisionChoice {
    pub next_token: Label,
    pub source: SupervisionSource,
    pub oracle_score: f64,
    pub gold_copy_score: f64,
    pub chosen_score: f64,
    /// Full sequence (prefix and completion) of the winning source.
    pub completion: Vec<Token>,
}

/// `prefix` followed by `gold[|prefix|..]`.
pub fn gold_copy(prefix: &[Token], gold: &[Token]) -> Vec<Token> {
    let mut seq = prefix.to_vec();
    seq.extend_from_slice(gold.get(prefix.len()..).unwrap_or(&[]));
    seq
}

pub fn select_supervision(
    prefix: &[Token],
    gold: &[Token],
    cfg: &BeamConfig,
) -> Result<SupervisionChoice> {
    let beam = beam_oracle_next(prefix, gold, cfg)?;
    let copy = gold_copy(prefix, gold);
    let gold_copy_score = cfg.score_fn.score(&copy, gold);
    let oracle_score = beam.best_score;

    // Within TIE_EPSILON the gold copy wins.
    if oracle_score > gold_copy_score + TIE_EPSILON {
        Ok(SupervisionChoice {
            next_token: beam.token,
            source: SupervisionSource::Beam,
            oracle_score,
            gold_copy_score,
            chosen_score: oracle_score,
            completion: beam.best_seq,
        })
    } else {
        let next_token = gold
            .get(prefix.len())
            .map_or(Label::End, |&t| Label::Token(t));
        Ok(SupervisionChoice {
            next_token,
            source: SupervisionSource::GoldCopy,
            oracle_score,
            gold_copy_score,
            chosen_score: gold_copy_score,
            completion: copy,
        })
    }
}
