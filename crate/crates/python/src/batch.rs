//! Batched oracle calls over flat integer arrays.
//!
//! Token metrics take ids in `0..vocab_size`. Tag metrics use the encoding
//! `0 = O`, `2k + 1 = B-Tk`, `2k + 2 = I-Tk`. The end of a sequence is
//! returned as `vocab_size`.

use rayon::prelude::*;
use thiserror::Error;

use dynoracle::oracle::{
    complete_tags, select_supervision, wer_next, BeamConfig, Label, ScoreFn, TagOracle,
};
use dynoracle::seq::{Tag, Token};

pub const METRICS: [&str; 5] = ["f1-exact", "f1-partial", "wer", "rouge2", "bleu4"];

#[derive(Debug, Error, PartialEq)]
pub enum BatchError {
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    #[error("{which} lengths sum to {sum} but {which} array has {len} ids")]
    LengthSum {
        which: &'static str,
        sum: usize,
        len: usize,
    },

    #[error("{prefixes} prefixes but {golds} gold sequences")]
    BatchSize { prefixes: usize, golds: usize },

    #[error("vocab_size {0} does not fit 32-bit token ids")]
    VocabTooLarge(usize),

    #[error("item {index}: {message}")]
    Item { index: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchMetric {
    F1Exact,
    F1Partial,
    Wer,
    Rouge2,
    Bleu4,
}

impl BatchMetric {
    pub fn parse(name: &str) -> Result<Self, BatchError> {
        Ok(match name {
            "f1-exact" => BatchMetric::F1Exact,
            "f1-partial" => BatchMetric::F1Partial,
            "wer" => BatchMetric::Wer,
            "rouge2" => BatchMetric::Rouge2,
            "bleu4" => BatchMetric::Bleu4,
            other => return Err(BatchError::UnknownMetric(other.to_string())),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BatchRequest<'a> {
    pub metric: BatchMetric,
    pub prefix_ids: &'a [i64],
    pub prefix_lengths: &'a [usize],
    pub gold_ids: &'a [i64],
    pub gold_lengths: &'a [usize],
    pub vocab_size: usize,
    pub beam_size: usize,
    pub beam_length: usize,
}

fn split<'a>(
    ids: &'a [i64],
    lengths: &[usize],
    which: &'static str,
) -> Result<Vec<&'a [i64]>, BatchError> {
    let sum: usize = lengths.iter().sum();
    if sum != ids.len() {
        return Err(BatchError::LengthSum {
            which,
            sum,
            len: ids.len(),
        });
    }
    let mut out = Vec::with_capacity(lengths.len());
    let mut at = 0;
    for &n in lengths {
        out.push(&ids[at..at + n]);
        at += n;
    }
    Ok(out)
}

fn tokens(ids: &[i64], vocab_size: usize) -> Result<Vec<Token>, String> {
    ids.iter()
        .map(|&id| {
            if id < 0 || id as u64 >= vocab_size as u64 {
                Err(format!("id {id} outside 0..{vocab_size}"))
            } else {
                Ok(Token(id as u32))
            }
        })
        .collect()
}

pub fn tag_from_id(id: u32) -> Tag {
    match id {
        0 => Tag::Outside,
        n if n % 2 == 1 => Tag::begin(format!("T{}", (n - 1) / 2)),
        n => Tag::inside(format!("T{}", (n - 2) / 2)),
    }
}

/// Inverse of [`tag_from_id`]; `None` for types not named `T<k>`.
pub fn tag_to_id(tag: &Tag) -> Option<u32> {
    let Some(ty) = tag.entity_type() else {
        return Some(0);
    };
    let k: u32 = ty.strip_prefix('T')?.parse().ok()?;
    Some(match tag {
        Tag::Begin(_) => 2 * k + 1,
        _ => 2 * k + 2,
    })
}

fn item(req: &BatchRequest, prefix: &[i64], gold: &[i64]) -> Result<i64, String> {
    let end = req.vocab_size as i64;
    let prefix = tokens(prefix, req.vocab_size)?;
    let gold = tokens(gold, req.vocab_size)?;
    let label = match req.metric {
        BatchMetric::F1Exact | BatchMetric::F1Partial => {
            let oracle = if req.metric == BatchMetric::F1Exact {
                TagOracle::ExactF1
            } else {
                TagOracle::PartialF1
            };
            let gold: Vec<Tag> = gold.iter().map(|t| tag_from_id(t.0)).collect();
            let prefix: Vec<Tag> = prefix.iter().map(|t| tag_from_id(t.0)).collect();
            let full = complete_tags(oracle, &gold, &prefix).map_err(|e| e.to_string())?;
            return Ok(full.get(prefix.len()).map_or(end, |t| {
                tag_to_id(t).expect("oracle reuses input tag types") as i64
            }));
        }
        BatchMetric::Wer => wer_next(&gold, &prefix),
        BatchMetric::Rouge2 | BatchMetric::Bleu4 => {
            let score_fn = if req.metric == BatchMetric::Rouge2 {
                ScoreFn::Rouge2
            } else {
                ScoreFn::Bleu4
            };
            let cfg = BeamConfig::new(req.beam_size, req.beam_length, score_fn)
                .map_err(|e| e.to_string())?;
            select_supervision(&prefix, &gold, &cfg)
                .map_err(|e| e.to_string())?
                .next_token
        }
    };
    Ok(match label {
        Label::Token(t) => t.0 as i64,
        Label::End => end,
    })
}

/// Supervision id for every item, in order. Items are evaluated in parallel
/// and independently; the first failing item (by index) is reported.
pub fn oracle_next_batch(req: &BatchRequest) -> Result<Vec<i64>, BatchError> {
    if req.prefix_lengths.len() != req.gold_lengths.len() {
        return Err(BatchError::BatchSize {
            prefixes: req.prefix_lengths.len(),
            golds: req.gold_lengths.len(),
        });
    }
    if req.vocab_size > u32::MAX as usize {
        return Err(BatchError::VocabTooLarge(req.vocab_size));
    }
    let prefixes = split(req.prefix_ids, req.prefix_lengths, "prefix")?;
    let golds = split(req.gold_ids, req.gold_lengths, "gold")?;
    prefixes
        .par_iter()
        .zip(golds.par_iter())
        .enumerate()
        .map(|(index, (p, g))| {
            item(req, p, g).map_err(|message| BatchError::Item { index, message })
        })
        .collect()
}
