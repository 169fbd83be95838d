//! Mock scheduled-sampling environment.
//!
//! Gold sentences are corrupted by a seeded policy to stand in for a model's
//! own predictions, cut at a random position, and the resulting prefix is
//! supervised twice: by copying the gold suffix and by the beam oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::{gold_candidates, select_supervision, BeamConfig, ScoreFn, SupervisionSource};
use crate::seq::Token;

/// Per-position corruption: drop, then substitute, then insert after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionPolicy {
    pub p_drop: f64,
    pub p_substitute: f64,
    pub p_insert: f64,
    pub seed: u64,
}

impl CorruptionPolicy {
    pub fn new(p_drop: f64, p_substitute: f64, p_insert: f64, seed: u64) -> Result<Self> {
        for (name, p) in [
            ("p_drop", p_drop),
            ("p_substitute", p_substitute),
            ("p_insert", p_insert),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be in [0, 1], got {p}"
                )));
            }
        }
        Ok(CorruptionPolicy {
            p_drop,
            p_substitute,
            p_insert,
            seed,
        })
    }

    /// A single corruption level split evenly across the three operations,
    /// so `level` is roughly the expected number of edits per gold token.
    pub fn uniform(level: f64, seed: u64) -> Result<Self> {
        let p = level / 3.0;
        CorruptionPolicy::new(p, p, p, seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        CorruptionPolicy { seed, ..self }
    }
}

/// Corrupts `gold`. Substituted and inserted tokens are drawn from the gold
/// unigrams. Every position consumes the same number of random draws
/// whatever the probabilities, so policies that differ only in level
/// corrupt nested sets of positions under one seed.
pub fn corrupt(gold: &[Token], policy: &CorruptionPolicy) -> Vec<Token> {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let pool = gold_candidates(gold);
    let mut out = Vec::with_capacity(gold.len() + 4);
    for &t in gold {
        let (u_drop, u_sub, u_ins): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
        let (r_sub, r_ins): (usize, usize) = (rng.gen(), rng.gen());
        if u_drop < policy.p_drop {
            continue;
        }
        let token = if u_sub < policy.p_substitute {
            // A different unigram when there is one.
            let others: Vec<Token> = pool.iter().copied().filter(|&o| o != t).collect();
            if others.is_empty() {
                t
            } else {
                others[r_sub % others.len()]
            }
        } else {
            t
        };
        out.push(token);
        if u_ins < policy.p_insert {
            out.push(pool[r_ins % pool.len()]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    pub sentence_id: usize,
    pub corruption: f64,
    pub beam_size: usize,
    pub cut: usize,
    pub gold_copy_score: f64,
    /// Score of the supervision the oracle hands out (beam or gold copy).
    pub oracle_score: f64,
    /// `oracle_score - gold_copy_score`; never negative.
    pub delta: f64,
    pub source: SupervisionSource,
}

/// Supervises `corrupt(gold)[..cut]` both ways and records the scores.
pub fn compare_once(
    sentence_id: usize,
    gold: &[Token],
    policy: &CorruptionPolicy,
    cut: usize,
    cfg: &BeamConfig,
) -> Result<ComparisonRecord> {
    let corrupted = corrupt(gold, policy);
    if cut > corrupted.len() {
        return Err(Error::InvalidConfig(format!(
            "cut {cut} is past the corrupted length {}",
            corrupted.len()
        )));
    }
    let choice = select_supervision(&corrupted[..cut], gold, cfg)?;
    Ok(ComparisonRecord {
        sentence_id,
        corruption: policy.p_drop + policy.p_substitute + policy.p_insert,
        beam_size: cfg.beam_size,
        cut,
        gold_copy_score: choice.gold_copy_score,
        oracle_score: choice.chosen_score,
        delta: choice.chosen_score - choice.gold_copy_score,
        source: choice.source,
    })
}

/// Mixes a base seed with further integers (splitmix64 finalizer per step).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub beam_length: usize,
    pub score_fn: ScoreFn,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            beam_length: 2,
            score_fn: ScoreFn::Bleu4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRow {
    pub corruption: f64,
    pub beam_size: usize,
    pub records: usize,
    /// Fraction of records where the oracle beat the gold copy.
    pub frac_improved: f64,
    pub mean_gold_copy: f64,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendTable {
    /// Rows in sweep order: corruption levels outer, beam sizes inner.
    pub rows: Vec<TrendRow>,
}

impl TrendTable {
    pub fn row(&self, corruption: f64, beam_size: usize) -> Option<&TrendRow> {
        self.rows
            .iter()
            .find(|r| r.corruption == corruption && r.beam_size == beam_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub table: TrendTable,
    pub records: Vec<ComparisonRecord>,
}

/// Sweeps corruption levels × beam sizes over `corpus`.
///
/// For each sentence the corruption seed and cut draw depend only on the base
/// seed and sentence id, so every beam size sees the same prefix and lower
/// levels corrupt a subset of the positions higher levels do.
pub fn trend_report(
    corpus: &[Vec<Token>],
    levels: &[f64],
    beam_sizes: &[usize],
    base: &SimConfig,
) -> Result<TrendReport> {
    if corpus.is_empty() {
        return Err(Error::InvalidConfig("corpus is empty".into()));
    }
    if let Some(i) = corpus.iter().position(Vec::is_empty) {
        return Err(Error::InvalidConfig(format!("sentence {i} is empty")));
    }
    let configs = beam_sizes
        .iter()
        .map(|&b| BeamConfig::new(b, base.beam_length, base.score_fn))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(levels.len() * beam_sizes.len());
    let mut records = Vec::new();
    for &level in levels {
        let per_sentence: Vec<Vec<ComparisonRecord>> = corpus
            .par_iter()
            .enumerate()
            .map(|(id, gold)| {
                let policy =
                    CorruptionPolicy::uniform(level, derive_seed(base.seed, &[id as u64, 0]))?;
                let corrupted_len = corrupt(gold, &policy).len();
                let mut cut_rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(base.seed, &[id as u64, 1]));
                let cut = (cut_rng.gen::<f64>() * (corrupted_len + 1) as f64) as usize;
                let cut = cut.min(corrupted_len);
                configs
                    .iter()
                    .map(|cfg| {
                        let mut r = compare_once(id, gold, &policy, cut, cfg)?;
                        r.corruption = level;
                        Ok(r)
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;

        for (k, &beam_size) in beam_sizes.iter().enumerate() {
            let recs: Vec<&ComparisonRecord> = per_sentence.iter().map(|rs| &rs[k]).collect();
            let n = recs.len() as f64;
            rows.push(TrendRow {
                corruption: level,
                beam_size,
                records: recs.len(),
                frac_improved: recs.iter().filter(|r| r.delta > 0.0).count() as f64 / n,
                mean_gold_copy: recs.iter().map(|r| r.gold_copy_score).sum::<f64>() / n,
                mean_delta: recs.iter().map(|r| r.delta).sum::<f64>() / n,
            });
        }
        records.extend(per_sentence.into_iter().flatten());
    }
    Ok(TrendReport {
        table: TrendTable { rows },
        records,
    })
}

/// Synthetic sentences over a skewed vocabulary of `vocab` ids, so common
/// tokens repeat within a sentence the way function words do.
pub fn synthetic_corpus(
    n: usize,
    min_len: usize,
    max_len: usize,
    vocab: u32,
    seed: u64,
) -> Vec<Vec<Token>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(min_len..=max_len);
            (0..len)
                .map(|_| {
                    // Squaring a uniform draw favors small ids.
                    let u: f64 = rng.gen();
                    Token(((u * u) * f64::from(vocab)) as u32)
                })
                .collect()
        })
        .collect()
}
