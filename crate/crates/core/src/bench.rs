//! Paired timing of the beam oracle with and without the n-gram cache.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::oracle::{beam_oracle_next, beam_oracle_next_naive, BeamConfig, ScoreFn};
use crate::seq::Token;
use crate::sim::{corrupt, synthetic_corpus, CorruptionPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub calls: usize,
    pub naive: Duration,
    pub cached: Duration,
    /// Both variants returned identical outcomes on every call.
    pub identical: bool,
}

impl BenchResult {
    pub fn speedup(&self) -> f64 {
        self.naive.as_secs_f64() / self.cached.as_secs_f64().max(1e-12)
    }
}

/// Gold length 30, beam size 20, beam length 4, BLEU-4; prefixes are
/// corrupted gold cut at a random point.
pub fn beam_cache_workload(calls: usize, seed: u64) -> Vec<(Vec<Token>, Vec<Token>)> {
    let golds = synthetic_corpus(calls, 30, 30, 60, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    golds
        .into_iter()
        .map(|gold| {
            let policy = CorruptionPolicy::uniform(0.3, rng.gen()).expect("valid level");
            let corrupted = corrupt(&gold, &policy);
            let cut = rng.gen_range(0..=corrupted.len());
            (corrupted[..cut].to_vec(), gold)
        })
        .collect()
}

pub fn run_beam_cache_bench(calls: usize, seed: u64) -> Result<BenchResult> {
    let cfg = BeamConfig::new(20, 4, ScoreFn::Bleu4)?;
    let work = beam_cache_workload(calls, seed);

    let start = Instant::now();
    let naive = work
        .iter()
        .map(|(p, g)| beam_oracle_next_naive(p, g, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let naive_time = start.elapsed();

    let start = Instant::now();
    let cached = work
        .iter()
        .map(|(p, g)| beam_oracle_next(p, g, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let cached_time = start.elapsed();

    Ok(BenchResult {
        calls,
        naive: naive_time,
        cached: cached_time,
        identical: naive == cached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workload_shape() {
        let w = beam_cache_workload(5, 1);
        assert_eq!(w.len(), 5);
        assert!(w.iter().all(|(_, g)| g.len() == 30));
        assert_eq!(w, beam_cache_workload(5, 1));
    }

    #[test]
    fn small_bench_runs_and_agrees() {
        let r = run_beam_cache_bench(3, 0).unwrap();
        assert_eq!(r.calls, 3);
        assert!(r.identical);
    }
}
