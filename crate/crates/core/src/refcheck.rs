//! Brute-force reference oracle and the fuzz harness that checks the
//! production oracles against it.
//!
//! The enumerator scores completions through [`Objective`]s that use the
//! metric implementations directly (or, for WER, a private Levenshtein row
//! update), never the oracle code under test.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{span_f1, MatchMode, TIE_EPSILON};
use crate::oracle::{
    beam_oracle_next, complete_tags, gold_candidates, select_supervision, wer_rollout, BeamConfig,
    ScoreFn, TagOracle,
};
use crate::seq::{Tag, Token};

/// Something a completion can be scored against. Higher scores are better.
pub trait Objective: Sync {
    type Item: Clone + Ord + Send + Sync;
    type State: Clone;

    fn start(&self, prefix: &[Self::Item]) -> Self::State;
    fn push(&self, state: &Self::State, item: &Self::Item) -> Self::State;
    /// `None` when the sequence is not a valid complete output.
    fn score(&self, state: &Self::State) -> Option<f64>;
}

/// Span F1 of a tag sequence; only sequences as long as the gold are valid.
pub struct SpanF1Objective {
    pub gold: Vec<Tag>,
    pub mode: MatchMode,
}

impl Objective for SpanF1Objective {
    type Item = Tag;
    type State = Vec<Tag>;

    fn start(&self, prefix: &[Tag]) -> Vec<Tag> {
        prefix.to_vec()
    }

    fn push(&self, state: &Vec<Tag>, item: &Tag) -> Vec<Tag> {
        let mut s = state.clone();
        s.push(item.clone());
        s
    }

    fn score(&self, state: &Vec<Tag>) -> Option<f64> {
        if state.len() != self.gold.len() {
            return None;
        }
        span_f1(state, &self.gold, self.mode)
            .ok()
            .map(|(s, _)| s.f1)
    }
}

/// Negated edit distance to the gold, tracked as one Levenshtein row.
pub struct WerObjective {
    pub gold: Vec<Token>,
}

impl Objective for WerObjective {
    type Item = Token;
    type State = Vec<usize>;

    fn start(&self, prefix: &[Token]) -> Vec<usize> {
        let mut row: Vec<usize> = (0..=self.gold.len()).collect();
        for t in prefix {
            row = self.push(&row, t);
        }
        row
    }

    fn push(&self, row: &Vec<usize>, item: &Token) -> Vec<usize> {
        let mut next = Vec::with_capacity(row.len());
        next.push(row[0] + 1);
        for (j, g) in self.gold.iter().enumerate() {
            let diag = row[j] + usize::from(g != item);
            next.push(diag.min(row[j + 1] + 1).min(next[j] + 1));
        }
        next
    }

    fn score(&self, row: &Vec<usize>) -> Option<f64> {
        Some(-(row[self.gold.len()] as f64))
    }
}

/// ROUGE-2 or BLEU-4 recomputed from scratch.
pub struct NGramObjective {
    pub gold: Vec<Token>,
    pub score_fn: ScoreFn,
}

impl Objective for NGramObjective {
    type Item = Token;
    type State = Vec<Token>;

    fn start(&self, prefix: &[Token]) -> Vec<Token> {
        prefix.to_vec()
    }

    fn push(&self, state: &Vec<Token>, item: &Token) -> Vec<Token> {
        let mut s = state.clone();
        s.push(*item);
        s
    }

    fn score(&self, state: &Vec<Token>) -> Option<f64> {
        Some(self.score_fn.score(state, &self.gold))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion<T> {
    pub items: Vec<T>,
    pub score: f64,
}

/// Number of completions of length `0..=max_len` over `n_candidates` symbols.
pub fn enumeration_size(n_candidates: usize, max_len: usize) -> u128 {
    let c = n_candidates as u128;
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(c);
    }
    total
}

/// Best completion by score, then shorter, then lexicographically smaller.
fn better<T: Ord>(a: &Completion<T>, b: &Completion<T>) -> bool {
    if a.score > b.score + TIE_EPSILON {
        return true;
    }
    if b.score > a.score + TIE_EPSILON {
        return false;
    }
    match a.items.len().cmp(&b.items.len()) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.items < b.items,
    }
}

/// Exhaustively enumerates every completion of `prefix` of length
/// `0..=max_len` over `candidates` and returns the best valid one.
pub fn brute_force_completion<O: Objective>(
    objective: &O,
    prefix: &[O::Item],
    candidates: &[O::Item],
    max_len: usize,
    budget: u128,
) -> Result<Option<Completion<O::Item>>> {
    let mut alphabet = candidates.to_vec();
    alphabet.sort();
    alphabet.dedup();
    let size = enumeration_size(alphabet.len(), max_len);
    if size > budget {
        return Err(Error::BudgetExceeded { size, budget });
    }

    fn walk<O: Objective>(
        obj: &O,
        state: &O::State,
        path: &mut Vec<O::Item>,
        alphabet: &[O::Item],
        remaining: usize,
        best: &mut Option<Completion<O::Item>>,
    ) {
        if let Some(score) = obj.score(state) {
            let here = Completion {
                items: path.clone(),
                score,
            };
            if best.as_ref().is_none_or(|b| better(&here, b)) {
                *best = Some(here);
            }
        }
        if remaining == 0 {
            return;
        }
        for item in alphabet {
            let next = obj.push(state, item);
            path.push(item.clone());
            walk(obj, &next, path, alphabet, remaining - 1, best);
            path.pop();
        }
    }

    let mut best = None;
    let root = objective.start(prefix);
    walk(
        objective,
        &root,
        &mut Vec::new(),
        &alphabet,
        max_len,
        &mut best,
    );
    Ok(best)
}

/// All valid completion scores, for self-checks of the enumerator.
pub fn all_completion_scores<O: Objective>(
    objective: &O,
    prefix: &[O::Item],
    candidates: &[O::Item],
    max_len: usize,
) -> Vec<f64> {
    let mut out = Vec::new();
    let mut stack = vec![(objective.start(prefix), 0usize)];
    while let Some((state, depth)) = stack.pop() {
        out.extend(objective.score(&state));
        if depth < max_len {
            for c in candidates {
                stack.push((objective.push(&state, c), depth + 1));
            }
        }
    }
    out
}

/// The five oracles the harness knows how to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleKind {
    ExactF1,
    PartialF1,
    Wer,
    Rouge2,
    Bleu4,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::ExactF1 => "f1-exact",
            OracleKind::PartialF1 => "f1-partial",
            OracleKind::Wer => "wer",
            OracleKind::Rouge2 => "rouge2",
            OracleKind::Bleu4 => "bleu4",
        }
    }

    /// What a gate violation means for this oracle.
    pub fn gate(self) -> &'static str {
        match self {
            OracleKind::ExactF1 | OracleKind::PartialF1 => "rollout_ge_all_outside",
            OracleKind::Wer => "optimal_distance",
            OracleKind::Rouge2 | OracleKind::Bleu4 => "chosen_ge_gold_copy",
        }
    }
}

/// How prefixes are drawn for the tag oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrefixMode {
    /// Gold prefix with each tag replaced by a random one with some probability.
    Corrupted { p_replace: f64 },
    /// The gold prefix itself.
    Gold,
}

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub cases: usize,
    pub seed: u64,
    /// Longest gold sequence drawn (or enumerated).
    pub max_gold_len: usize,
    /// Token vocabulary size for WER / ROUGE / BLEU inputs.
    pub vocab_size: u32,
    /// Enumerate every input up to `max_gold_len` instead of sampling.
    pub exhaustive: bool,
    pub prefix_mode: PrefixMode,
    /// Gold tag sequences always separate entities by at least one `O`.
    pub separated_spans: bool,
    pub counterexample_cap: usize,
    /// Upper bound on brute-force enumeration size per case.
    pub budget: u128,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            cases: 1_000,
            seed: 0,
            max_gold_len: 5,
            vocab_size: 3,
            exhaustive: false,
            prefix_mode: PrefixMode::Corrupted { p_replace: 0.3 },
            separated_spans: false,
            counterexample_cap: 20,
            budget: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGap {
    pub input: String,
    pub oracle_score: f64,
    pub optimal_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub oracle: OracleKind,
    pub cases_run: usize,
    /// Cases where the oracle's completion scores as well as the brute-force optimum.
    pub agreements: usize,
    /// Cases failing the oracle's gate (see [`OracleKind::gate`]).
    pub gate_violations: usize,
    /// Every disagreement, sorted by input encoding.
    pub score_gaps: Vec<ScoreGap>,
    /// Gate violations, sorted by input encoding and capped.
    pub counterexamples: Vec<ScoreGap>,
}

impl VerificationReport {
    pub fn agreement_rate(&self) -> f64 {
        if self.cases_run == 0 {
            1.0
        } else {
            self.agreements as f64 / self.cases_run as f64
        }
    }

    pub fn passed(&self) -> bool {
        self.gate_violations == 0
    }
}

struct CaseOutcome {
    input: String,
    oracle_score: f64,
    optimal_score: f64,
    /// Gate quantity: for tags the all-`O` score, for n-gram oracles the
    /// gold-copy score; the oracle side must be at least this.
    gate_ok: bool,
    gate_oracle: f64,
    gate_reference: f64,
}

fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

fn letters(seq: &[Token]) -> String {
    seq.iter()
        .map(|t| char::from_u32(u32::from(b'a') + t.0).unwrap_or('?'))
        .collect()
}

fn render_tags(seq: &[Tag]) -> String {
    seq.iter().map(Tag::to_string).collect::<Vec<_>>().join(" ")
}

const TAG_TYPES: [&str; 2] = ["LOC", "PER"];

/// `O` plus `B`/`I` over two entity types.
pub fn tag_alphabet() -> Vec<Tag> {
    let mut out = vec![Tag::Outside];
    for t in TAG_TYPES {
        out.push(Tag::begin(t));
        out.push(Tag::inside(t));
    }
    out
}

/// A well-formed IOB2 gold sequence.
pub fn random_gold_tags(rng: &mut impl Rng, len: usize, separated: bool) -> Vec<Tag> {
    let mut out: Vec<Tag> = Vec::with_capacity(len);
    for _ in 0..len {
        let prev = out.last().cloned().unwrap_or(Tag::Outside);
        let ty = TAG_TYPES[rng.gen_range(0..TAG_TYPES.len())];
        let next = match rng.gen_range(0..3) {
            0 => Tag::Outside,
            1 if !prev.is_outside() => Tag::inside(prev.entity_type().unwrap()),
            _ if separated && !prev.is_outside() => Tag::Outside,
            _ => Tag::begin(ty),
        };
        out.push(next);
    }
    out
}

fn random_tokens(rng: &mut impl Rng, len: usize, vocab: u32) -> Vec<Token> {
    (0..len).map(|_| Token(rng.gen_range(0..vocab))).collect()
}

/// Every token sequence over `vocab` with length `0..=max_len`.
pub fn all_sequences(vocab: u32, max_len: usize) -> Vec<Vec<Token>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * vocab as usize);
        for seq in &layer {
            for t in 0..vocab {
                let mut s: Vec<Token> = seq.clone();
                s.push(Token(t));
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn tag_case(oracle: TagOracle, gold: &[Tag], prefix: &[Tag], budget: u128) -> Result<CaseOutcome> {
    let mode = match oracle {
        TagOracle::PartialF1 => MatchMode::Partial,
        TagOracle::ExactF1 => MatchMode::Exact,
    };
    let objective = SpanF1Objective {
        gold: gold.to_vec(),
        mode,
    };
    let rollout = complete_tags(oracle, gold, prefix)?;
    let oracle_score = objective.score(&rollout).expect("rollout has gold length");
    let mut all_o = prefix.to_vec();
    all_o.resize(gold.len(), Tag::Outside);
    let all_o_score = objective.score(&all_o).expect("padded to gold length");
    let remaining = gold.len() - prefix.len();
    let best = brute_force_completion(&objective, prefix, &tag_alphabet(), remaining, budget)?
        .expect("a full-length completion exists");
    Ok(CaseOutcome {
        input: format!(
            "gold=[{}] prefix=[{}]",
            render_tags(gold),
            render_tags(prefix)
        ),
        oracle_score,
        optimal_score: best.score,
        gate_ok: oracle_score + TIE_EPSILON >= all_o_score,
        gate_oracle: oracle_score,
        gate_reference: all_o_score,
    })
}

fn wer_case(gold: &[Token], fed: &[Token], vocab: u32, budget: u128) -> Result<CaseOutcome> {
    let objective = WerObjective {
        gold: gold.to_vec(),
    };
    let completion = wer_rollout(gold, fed);
    let mut state = objective.start(fed);
    for t in &completion {
        state = objective.push(&state, t);
    }
    let oracle_score = objective.score(&state).unwrap();
    let candidates: Vec<Token> = (0..vocab).map(Token).collect();
    let best = brute_force_completion(&objective, fed, &candidates, gold.len() + 2, budget)?
        .expect("the empty completion is valid");
    let agree = (oracle_score - best.score).abs() <= TIE_EPSILON;
    Ok(CaseOutcome {
        input: format!("gold={} fed={}", letters(gold), letters(fed)),
        oracle_score: -oracle_score,
        optimal_score: -best.score,
        gate_ok: agree,
        gate_oracle: -oracle_score,
        gate_reference: -best.score,
    })
}

fn ngram_case(
    score_fn: ScoreFn,
    gold: &[Token],
    prefix: &[Token],
    budget: u128,
) -> Result<CaseOutcome> {
    let candidates = gold_candidates(gold);
    let beam_length = gold.len().saturating_sub(prefix.len()).max(1);
    let beam_size = candidates
        .len()
        .checked_pow(beam_length as u32)
        .ok_or_else(|| Error::InvalidConfig("exhaustive beam too large".into()))?;
    let cfg = BeamConfig::new(beam_size, beam_length, score_fn)?;
    let outcome = beam_oracle_next(prefix, gold, &cfg)?;
    let objective = NGramObjective {
        gold: gold.to_vec(),
        score_fn,
    };
    let best = brute_force_completion(&objective, prefix, &candidates, beam_length, budget)?
        .expect("the empty completion is valid");
    let choice = select_supervision(prefix, gold, &cfg)?;
    Ok(CaseOutcome {
        input: format!("gold={} prefix={}", letters(gold), letters(prefix)),
        oracle_score: outcome.best_score,
        optimal_score: best.score,
        gate_ok: choice.chosen_score >= choice.gold_copy_score,
        gate_oracle: choice.chosen_score,
        gate_reference: choice.gold_copy_score,
    })
}

fn tag_inputs(cfg: &FuzzConfig) -> Vec<(Vec<Tag>, Vec<Tag>)> {
    if cfg.exhaustive {
        let alphabet = tag_alphabet();
        let mut out = Vec::new();
        // All gold lengths up to the maximum, each with every prefix length.
        let mut all_golds = Vec::new();
        for len in 1..=cfg.max_gold_len {
            let mut layer: Vec<Vec<Tag>> = vec![Vec::new()];
            for _ in 0..len {
                layer = layer
                    .into_iter()
                    .flat_map(|g| {
                        alphabet.iter().map(move |t| {
                            let mut s = g.clone();
                            s.push(t.clone());
                            s
                        })
                    })
                    .collect();
            }
            all_golds.extend(
                layer
                    .into_iter()
                    .filter(|g| is_valid_gold(g, cfg.separated_spans)),
            );
        }
        for g in all_golds {
            for cut in 0..=g.len() {
                match cfg.prefix_mode {
                    PrefixMode::Gold => out.push((g.clone(), g[..cut].to_vec())),
                    PrefixMode::Corrupted { .. } => {
                        let mut prefixes: Vec<Vec<Tag>> = vec![Vec::new()];
                        for _ in 0..cut {
                            prefixes = prefixes
                                .into_iter()
                                .flat_map(|p| {
                                    alphabet.iter().map(move |t| {
                                        let mut s = p.clone();
                                        s.push(t.clone());
                                        s
                                    })
                                })
                                .collect();
                        }
                        out.extend(prefixes.into_iter().map(|p| (g.clone(), p)));
                    }
                }
            }
        }
        return out;
    }
    (0..cfg.cases)
        .map(|case| {
            let mut rng = case_rng(cfg.seed, case);
            let len = rng.gen_range(1..=cfg.max_gold_len.max(1));
            let gold = random_gold_tags(&mut rng, len, cfg.separated_spans);
            let cut = rng.gen_range(0..=len);
            let alphabet = tag_alphabet();
            let prefix = match cfg.prefix_mode {
                PrefixMode::Gold => gold[..cut].to_vec(),
                PrefixMode::Corrupted { p_replace } => gold[..cut]
                    .iter()
                    .map(|t| {
                        if rng.gen_bool(p_replace) {
                            alphabet[rng.gen_range(0..alphabet.len())].clone()
                        } else {
                            t.clone()
                        }
                    })
                    .collect(),
            };
            (gold, prefix)
        })
        .collect()
}

fn is_valid_gold(tags: &[Tag], separated: bool) -> bool {
    tags.iter().enumerate().all(|(i, t)| {
        let prev = if i == 0 { &Tag::Outside } else { &tags[i - 1] };
        match t {
            Tag::Inside(ty) => prev.entity_type() == Some(ty.as_str()),
            Tag::Begin(_) => !separated || prev.is_outside(),
            Tag::Outside => true,
        }
    })
}

fn token_inputs(kind: OracleKind, cfg: &FuzzConfig) -> Vec<(Vec<Token>, Vec<Token>)> {
    let v = cfg.vocab_size;
    if cfg.exhaustive {
        let seqs = all_sequences(v, cfg.max_gold_len);
        let mut out = Vec::new();
        for g in &seqs {
            for p in &seqs {
                let keep = match kind {
                    OracleKind::Wer => true,
                    // Beam inputs need a non-empty gold and something left to predict.
                    _ => !g.is_empty() && p.len() < g.len(),
                };
                if keep {
                    out.push((g.clone(), p.clone()));
                }
            }
        }
        return out;
    }
    (0..cfg.cases)
        .map(|case| {
            let mut rng = case_rng(cfg.seed, case);
            match kind {
                OracleKind::Wer => {
                    let g = {
                        let n = rng.gen_range(0..=cfg.max_gold_len);
                        random_tokens(&mut rng, n, v)
                    };
                    let p = {
                        let n = rng.gen_range(0..=cfg.max_gold_len);
                        random_tokens(&mut rng, n, v)
                    };
                    (g, p)
                }
                _ => {
                    let len = rng.gen_range(1..=cfg.max_gold_len.max(1));
                    let g = random_tokens(&mut rng, len, v);
                    let cut = rng.gen_range(0..len);
                    // Prefixes may use one symbol the gold never contains.
                    let p = random_tokens(&mut rng, cut, v + 1);
                    (g, p)
                }
            }
        })
        .collect()
}

/// Runs `kind` against the brute-force oracle on every input `cfg` yields.
pub fn verify_oracle(kind: OracleKind, cfg: &FuzzConfig) -> Result<VerificationReport> {
    let outcomes: Vec<CaseOutcome> = match kind {
        OracleKind::ExactF1 | OracleKind::PartialF1 => {
            let oracle = if kind == OracleKind::ExactF1 {
                TagOracle::ExactF1
            } else {
                TagOracle::PartialF1
            };
            tag_inputs(cfg)
                .par_iter()
                .map(|(g, p)| tag_case(oracle, g, p, cfg.budget))
                .collect::<Result<_>>()?
        }
        OracleKind::Wer => token_inputs(kind, cfg)
            .par_iter()
            .map(|(g, s)| wer_case(g, s, cfg.vocab_size, cfg.budget))
            .collect::<Result<_>>()?,
        OracleKind::Rouge2 | OracleKind::Bleu4 => {
            let score_fn = if kind == OracleKind::Rouge2 {
                ScoreFn::Rouge2
            } else {
                ScoreFn::Bleu4
            };
            token_inputs(kind, cfg)
                .par_iter()
                .map(|(g, p)| ngram_case(score_fn, g, p, cfg.budget))
                .collect::<Result<_>>()?
        }
    };

    // WER scores are distances (lower is better); the others are maximized.
    let lower_is_better = kind == OracleKind::Wer;
    let mut agreements = 0;
    let mut score_gaps = Vec::new();
    let mut violations = Vec::new();
    for o in &outcomes {
        if (o.oracle_score - o.optimal_score).abs() <= TIE_EPSILON {
            agreements += 1;
        } else {
            score_gaps.push(ScoreGap {
                input: o.input.clone(),
                oracle_score: o.oracle_score,
                optimal_score: o.optimal_score,
            });
        }
        if !o.gate_ok {
            violations.push(ScoreGap {
                input: o.input.clone(),
                oracle_score: o.gate_oracle,
                optimal_score: o.gate_reference,
            });
        }
    }
    let by_input = |a: &ScoreGap, b: &ScoreGap| a.input.cmp(&b.input);
    score_gaps.sort_by(by_input);
    violations.sort_by(by_input);
    let gate_violations = violations.len();
    violations.truncate(cfg.counterexample_cap);
    debug_assert!(score_gaps.iter().all(|g| if lower_is_better {
        g.optimal_score <= g.oracle_score
    } else {
        g.optimal_score >= g.oracle_score
    }));

    Ok(VerificationReport {
        oracle: kind,
        cases_run: outcomes.len(),
        agreements,
        gate_violations,
        score_gaps,
        counterexamples: violations,
    })
}

/// One-line human summary.
pub fn summarize(report: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{}: {} cases, {} agree ({:.4}), {} {} violations",
        report.oracle.name(),
        report.cases_run,
        report.agreements,
        report.agreement_rate(),
        report.gate_violations,
        report.oracle.gate(),
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::parse_tags;

    fn toks(s: &str) -> Vec<Token> {
        s.bytes().map(|b| Token(u32::from(b - b'a'))).collect()
    }

    #[test]
    fn enumeration_size_counts_all_lengths() {
        assert_eq!(enumeration_size(3, 0), 1);
        assert_eq!(enumeration_size(3, 2), 1 + 3 + 9);
        assert_eq!(enumeration_size(0, 4), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let obj = WerObjective { gold: toks("ab") };
        let err = brute_force_completion(&obj, &[], &toks("abc"), 4, 10).unwrap_err();
        assert!(matches!(
            err,
            Error::BudgetExceeded {
                size: 121,
                budget: 10
            }
        ));
    }

    #[test]
    fn tags_from_empty_prefix_copy_gold() {
        let gold = parse_tags("B-LOC O").unwrap();
        let obj = SpanF1Objective {
            gold: gold.clone(),
            mode: MatchMode::Partial,
        };
        let best = brute_force_completion(&obj, &[], &tag_alphabet(), 2, 1_000)
            .unwrap()
            .unwrap();
        assert_eq!(best.score, 1.0);
        // Ties on score go to the lexicographically smallest sequence, and
        // `B-LOC O` is the smallest perfect one under the tag ordering.
        assert_eq!(best.items, gold);
    }

    #[test]
    fn wer_exact_continuation() {
        let obj = WerObjective { gold: toks("ab") };
        let best = brute_force_completion(&obj, &toks("a"), &toks("abc"), 4, 1_000)
            .unwrap()
            .unwrap();
        assert_eq!(best.items, toks("b"));
        assert_eq!(best.score, 0.0);
    }

    #[test]
    fn rouge_tie_break_prefers_short_then_lexicographic() {
        let gold = toks("abcd");
        let obj = NGramObjective {
            gold: gold.clone(),
            score_fn: ScoreFn::Rouge2,
        };
        let best = brute_force_completion(&obj, &toks("ac"), &gold_candidates(&gold), 2, 1_000)
            .unwrap()
            .unwrap();
        assert_eq!(best.items, toks("d"));
        assert!((best.score - 0.4).abs() < 1e-12);
    }

    #[test]
    fn brute_force_dominates_rescan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let gold = {
                let n = rng.gen_range(1..5);
                random_tokens(&mut rng, n, 3)
            };
            let prefix = {
                let n = rng.gen_range(0..3);
                random_tokens(&mut rng, n, 4)
            };
            for score_fn in [ScoreFn::Rouge2, ScoreFn::Bleu4] {
                let obj = NGramObjective {
                    gold: gold.clone(),
                    score_fn,
                };
                let cands: Vec<Token> = (0..3).map(Token).collect();
                let best = brute_force_completion(&obj, &prefix, &cands, 3, 1_000)
                    .unwrap()
                    .unwrap();
                for s in all_completion_scores(&obj, &prefix, &cands, 3) {
                    assert!(best.score + TIE_EPSILON >= s);
                }
            }
        }
    }

    #[test]
    fn generated_gold_is_valid_iob2() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for sep in [false, true] {
            for _ in 0..500 {
                let g = random_gold_tags(&mut rng, 8, sep);
                assert!(is_valid_gold(&g, sep), "{g:?}");
            }
        }
    }

    #[test]
    fn all_sequences_counts() {
        assert_eq!(all_sequences(3, 2).len(), 13);
        assert_eq!(all_sequences(3, 0), vec![Vec::<Token>::new()]);
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = FuzzConfig {
            cases: 200,
            seed: 9,
            ..FuzzConfig::default()
        };
        for kind in [OracleKind::PartialF1, OracleKind::Wer, OracleKind::Bleu4] {
            assert_eq!(
                verify_oracle(kind, &cfg).unwrap(),
                verify_oracle(kind, &cfg).unwrap()
            );
        }
    }

    #[test]
    fn exact_oracle_on_gold_prefixes_always_agrees() {
        let cfg = FuzzConfig {
            cases: 500,
            max_gold_len: 6,
            prefix_mode: PrefixMode::Gold,
            separated_spans: true,
            ..FuzzConfig::default()
        };
        for kind in [OracleKind::ExactF1, OracleKind::PartialF1] {
            let r = verify_oracle(kind, &cfg).unwrap();
            assert_eq!(r.agreements, r.cases_run, "{}", summarize(&r));
        }
    }

    #[test]
    fn wer_small_exhaustive_agrees() {
        let cfg = FuzzConfig {
            exhaustive: true,
            max_gold_len: 3,
            vocab_size: 2,
            ..FuzzConfig::default()
        };
        let r = verify_oracle(OracleKind::Wer, &cfg).unwrap();
        assert_eq!(r.cases_run, 15 * 15);
        assert!(r.passed(), "{}", summarize(&r));
        assert_eq!(r.agreements, r.cases_run);
    }
}
