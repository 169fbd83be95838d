use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::seq::{extract_spans, transition, Span, SpanTransition, Tag};

use super::ScoreTriple;

/// How predicted spans are credited against gold spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMode {
    /// Identical bounds and type.
    Exact,
    /// Same type and at least one shared token, one-to-one, greedy in gold order.
    Partial,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub matched: usize,
    pub n_pred: usize,
    pub n_gold: usize,
}

impl MatchCounts {
    pub fn scores(&self) -> ScoreTriple {
        if self.n_pred == 0 && self.n_gold == 0 {
            return ScoreTriple::perfect();
        }
        ScoreTriple::from_counts(self.matched, self.n_pred, self.n_gold)
    }
}

impl AddAssign for MatchCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.matched += rhs.matched;
        self.n_pred += rhs.n_pred;
        self.n_gold += rhs.n_gold;
    }
}

/// Number of matched span pairs under `mode`.
pub fn match_spans(pred: &[Span], gold: &[Span], mode: MatchMode) -> usize {
    match mode {
        // Spans on one side are disjoint, so an exact match is unique.
        MatchMode::Exact => gold.iter().filter(|g| pred.contains(g)).count(),
        MatchMode::Partial => {
            let mut used = vec![false; pred.len()];
            let mut matched = 0;
            for g in gold {
                let hit = pred
                    .iter()
                    .enumerate()
                    .find(|(i, p)| !used[*i] && p.entity_type == g.entity_type && p.overlaps(g));
                if let Some((i, _)) = hit {
                    used[i] = true;
                    matched += 1;
                }
            }
            matched
        }
    }
}

pub fn span_counts(pred: &[Tag], gold: &[Tag], mode: MatchMode) -> Result<MatchCounts> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let pred_spans = extract_spans(pred);
    let gold_spans = extract_spans(gold);
    Ok(MatchCounts {
        matched: match_spans(&pred_spans, &gold_spans, mode),
        n_pred: pred_spans.len(),
        n_gold: gold_spans.len(),
    })
}

/// Span-level precision, recall and F1 of `pred` against `gold`.
///
/// Both sides empty of spans scores 1.0 everywhere.
pub fn span_f1(pred: &[Tag], gold: &[Tag], mode: MatchMode) -> Result<(ScoreTriple, MatchCounts)> {
    let counts = span_counts(pred, gold, mode)?;
    Ok((counts.scores(), counts))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OpenSpan {
    start: usize,
    entity_type: String,
}

/// A predicted span that has not been matched yet. `end` is `None` while open.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PendingSpan {
    start: usize,
    end: Option<usize>,
    entity_type: String,
}

/// Left-to-right span scorer: counts are updated as spans close, so the
/// total is a sum of per-position deltas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncrementalSpanState {
    mode: MatchMode,
    pos: usize,
    counts: MatchCounts,
    open_pred: Option<OpenSpan>,
    open_gold: Option<OpenSpan>,
    // Partial mode only: unmatched predicted spans that may still overlap a
    // gold span which has not closed yet. Sorted by start.
    pending: Vec<PendingSpan>,
}

impl IncrementalSpanState {
    pub fn new(mode: MatchMode) -> Self {
        IncrementalSpanState {
            mode,
            pos: 0,
            counts: MatchCounts::default(),
            open_pred: None,
            open_gold: None,
            pending: Vec::new(),
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    /// Counts over spans closed so far.
    pub fn counts(&self) -> MatchCounts {
        self.counts
    }

    /// Consumes one aligned (pred, gold) tag pair and returns the count delta.
    pub fn step(&mut self, pred_tag: &Tag, gold_tag: &Tag) -> MatchCounts {
        let before = self.counts;
        let pred_tr = transition(
            self.open_pred.as_ref().map(|s| s.entity_type.as_str()),
            pred_tag,
        );
        let gold_tr = transition(
            self.open_gold.as_ref().map(|s| s.entity_type.as_str()),
            gold_tag,
        );
        let closed_pred = match pred_tr {
            SpanTransition::Continue => None,
            _ => self.open_pred.take(),
        };
        let closed_gold = match gold_tr {
            SpanTransition::Continue => None,
            _ => self.open_gold.take(),
        };
        self.close(closed_pred, closed_gold);

        if pred_tr == SpanTransition::Open {
            let ty = pred_tag.entity_type().unwrap_or_default().to_string();
            if self.mode == MatchMode::Partial {
                self.pending.push(PendingSpan {
                    start: self.pos,
                    end: None,
                    entity_type: ty.clone(),
                });
            }
            self.open_pred = Some(OpenSpan {
                start: self.pos,
                entity_type: ty,
            });
        }
        if gold_tr == SpanTransition::Open {
            self.open_gold = Some(OpenSpan {
                start: self.pos,
                entity_type: gold_tag.entity_type().unwrap_or_default().to_string(),
            });
        }
        self.prune();
        self.pos += 1;
        delta(before, self.counts)
    }

    /// Closes whatever is still open and returns the final counts.
    pub fn finish(mut self) -> MatchCounts {
        let p = self.open_pred.take();
        let g = self.open_gold.take();
        self.close(p, g);
        self.counts
    }

    fn close(&mut self, pred: Option<OpenSpan>, gold: Option<OpenSpan>) {
        let last = self.pos.wrapping_sub(1);
        if let Some(p) = &pred {
            self.counts.n_pred += 1;
            if let Some(entry) = self.pending.iter_mut().find(|e| e.start == p.start) {
                entry.end = Some(last);
            }
        }
        let Some(g) = gold else { return };
        self.counts.n_gold += 1;
        match self.mode {
            MatchMode::Exact => {
                if pred.as_ref() == Some(&g) {
                    self.counts.matched += 1;
                }
            }
            MatchMode::Partial => {
                // Every predicted span overlapping [g.start, last] has already
                // started; pick the leftmost unmatched one of the same type.
                let hit = self.pending.iter().position(|e| {
                    e.entity_type == g.entity_type
                        && e.start <= last
                        && e.end.is_none_or(|end| end >= g.start)
                });
                if let Some(i) = hit {
                    self.pending.remove(i);
                    self.counts.matched += 1;
                }
            }
        }
    }

    fn prune(&mut self) {
        if self.mode != MatchMode::Partial {
            return;
        }
        let horizon = self.open_gold.as_ref().map_or(self.pos + 1, |g| g.start);
        self.pending
            .retain(|e| e.end.is_none_or(|end| end >= horizon));
    }
}

fn delta(before: MatchCounts, after: MatchCounts) -> MatchCounts {
    MatchCounts {
        matched: after.matched - before.matched,
        n_pred: after.n_pred - before.n_pred,
        n_gold: after.n_gold - before.n_gold,
    }
}

/// Functional form of [`IncrementalSpanState::step`].
pub fn incremental_span_step(
    mut state: IncrementalSpanState,
    pred_tag: &Tag,
    gold_tag: &Tag,
) -> IncrementalSpanState {
    state.step(pred_tag, gold_tag);
    state
}

/// Folds the incremental scorer over a whole aligned pair.
pub fn fold_span_counts(pred: &[Tag], gold: &[Tag], mode: MatchMode) -> Result<MatchCounts> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let mut state = IncrementalSpanState::new(mode);
    for (p, g) in pred.iter().zip(gold) {
        state.step(p, g);
    }
    Ok(state.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::parse_tags;
    use proptest::prelude::*;

    fn tags(s: &str) -> Vec<Tag> {
        parse_tags(s).unwrap()
    }

    #[test]
    fn identity_scores_one() {
        let g = tags("B-LOC I-LOC O");
        for mode in [MatchMode::Exact, MatchMode::Partial] {
            let (s, c) = span_f1(&g, &g, mode).unwrap();
            assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
            assert_eq!(c.matched, 1);
        }
    }

    #[test]
    fn truncated_span_only_credited_in_partial_mode() {
        let pred = tags("B-LOC O O");
        let gold = tags("B-LOC I-LOC O");
        assert_eq!(span_f1(&pred, &gold, MatchMode::Exact).unwrap().0.f1, 0.0);
        assert_eq!(span_f1(&pred, &gold, MatchMode::Partial).unwrap().0.f1, 1.0);
    }

    #[test]
    fn type_mismatch_never_matches() {
        let pred = tags("B-PER");
        let gold = tags("B-LOC");
        for mode in [MatchMode::Exact, MatchMode::Partial] {
            assert_eq!(span_f1(&pred, &gold, mode).unwrap().0.f1, 0.0);
        }
    }

    #[test]
    fn empty_sides() {
        let o = tags("O O");
        let (s, _) = span_f1(&o, &o, MatchMode::Exact).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));

        let (s, c) = span_f1(&o, &tags("B-LOC O"), MatchMode::Partial).unwrap();
        assert_eq!(
            c,
            MatchCounts {
                matched: 0,
                n_pred: 0,
                n_gold: 1
            }
        );
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));

        let (s, _) = span_f1(&tags("B-LOC O"), &o, MatchMode::Partial).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));

        let (s, _) = span_f1(&[], &[], MatchMode::Exact).unwrap();
        assert_eq!(s.f1, 1.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            span_f1(&tags("O"), &tags("O O"), MatchMode::Exact),
            Err(Error::LengthMismatch { pred: 1, gold: 2 })
        ));
    }

    #[test]
    fn partial_matching_is_one_to_one() {
        // One long predicted span covering two gold spans earns one match.
        let pred = tags("B-LOC I-LOC I-LOC");
        let gold = tags("B-LOC O B-LOC");
        let (_, c) = span_f1(&pred, &gold, MatchMode::Partial).unwrap();
        assert_eq!(
            c,
            MatchCounts {
                matched: 1,
                n_pred: 1,
                n_gold: 2
            }
        );

        // Two predicted fragments of one gold span: one match, one false positive.
        let pred = tags("B-LOC O B-LOC");
        let gold = tags("B-LOC I-LOC I-LOC");
        let (_, c) = span_f1(&pred, &gold, MatchMode::Partial).unwrap();
        assert_eq!(
            c,
            MatchCounts {
                matched: 1,
                n_pred: 2,
                n_gold: 1
            }
        );
    }

    #[test]
    fn partial_greedy_takes_leftmost_pred() {
        // gold spans (0,1) and (2,3); pred (1,2) overlaps both and goes to the first.
        let pred = tags("O B-LOC I-LOC O");
        let gold = tags("B-LOC I-LOC B-LOC I-LOC");
        let (_, c) = span_f1(&pred, &gold, MatchMode::Partial).unwrap();
        assert_eq!(c.matched, 1);
    }

    #[test]
    fn fold_examples() {
        assert_eq!(
            fold_span_counts(&[], &[], MatchMode::Partial).unwrap(),
            MatchCounts::default()
        );
        let g = tags("B-LOC O");
        for mode in [MatchMode::Exact, MatchMode::Partial] {
            assert_eq!(
                fold_span_counts(&g, &g, mode).unwrap(),
                MatchCounts {
                    matched: 1,
                    n_pred: 1,
                    n_gold: 1
                }
            );
        }
    }

    #[test]
    fn step_deltas_sum_to_total() {
        let pred = tags("B-LOC I-LOC O B-PER I-LOC");
        let gold = tags("B-LOC O B-PER I-PER I-PER");
        let mut state = IncrementalSpanState::new(MatchMode::Partial);
        let mut sum = MatchCounts::default();
        for (p, g) in pred.iter().zip(&gold) {
            sum += state.step(p, g);
        }
        assert_eq!(state.counts(), sum);
        let total = state.finish();
        assert_eq!(
            total,
            span_counts(&pred, &gold, MatchMode::Partial).unwrap()
        );
    }

    fn arb_tag() -> impl Strategy<Value = Tag> {
        prop_oneof![
            Just(Tag::Outside),
            Just(Tag::begin("LOC")),
            Just(Tag::inside("LOC")),
            Just(Tag::begin("PER")),
            Just(Tag::inside("PER")),
        ]
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<Tag>, Vec<Tag>)> {
        (0usize..12).prop_flat_map(|n| {
            (
                prop::collection::vec(arb_tag(), n),
                prop::collection::vec(arb_tag(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn fold_equals_batch((pred, gold) in arb_pair()) {
            for mode in [MatchMode::Exact, MatchMode::Partial] {
                prop_assert_eq!(
                    fold_span_counts(&pred, &gold, mode).unwrap(),
                    span_counts(&pred, &gold, mode).unwrap()
                );
            }
        }

        #[test]
        fn partial_dominates_exact((pred, gold) in arb_pair()) {
            let (se, ce) = span_f1(&pred, &gold, MatchMode::Exact).unwrap();
            let (sp, cp) = span_f1(&pred, &gold, MatchMode::Partial).unwrap();
            prop_assert!(cp.matched >= ce.matched);
            prop_assert!(sp.f1 >= se.f1);
            prop_assert!(cp.matched <= cp.n_pred.min(cp.n_gold));
        }
    }
}
