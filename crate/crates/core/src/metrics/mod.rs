//! Reference implementations of every metric the oracles optimize.

mod edit;
mod ngram;
mod span;

pub use edit::{edit_charts, levenshtein, wer, EditCharts, WerScore};
pub use ngram::{
    bleu4, bleu_from_counts, lcs_len, rouge_from_counts, rouge_l, rouge_n, NGramCounts, BLEU_ORDER,
};
pub use span::{
    fold_span_counts, incremental_span_step, match_spans, span_counts, span_f1,
    IncrementalSpanState, MatchCounts, MatchMode,
};

/// Absolute tolerance used wherever two scores are compared for a tie.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreTriple {
    pub fn perfect() -> Self {
        ScoreTriple {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        }
    }

    pub fn zero() -> Self {
        ScoreTriple {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        }
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        ScoreTriple {
            precision,
            recall,
            f1,
        }
    }

    /// 0/0 ratios are taken as 0.
    pub fn from_counts(overlap: usize, hyp_total: usize, ref_total: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        Self::from_pr(ratio(overlap, hyp_total), ratio(overlap, ref_total))
    }
}
