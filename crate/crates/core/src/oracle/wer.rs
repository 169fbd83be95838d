use crate::metrics::{edit_charts, EditCharts};
use crate::seq::Token;

use super::Label;

/// One label per supervision step: step `i` (1-based) is the label after
/// feeding the first `i - 1` tokens, so there are `|S| + 1` labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WerOracleOutput {
    pub labels: Vec<Label>,
}

/// Label at step `i` (1-based) of the charts.
///
/// Candidates are the gold columns `1..=|G|` of `dp_do[i]` plus a virtual
/// column `|G|+1` standing for End, whose value is the cost of stopping
/// now. Column 0 is never a minimum when `G` is non-empty and is skipped.
/// Ties prefer the diagonal column `i`, then the largest column.
fn step_label(charts: &EditCharts, i: usize) -> Label {
    let gold = &charts.gold;
    let m = gold.len();
    let row = &charts.dp_do[i];
    // Extending the recurrence one column with an End "gold token".
    let end_value = charts.dp_wer[i - 1][m].min(row[m] + 1);
    let best = row[1..].iter().copied().fold(end_value, u32::min);

    if i <= m && row[i] == best {
        return Label::Token(gold[i - 1]);
    }
    if end_value == best {
        return Label::End;
    }
    let idx = (1..=m)
        .rev()
        .find(|&j| row[j] == best)
        .expect("minimum is attained");
    Label::Token(gold[idx - 1])
}

pub fn wer_oracle(gold: &[Token], fed: &[Token]) -> WerOracleOutput {
    let charts = edit_charts(fed, gold);
    let mut labels = Vec::with_capacity(fed.len() + 1);
    let mut ended = false;
    for i in 1..=fed.len() + 1 {
        // A sequence that has ended stays ended.
        let label = if ended {
            Label::End
        } else {
            step_label(&charts, i)
        };
        ended |= label.is_end();
        labels.push(label);
    }
    WerOracleOutput { labels }
}

/// Label for the step right after `prefix`.
pub fn wer_next(gold: &[Token], prefix: &[Token]) -> Label {
    let charts = edit_charts(prefix, gold);
    step_label(&charts, prefix.len() + 1)
}

/// Follows [`wer_next`] from `prefix` until End and returns the appended tokens.
pub fn wer_rollout(gold: &[Token], prefix: &[Token]) -> Vec<Token> {
    let mut seq = prefix.to_vec();
    // Each step either moves the argmin column right or ends; the bound is
    // never reached in practice.
    let limit = prefix.len() + 2 * gold.len() + 2;
    while seq.len() < limit {
        match wer_next(gold, &seq) {
            Label::Token(t) => seq.push(t),
            Label::End => break,
        }
    }
    seq.split_off(prefix.len())
}
