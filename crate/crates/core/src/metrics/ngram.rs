use std::collections::HashMap;

use crate::seq::Token;

use super::ScoreTriple;

pub const BLEU_ORDER: usize = 4;

/// Per-order n-gram multisets of one sequence, orders `1..=max_order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts {
    orders: Vec<HashMap<Vec<Token>, usize>>,
}

impl NGramCounts {
    pub fn new(seq: &[Token], max_order: usize) -> Self {
        let orders = (1..=max_order)
            .map(|n| {
                let mut counts = HashMap::new();
                if seq.len() >= n {
                    for gram in seq.windows(n) {
                        *counts.entry(gram.to_vec()).or_insert(0) += 1;
                    }
                }
                counts
            })
            .collect();
        NGramCounts { orders }
    }

    pub fn max_order(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self, n: usize) -> &HashMap<Vec<Token>, usize> {
        &self.orders[n - 1]
    }

    pub fn total(&self, n: usize) -> usize {
        self.order(n).values().sum()
    }

    /// Sum over n-grams of `min(self count, reference count)`.
    pub fn clipped_overlap(&self, reference: &NGramCounts, n: usize) -> usize {
        let theirs = reference.order(n);
        self.order(n)
            .iter()
            .map(|(gram, &c)| c.min(theirs.get(gram).copied().unwrap_or(0)))
            .sum()
    }
}

/// ROUGE-N from clipped overlap and n-gram totals. When neither side has
/// any n-gram of this order the pair is treated as identical.
pub fn rouge_from_counts(overlap: usize, hyp_total: usize, ref_total: usize) -> ScoreTriple {
    if hyp_total == 0 && ref_total == 0 {
        return ScoreTriple::perfect();
    }
    ScoreTriple::from_counts(overlap, hyp_total, ref_total)
}

pub fn rouge_n(hyp: &[Token], reference: &[Token], n: usize) -> ScoreTriple {
    assert!(n >= 1, "ROUGE-N needs n >= 1");
    let h = NGramCounts::new(hyp, n);
    let r = NGramCounts::new(reference, n);
    rouge_from_counts(h.clipped_overlap(&r, n), h.total(n), r.total(n))
}

pub fn lcs_len(a: &[Token], b: &[Token]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// ROUGE-L with beta = 1.
pub fn rouge_l(hyp: &[Token], reference: &[Token]) -> ScoreTriple {
    if hyp.is_empty() && reference.is_empty() {
        return ScoreTriple::perfect();
    }
    ScoreTriple::from_counts(lcs_len(hyp, reference), hyp.len(), reference.len())
}

/// Sentence BLEU-4 from clipped overlaps and hypothesis n-gram totals.
///
/// Any order whose overlap or total is zero is smoothed to
/// `(overlap + 1) / (total + 1)`. The incremental beam cache calls this same
/// function, so both routes agree bit for bit.
pub fn bleu_from_counts(
    overlaps: &[usize; BLEU_ORDER],
    totals: &[usize; BLEU_ORDER],
    hyp_len: usize,
    ref_len: usize,
) -> f64 {
    if hyp_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for (&o, &t) in overlaps.iter().zip(totals) {
        let p = if o == 0 || t == 0 {
            (o as f64 + 1.0) / (t as f64 + 1.0)
        } else {
            o as f64 / t as f64
        };
        log_sum += p.ln();
    }
    let geo = (log_sum / BLEU_ORDER as f64).exp();
    let bp = if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    geo * bp
}

pub fn bleu4(hyp: &[Token], reference: &[Token]) -> f64 {
    let h = NGramCounts::new(hyp, BLEU_ORDER);
    let r = NGramCounts::new(reference, BLEU_ORDER);
    let mut overlaps = [0; BLEU_ORDER];
    let mut totals = [0; BLEU_ORDER];
    for n in 1..=BLEU_ORDER {
        overlaps[n - 1] = h.clipped_overlap(&r, n);
        totals[n - 1] = h.total(n);
    }
    bleu_from_counts(&overlaps, &totals, hyp.len(), reference.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<Token> {
        s.bytes().map(|b| Token(u32::from(b))).collect()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn ngram_mass_per_order() {
        let c = NGramCounts::new(&toks("abcab"), 4);
        assert_eq!(c.total(1), 5);
        assert_eq!(c.total(2), 4);
        assert_eq!(c.order(2)[&toks("ab")], 2);
        assert_eq!(c.total(4), 2);
        assert_eq!(NGramCounts::new(&toks("ab"), 4).total(3), 0);
    }

    #[test]
    fn rouge_n_examples() {
        let s = rouge_n(&toks("abcd"), &toks("abcd"), 2);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = rouge_n(&toks("ab"), &toks("cd"), 1);
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        let s = rouge_n(&toks("abc"), &toks("abd"), 2);
        assert!(close(s.precision, 0.5) && close(s.recall, 0.5) && close(s.f1, 0.5));
    }

    #[test]
    fn rouge_n_short_sequences() {
        assert_eq!(rouge_n(&toks("a"), &toks("b"), 2).f1, 1.0);
        assert_eq!(rouge_n(&[], &toks("ab"), 2).f1, 0.0);
        assert_eq!(rouge_n(&toks("ab"), &toks("a"), 2).f1, 0.0);
    }

    #[test]
    fn rouge_n_clips_repeats() {
        let s = rouge_n(&toks("aaaa"), &toks("ab"), 1);
        assert!(close(s.precision, 0.25) && close(s.recall, 0.5));
    }

    #[test]
    fn rouge_l_examples() {
        assert_eq!(rouge_l(&toks("abc"), &toks("abc")).f1, 1.0);
        let s = rouge_l(&toks("ac"), &toks("abc"));
        assert!(close(s.precision, 1.0) && close(s.recall, 2.0 / 3.0) && close(s.f1, 0.8));
        assert_eq!(rouge_l(&[], &toks("abc")), ScoreTriple::zero());
    }

    #[test]
    fn bleu_identity() {
        assert_eq!(bleu4(&toks("abcde"), &toks("abcde")), 1.0);
        assert_eq!(bleu4(&toks("abc"), &toks("abc")), 1.0);
        assert_eq!(bleu4(&[], &toks("abc")), 0.0);
    }

    #[test]
    fn bleu_short_hypothesis_closed_form() {
        // p1..p3 = 1, p4 smoothed to 1, BP = exp(1 - 4/3).
        let v = bleu4(&toks("abc"), &toks("abcd"));
        assert!((v - 0.716_531_310_573_789_3).abs() < 1e-9);
        assert!((v - (1.0f64 - 4.0 / 3.0).exp()).abs() < 1e-9);
    }

    #[test]
    fn bleu_zero_overlap_golden() {
        // Length 21, disjoint vocabularies: p_n = 1 / (23 - n) for n = 1..4,
        // so BLEU = (1 / (22*21*20*19))^(1/4).
        let hyp: Vec<Token> = (0..21).map(Token).collect();
        let reference: Vec<Token> = (100..121).map(Token).collect();
        let v = bleu4(&hyp, &reference);
        assert!((v - 0.048_853_266_442_119_28).abs() < 1e-12);
        assert!(v < 0.05);
    }

    fn arb_seq() -> impl Strategy<Value = Vec<Token>> {
        prop::collection::vec((0u32..5).prop_map(Token), 0..10)
    }

    proptest! {
        #[test]
        fn scores_in_unit_interval(h in arb_seq(), r in arb_seq()) {
            let b = bleu4(&h, &r);
            prop_assert!((0.0..=1.0).contains(&b));
            for n in 1..=4 {
                let s = rouge_n(&h, &r, n);
                for v in [s.precision, s.recall, s.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            let l = rouge_l(&h, &r);
            prop_assert!((0.0..=1.0).contains(&l.f1));
        }

        #[test]
        fn invariant_under_id_permutation(h in arb_seq(), r in arb_seq(), shift in 1u32..50) {
            // Any bijection on ids; here a reversal plus offset.
            let remap = |s: &[Token]| s.iter().map(|t| Token(shift + 10 - t.0)).collect::<Vec<_>>();
            prop_assert_eq!(bleu4(&h, &r), bleu4(&remap(&h), &remap(&r)));
            for n in 1..=4 {
                prop_assert_eq!(rouge_n(&h, &r, n), rouge_n(&remap(&h), &remap(&r), n));
            }
        }

        #[test]
        fn identity_rouge(h in prop::collection::vec((0u32..5).prop_map(Token), 2..10)) {
            prop_assert_eq!(rouge_n(&h, &h, 2).f1, 1.0);
            prop_assert_eq!(rouge_l(&h, &h).f1, 1.0);
        }
    }
}
