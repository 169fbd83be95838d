use crate::seq::Token;

/// Edit-distance charts for a fed sequence `S` against a gold sequence `G`.
///
/// `dp_wer[i][j]` is the Levenshtein distance between `S[..i]` and `G[..j]`.
/// `dp_do[i][j]` is the best distance between `S[..i-1]` extended by one
/// freely chosen token and `G[..j]`, so `dp_do` has one more row than
/// `dp_wer`: row `i` in `1..=|S|+1` is the chart consulted for the label
/// after feeding `i - 1` tokens. Row 0 and column 0 hold the start-token
/// initialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditCharts {
    pub dp_wer: Vec<Vec<u32>>,
    pub dp_do: Vec<Vec<u32>>,
    pub fed: Vec<Token>,
    pub gold: Vec<Token>,
}

impl EditCharts {
    /// Final edit distance between the whole fed sequence and the gold.
    pub fn distance(&self) -> u32 {
        self.dp_wer[self.fed.len()][self.gold.len()]
    }
}

pub fn edit_charts(fed: &[Token], gold: &[Token]) -> EditCharts {
    let (n, m) = (fed.len(), gold.len());

    let mut dp_wer = vec![vec![0u32; m + 1]; n + 1];
    for (j, cell) in dp_wer[0].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n {
        dp_wer[i][0] = i as u32;
        for j in 1..=m {
            let penalty = u32::from(fed[i - 1] != gold[j - 1]);
            dp_wer[i][j] = (dp_wer[i - 1][j - 1] + penalty)
                .min(dp_wer[i - 1][j] + 1)
                .min(dp_wer[i][j - 1] + 1);
        }
    }

    let mut dp_do = vec![vec![0u32; m + 1]; n + 2];
    for (j, cell) in dp_do[0].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n + 1 {
        dp_do[i][0] = i as u32;
        for j in 1..=m {
            // The chosen token always equals G[j], so the diagonal is free.
            dp_do[i][j] = dp_wer[i - 1][j - 1]
                .min(dp_wer[i - 1][j] + 1)
                .min(dp_do[i][j - 1] + 1);
        }
    }

    EditCharts {
        dp_wer,
        dp_do,
        fed: fed.to_vec(),
        gold: gold.to_vec(),
    }
}

/// Two-row Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WerScore {
    pub distance: usize,
    /// `None` when the reference is empty but the hypothesis is not.
    pub rate: Option<f64>,
}

/// Word error rate of `hyp` against `reference`, normalized by reference length.
pub fn wer(hyp: &[Token], reference: &[Token]) -> WerScore {
    let distance = levenshtein(hyp, reference);
    let rate = match (reference.len(), distance) {
        (0, 0) => Some(0.0),
        (0, _) => None,
        (n, d) => Some(d as f64 / n as f64),
    };
    WerScore { distance, rate }
}
