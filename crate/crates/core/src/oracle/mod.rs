//! Dynamic oracles: given a possibly erroneous prefix and the gold sequence,
//! return the next token of a metric-optimal completion.

mod beam;
mod cache;
mod tags;
mod wer;

use std::fmt;

use crate::seq::Token;

pub use beam::{
    beam_oracle_next, beam_oracle_next_naive, gold_candidates, select_supervision, BeamConfig,
    BeamOutcome, ScoreFn, SupervisionChoice, SupervisionSource,
};
pub use cache::{cached_extend, BeamEntry, GoldIndex};
pub use tags::{complete_tags, exact_f1_next_tag, partial_f1_next_tag, TagOracle, TagStepContext};
pub use wer::{wer_next, wer_oracle, wer_rollout, WerOracleOutput};

/// One supervision label: a token, or the end of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Token(Token),
    End,
}

impl Label {
    pub fn token(self) -> Option<Token> {
        match self {
            Label::Token(t) => Some(t),
            Label::End => None,
        }
    }

    pub fn is_end(self) -> bool {
        matches!(self, Label::End)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Token(t) => write!(f, "{}", t.0),
            Label::End => f.write_str("<End>"),
        }
    }
}
