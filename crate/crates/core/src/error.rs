use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed tag {0:?}")]
    MalformedTag(String),

    #[error("sequence length mismatch: pred has {pred} items, gold has {gold}")]
    LengthMismatch { pred: usize, gold: usize },

    #[error("prefix of length {prefix} is longer than gold of length {gold}")]
    PrefixTooLong { prefix: usize, gold: usize },

    #[error("gold sequence is empty")]
    EmptyGold,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("enumeration of {size} completions exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line count mismatch: source has {source_lines} lines, target has {target_lines}")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}
