//! Dynamic oracles for sequence supervision.
//!
//! Given a gold sequence and a prefix that may contain the model's own
//! mistakes, an oracle returns the next token of the completion that
//! maximizes a chosen metric. Exact oracles cover span F1 (exact and
//! partial match) and word error rate; a beam-search oracle approximates
//! ROUGE-2 and BLEU-4.

pub mod bench;
pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod refcheck;
pub mod seq;
pub mod sim;

pub use error::{Error, Result};
