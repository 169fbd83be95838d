//! Python module `dynoracle`: batched dynamic-oracle supervision over flat
//! integer arrays.

pub mod batch;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

pub use batch::{oracle_next_batch, BatchError, BatchMetric, BatchRequest, METRICS};

pub fn version_text() -> String {
    format!(
        "dynoracle {} (metrics: {})",
        env!("CARGO_PKG_VERSION"),
        METRICS.join(", ")
    )
}

/// Next supervision id for each item. End is returned as `vocab_size`.
#[pyfunction(name = "oracle_next_batch")]
#[pyo3(signature = (metric, prefix_ids, prefix_lengths, gold_ids, gold_lengths, vocab_size, beam_size = 5, beam_length = 2))]
#[allow(clippy::too_many_arguments)]
fn py_oracle_next_batch(
    py: Python<'_>,
    metric: &str,
    prefix_ids: Vec<i64>,
    prefix_lengths: Vec<usize>,
    gold_ids: Vec<i64>,
    gold_lengths: Vec<usize>,
    vocab_size: usize,
    beam_size: usize,
    beam_length: usize,
) -> PyResult<Vec<i64>> {
    let metric = BatchMetric::parse(metric).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let req = BatchRequest {
        metric,
        prefix_ids: &prefix_ids,
        prefix_lengths: &prefix_lengths,
        gold_ids: &gold_ids,
        gold_lengths: &gold_lengths,
        vocab_size,
        beam_size,
        beam_length,
    };
    py.detach(|| oracle_next_batch(&req))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn version_info() -> String {
    version_text()
}

#[pymodule]
fn dynoracle(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(py_oracle_next_batch, m)?)?;
    m.add_function(wrap_pyfunction!(version_info, m)?)?;
    m.add("END_IS_VOCAB_SIZE", true)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_text_is_stable() {
        let v = version_text();
        assert!(v.contains("0.1.0") && v.contains("bleu4"));
        assert_eq!(v, version_text());
    }
}
