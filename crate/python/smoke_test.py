"""Smoke test for the `dynoracle` extension module.

Build and stage the module, then run this file:

    cargo build --release -p dynoracle-python --features extension-module
    cp target/release/libdynoracle_py.so python/dynoracle.so
    python3 python/smoke_test.py
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import dynoracle  # noqa: E402


def main():
    info = dynoracle.version_info()
    assert "0.1.0" in info and "bleu4" in info, info
    assert info == dynoracle.version_info()

    assert dynoracle.oracle_next_batch("bleu4", [], [], [], [], 10) == []

    # Item 0: gold prefix, so the next gold token. Item 1: complete, so End (= vocab_size).
    out = dynoracle.oracle_next_batch(
        "bleu4",
        [1, 2, 1, 2, 3, 4],
        [2, 4],
        [1, 2, 3, 4, 1, 2, 3, 4],
        [4, 4],
        10,
        beam_size=5,
        beam_length=2,
    )
    assert out == [3, 10], out

    # Tags: 0 = O, 1 = B-T0, 2 = I-T0. Gold B I O, prefix O.
    assert dynoracle.oracle_next_batch("f1-partial", [0], [1], [1, 2, 0], [3], 3) == [1]
    assert dynoracle.oracle_next_batch("wer", [1, 3], [2], [1, 2, 3], [3], 5) == [3]

    try:
        dynoracle.oracle_next_batch("wer", [1, 99], [1, 1], [1, 1], [1, 1], 10)
    except ValueError as e:
        assert "item 1" in str(e), e
    else:
        raise AssertionError("out-of-range id accepted")

    try:
        dynoracle.oracle_next_batch("meteor", [], [], [], [], 10)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown metric accepted")

    print("smoke test passed:", info)


if __name__ == "__main__":
    main()
