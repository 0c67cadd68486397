import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochbayes.bitstream import (StochasticNumber, correlation_matrix, estimate_probability,
                                  pair_counts, pearson, read_text_streams, scc)
from stochbayes.errors import InvalidInputError, UndefinedCorrelationError

bitlists = st.lists(st.booleans(), min_size=1, max_size=300)


def test_value_is_fraction_of_ones():
    assert StochasticNumber([1, 0, 1, 1]).value == 0.75
    assert estimate_probability(StochasticNumber([0, 0])) == 0.0


def test_rejects_non_binary_and_2d():
    with pytest.raises(InvalidInputError):
        StochasticNumber([0, 2])
    with pytest.raises(InvalidInputError):
        StochasticNumber(np.zeros((2, 2)))


def test_bits_are_read_only():
    sn = StochasticNumber([1, 0])
    with pytest.raises(ValueError):
        sn.bits[0] = False


@given(bitlists)
def test_text_round_trip(bits):
    sn = StochasticNumber(bits)
    assert StochasticNumber.from_text(sn.to_text()) == sn


@given(bitlists)
def test_binary_round_trip(bits):
    sn = StochasticNumber(bits)
    assert StochasticNumber.from_bytes(sn.to_bytes()) == sn


def test_binary_layout_is_lsb_first_with_u64_header():
    data = StochasticNumber([1, 0, 0, 0, 0, 0, 0, 0, 1]).to_bytes()
    assert data[:8] == (9).to_bytes(8, "little")
    assert data[8:] == bytes([0b00000001, 0b00000001])


def test_truncated_binary_rejected():
    with pytest.raises(InvalidInputError):
        StochasticNumber.from_bytes(b"\x01\x00")
    with pytest.raises(InvalidInputError):
        StochasticNumber.from_bytes((100).to_bytes(8, "little") + b"\x00")


def test_text_rejects_other_characters():
    with pytest.raises(InvalidInputError):
        StochasticNumber.from_text("0120")


def test_read_text_streams_skips_blank_lines():
    out = read_text_streams("0101\n\n1100\n")
    assert [s.to_text() for s in out] == ["0101", "1100"]


def test_pair_counts_and_length_mismatch():
    x = StochasticNumber([1, 1, 0, 0])
    y = StochasticNumber([1, 0, 1, 0])
    c = pair_counts(x, y)
    assert (c.n11, c.n10, c.n01, c.n00, c.total) == (1, 1, 1, 1, 4)
    with pytest.raises(InvalidInputError):
        pair_counts(x, StochasticNumber([1]))


def test_identical_and_complement_extremes():
    x = StochasticNumber([1, 1, 0, 1, 0, 0, 1, 0])
    nx = StochasticNumber(~x.bits)
    assert pearson(x, x) == 1.0 and scc(x, x) == 1.0
    assert pearson(x, nx) == -1.0 and scc(x, nx) == -1.0


def test_nested_streams_have_unit_scc():
    # the smaller stream is a subset of the larger one
    x = StochasticNumber([1, 1, 1, 0, 0, 0, 0, 0])
    y = StochasticNumber([1, 1, 1, 1, 1, 1, 0, 0])
    assert scc(x, y) == 1.0
    assert pearson(x, y) < 1.0


def test_disjoint_streams_have_minus_one_scc():
    x = StochasticNumber([1, 1, 0, 0, 0, 0])
    y = StochasticNumber([0, 0, 1, 1, 0, 0])
    assert scc(x, y) == -1.0


def test_constant_stream_is_undefined():
    x = StochasticNumber([1, 1, 1])
    y = StochasticNumber([1, 0, 1])
    with pytest.raises(UndefinedCorrelationError):
        pearson(x, y)
    with pytest.raises(UndefinedCorrelationError):
        scc(x, y)


@given(bitlists, st.randoms(use_true_random=False))
def test_scc_bounded_and_symmetric(bits, rnd):
    x = StochasticNumber(bits)
    y = StochasticNumber([rnd.random() < 0.5 for _ in bits])
    try:
        v = scc(x, y)
    except UndefinedCorrelationError:
        return
    assert -1.0 - 1e-12 <= v <= 1.0 + 1e-12
    assert v == pytest.approx(scc(y, x))


def test_correlation_matrix_pairs_and_undefined():
    m = correlation_matrix({"a": StochasticNumber([1, 0]), "b": StochasticNumber([1, 1]),
                            "c": StochasticNumber([0, 1])})
    assert [(e.x, e.y) for e in m] == [("a", "b"), ("a", "c"), ("b", "c")]
    assert m[0].scc is None and m[0].pearson is None
    assert m[1].scc == -1.0
