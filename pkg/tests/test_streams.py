import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dmtradeoff import streams


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    start=st.integers(0, 10**9),
    count=st.integers(1, 20),
    size=st.integers(1, 9),
)
def test_trial_rows_do_not_depend_on_chunking(seed, start, count, size):
    block = streams.complex_normals(seed, 0, start, count, size)
    for k in range(count):
        single = streams.complex_normals(seed, 0, start + k, 1, size)
        assert np.array_equal(block[k], single[0])


def test_repeat_call_is_bitwise_identical():
    a = streams.complex_normals(7, streams.CHANNEL, 3, 100, 5)
    b = streams.complex_normals(7, streams.CHANNEL, 3, 100, 5)
    assert np.array_equal(a, b)


def test_streams_and_seeds_differ():
    a = streams.complex_normals(7, streams.CHANNEL, 0, 10, 4)
    assert not np.array_equal(a, streams.complex_normals(7, streams.REDUCED, 0, 10, 4))
    assert not np.array_equal(a, streams.complex_normals(8, streams.CHANNEL, 0, 10, 4))


def test_complex_normal_moments():
    z = streams.complex_normals(1, 0, 0, 200_000, 2).ravel()
    n = z.size
    assert abs(np.mean(np.abs(z) ** 2) - 1) < 5 / np.sqrt(n)
    assert abs(np.mean(z)) < 5 / np.sqrt(n)
    # circular symmetry: E[z^2] = 0, real and imaginary parts have variance 1/2
    assert abs(np.mean(z * z)) < 5 / np.sqrt(n)
    assert np.var(z.real) == pytest.approx(0.5, abs=0.01)


def test_power_is_exponential():
    p = np.abs(streams.complex_normals(2, 0, 0, 100_000, 1).ravel()) ** 2
    # P(|z|^2 < x) = 1 - exp(-x)
    for x in (0.01, 0.5, 2.0):
        expected = 1 - np.exp(-x)
        sd = np.sqrt(expected * (1 - expected) / p.size)
        assert abs(np.mean(p < x) - expected) < 4 * sd


def test_seed_range_checked():
    with pytest.raises(ValueError):
        streams.complex_normals(-1, 0, 0, 1, 1)
    with pytest.raises(ValueError):
        streams.complex_normals(2**64, 0, 0, 1, 1)


def test_chunk_bounds_cover_range():
    assert streams.chunk_bounds(10, 4) == [(0, 4), (4, 4), (8, 2)]
    assert streams.chunk_bounds(0, 4) == []
