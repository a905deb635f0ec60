import cmath
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dmtradeoff.channel_model import (
    AntennaConfig,
    InvalidCorrelationError,
    PowerDelayProfile,
    build_covariance_from_correlation,
    build_covariance_from_pdp,
    covariance_rank,
    jensen_channel,
    pdp_correlation,
    sample_channel,
    sample_channels,
    sample_reduced_batch,
    sample_reduced_iid,
)


def dft_correlation_oracle(variances, N):
    """r(m) by explicit summation, one lag at a time."""
    return [
        sum(s * cmath.exp(-2j * cmath.pi * l * m / N) for l, s in enumerate(variances))
        for m in range(N)
    ]


def toeplitz_oracle(r):
    N = len(r)
    R = np.empty((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            R[i, j] = r[i - j] if i >= j else np.conj(r[j - i])
    return R


pdp_strategy = st.lists(st.floats(0.01, 10.0), min_size=1, max_size=6)


# --- antenna config ---------------------------------------------------------

@given(st.integers(1, 8), st.integers(1, 8))
def test_antenna_min_max(m_t, m_r):
    a = AntennaConfig(m_t, m_r)
    assert a.m_min <= a.m_max
    assert a.m_min * a.m_max == m_t * m_r


@pytest.mark.parametrize("m_t,m_r", [(0, 1), (1, 0), (1.5, 2)])
def test_antenna_rejects_bad_counts(m_t, m_r):
    with pytest.raises(ValueError):
        AntennaConfig(m_t, m_r)


# --- covariance from correlation -----------------------------------------------

def test_uncorrelated_slots_give_identity():
    cov = build_covariance_from_correlation([1, 0], 2)
    assert np.allclose(cov.R, np.eye(2))
    assert cov.rank == 2


def test_fully_correlated_slots():
    cov = build_covariance_from_correlation([1, 1, 1, 1], 4)
    assert np.allclose(cov.R, np.ones((4, 4)))
    assert cov.rank == 1
    assert np.allclose(cov.eigenvalues, [0, 0, 0, 4])


def test_pdp_correlation_vector_example():
    r = dft_correlation_oracle([0.5, 0.5], 4)
    assert r[1] == pytest.approx(0.5 - 0.5j)
    cov = build_covariance_from_correlation(r, 4)
    R = toeplitz_oracle(r)
    assert np.allclose(cov.R, R)
    oracle_rank = int(np.sum(np.linalg.eigvalsh(R) > 1e-9))
    assert oracle_rank == 2
    assert cov.rank == 2


def test_correlation_rescaled_by_r0():
    cov = build_covariance_from_correlation([2.0, 1.0, 0.0], 3)
    assert cov.scale == 2.0
    assert np.allclose(np.diag(cov.R), 1.0)
    assert cov.R[1, 0] == pytest.approx(0.5)


def test_correlation_rejects_non_psd():
    with pytest.raises(InvalidCorrelationError):
        build_covariance_from_correlation([1, 2], 2)


def test_correlation_rejects_bad_r0():
    with pytest.raises(InvalidCorrelationError):
        build_covariance_from_correlation([0, 0.1], 2)
    with pytest.raises(InvalidCorrelationError):
        build_covariance_from_correlation([1j, 0], 2)


def test_correlation_length_must_match():
    with pytest.raises(ValueError):
        build_covariance_from_correlation([1, 0, 0], 2)


# --- covariance from PDP -------------------------------------------------------

def test_flat_fading_pdp():
    cov = build_covariance_from_pdp(PowerDelayProfile((1.0,)), 4)
    assert np.allclose(cov.R, np.ones((4, 4)))
    assert cov.rank == 1


def test_two_taps_two_tones_identity():
    # r(1) = 0.5 (1 + e^{-j pi}) = 0
    cov = build_covariance_from_pdp(PowerDelayProfile((0.5, 0.5)), 2)
    assert np.allclose(cov.R, np.eye(2), atol=1e-15)
    assert cov.rank == 2


def test_rank_equals_tap_count():
    cov = build_covariance_from_pdp(PowerDelayProfile((0.25,) * 4), 8)
    assert cov.rank == 4


def test_pdp_rejects_more_taps_than_tones():
    with pytest.raises(ValueError):
        build_covariance_from_pdp(PowerDelayProfile((0.5, 0.5, 0.0)), 2)


def test_pdp_rejects_all_zero():
    with pytest.raises(ValueError):
        PowerDelayProfile((0.0, 0.0))


def test_pdp_normalizes_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        cov = build_covariance_from_pdp(PowerDelayProfile((2.0, 2.0)), 4)
    assert "normalizing" in caplog.text
    assert np.allclose(np.diag(cov.R), 1.0)


def test_pdp_zero_tap_lowers_rank():
    cov = build_covariance_from_pdp(PowerDelayProfile((0.5, 0.0, 0.5)), 6)
    assert cov.rank == 2


@settings(max_examples=60, deadline=None)
@given(pdp_strategy, st.integers(0, 6))
def test_pdp_matches_correlation_route(variances, extra):
    N = len(variances) + extra
    pdp = PowerDelayProfile(tuple(variances)).normalized()
    via_pdp = build_covariance_from_pdp(pdp, N)
    via_corr = build_covariance_from_correlation(dft_correlation_oracle(pdp.variances, N), N)
    assert np.max(np.abs(via_pdp.R - via_corr.R)) < 1e-10
    # rank law for strictly positive taps
    assert via_pdp.rank == len(variances)
    assert covariance_rank(via_pdp.R) == len(variances)
    # Hermitian symmetry
    for cov in (via_pdp, via_corr):
        assert np.linalg.norm(cov.R - cov.R.conj().T) <= 1e-12 * np.linalg.norm(cov.R)


def test_pdp_correlation_helper_matches_oracle():
    pdp = PowerDelayProfile((0.7, 0.3))
    assert np.allclose(pdp_correlation(pdp, 4), dft_correlation_oracle(pdp.variances, 4))


def test_eigen_summary_fields():
    cov = build_covariance_from_pdp(PowerDelayProfile((0.7, 0.3)), 4)
    assert cov.lambda_max == pytest.approx(2.8)
    assert cov.lambda_min_nz == pytest.approx(1.2)
    assert np.allclose(cov.nonzero_eigenvalues, [2.8, 1.2])
    assert np.allclose(cov.sqrt @ cov.sqrt, cov.R)


# --- numerical rank ------------------------------------------------------------

def test_rank_identity_and_ones():
    assert covariance_rank(np.eye(3)) == 3
    assert covariance_rank(np.ones((3, 3))) == 1


def test_rank_drops_tiny_eigenvalue():
    # threshold 64 * 3 * eps ~ 4e-14, far above 1e-20
    assert covariance_rank(np.diag([1.0, 1e-20, 0.0])) == 1


def test_rank_of_zero_matrix():
    assert covariance_rank(np.zeros((3, 3))) == 0


# --- sampling ------------------------------------------------------------------

def test_identity_covariance_siso_statistics():
    cov = build_covariance_from_correlation([1, 0], 2)
    h = sample_channels(cov, AntennaConfig(1, 1), seed=3, start=0, count=100_000)[:, :, 0, 0]
    C = h.T @ h.conj() / h.shape[0]
    assert np.max(np.abs(C - np.eye(2))) < 0.05


def test_identity_covariance_entries_uncorrelated():
    trials = 100_000
    cov = build_covariance_from_correlation([1, 0, 0], 3)
    H = sample_channels(cov, AntennaConfig(2, 2), seed=4, start=0, count=trials)
    x = H.reshape(trials, -1)
    C = x.T @ x.conj() / trials
    d = np.sqrt(np.real(np.diag(C)))
    corr = np.abs(C / np.outer(d, d))
    off = corr[~np.eye(corr.shape[0], dtype=bool)]
    assert np.all(off < 4 / np.sqrt(trials))


def test_correlated_sampling_reproduces_covariance():
    cov = build_covariance_from_pdp(PowerDelayProfile((0.7, 0.3)), 4)
    h = sample_channels(cov, AntennaConfig(1, 1), seed=5, start=0, count=200_000)[:, :, 0, 0]
    C = h.T @ h.conj() / h.shape[0]
    assert np.max(np.abs(C - cov.R)) < 0.03


def test_rank_one_channel_identical_slots():
    cov = build_covariance_from_correlation([1, 1, 1], 3)
    re = sample_channel(cov, AntennaConfig(2, 3), seed=1, trial_index=17)
    for n in range(1, 3):
        assert np.allclose(re.slots[n], re.slots[0], atol=1e-12)


def test_sample_channel_deterministic_and_consistent_with_batch():
    cov = build_covariance_from_pdp(PowerDelayProfile((0.5, 0.5)), 4)
    ant = AntennaConfig(2, 1)
    a = sample_channel(cov, ant, 11, 42).slots
    b = sample_channel(cov, ant, 11, 42).slots
    batch = sample_channels(cov, ant, 11, 40, 5)
    assert np.array_equal(a, b)
    assert np.array_equal(batch[2], a)
    assert a.shape == (4, 1, 2)


# --- Jensen channel ------------------------------------------------------------

def test_jensen_channel_wide_case():
    cov = build_covariance_from_correlation([1, 0], 2)
    ant = AntennaConfig(2, 1)
    re = sample_channel(cov, ant, 0, 0)
    H = jensen_channel(re, ant).matrix
    assert H.shape == (1, 4)
    assert np.array_equal(H, np.hstack([re.slots[0], re.slots[1]]))


def test_jensen_channel_tall_case_uses_conjugate_transpose():
    cov = build_covariance_from_correlation([1, 0], 2)
    ant = AntennaConfig(1, 2)
    re = sample_channel(cov, ant, 0, 0)
    H = jensen_channel(re, ant).matrix
    assert H.shape == (1, 4)
    assert np.array_equal(H, np.hstack([re.slots[0].conj().T, re.slots[1].conj().T]))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_jensen_channel_single_slot(m):
    cov = build_covariance_from_correlation([1], 1)
    ant = AntennaConfig(m, m)
    re = sample_channel(cov, ant, 2, 5)
    assert np.array_equal(jensen_channel(re, ant).matrix, re.slots[0])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 4))
def test_jensen_channel_shape(m_t, m_r, N):
    ant = AntennaConfig(m_t, m_r)
    cov = build_covariance_from_correlation([1] + [0] * (N - 1), N)
    H = jensen_channel(sample_channel(cov, ant, 0, 0), ant).matrix
    assert H.shape == (ant.m_min, N * ant.m_max)


# --- reduced channel -----------------------------------------------------------

def test_reduced_scalar_power():
    z = sample_reduced_batch(1, AntennaConfig(1, 1), 9, 0, 100_000)
    assert abs(np.mean(np.abs(z) ** 2) - 1) < 0.02


def test_reduced_shape_and_determinism():
    ant = AntennaConfig(2, 1)
    a = sample_reduced_iid(2, ant, 1, 3)
    assert a.shape == (1, 4)
    assert np.array_equal(a, sample_reduced_iid(2, ant, 1, 3))
    assert np.array_equal(a, sample_reduced_batch(2, ant, 1, 0, 5)[3])


def test_reduced_rejects_zero_rank():
    with pytest.raises(ValueError):
        sample_reduced_iid(0, AntennaConfig(1, 1), 0, 0)
