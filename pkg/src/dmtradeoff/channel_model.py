"""Selective-fading MIMO channel: slot covariances and correlated draws.

Each scalar subchannel ``H_n(i, j)`` follows the same correlation function
``r(m) = E[H_n(i,j) H_{n-m}(i,j)^*]`` across the ``N`` slots, and distinct
subchannels are independent. The ``N x N`` slot covariance is therefore a
Hermitian Toeplitz matrix, and ``vec(H)`` has covariance ``R (x) I``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from . import streams

log = logging.getLogger(__name__)

__all__ = [
    "AntennaConfig",
    "PowerDelayProfile",
    "CovarianceSpec",
    "ChannelRealization",
    "JensenChannel",
    "InvalidCorrelationError",
    "default_rank_tol",
    "covariance_rank",
    "build_covariance_from_correlation",
    "build_covariance_from_pdp",
    "pdp_correlation",
    "sample_channel",
    "sample_channels",
    "sample_whitened",
    "jensen_channel",
    "jensen_stack",
    "sample_reduced_iid",
    "sample_reduced_batch",
]

EPS = np.finfo(np.float64).eps
# eigenvalues below -PSD_TOL * lambda_max reject the correlation outright;
# anything between that and zero is rounding and gets clipped
PSD_TOL = 1e-8


class InvalidCorrelationError(ValueError):
    """The correlation data does not define a valid covariance."""


@dataclass(frozen=True)
class AntennaConfig:
    m_t: int
    m_r: int

    def __post_init__(self):
        for name in ("m_t", "m_r"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def m_min(self):
        return min(self.m_t, self.m_r)

    @property
    def m_max(self):
        return max(self.m_t, self.m_r)


@dataclass(frozen=True)
class PowerDelayProfile:
    """Per-tap variances of a frequency-selective channel."""

    variances: tuple

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("power delay profile needs at least one tap")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("tap variances must be finite and nonnegative")
        if not np.any(v > 0):
            raise ValueError("power delay profile is all zero")
        object.__setattr__(self, "variances", tuple(float(x) for x in v))

    @property
    def L(self):
        return len(self.variances)

    @property
    def total_power(self):
        return float(sum(self.variances))

    def normalized(self):
        """Return the profile scaled to unit total power, warning if it wasn't."""
        total = self.total_power
        if abs(total - 1.0) <= 1e-12:
            return self
        log.warning("power delay profile sums to %.6g; normalizing to 1", total)
        return PowerDelayProfile(tuple(v / total for v in self.variances))


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    """Slot covariance ``R`` with its eigendecomposition and numerical rank.

    ``eigenvalues`` are ascending and clipped at zero; ``eigenvectors`` holds
    the matching unit-norm columns. ``scale`` is the factor ``r(0)`` that was
    divided out to give a unit diagonal.
    """

    R: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int
    tol: float
    scale: float = 1.0
    sqrt: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.rank < 1:
            raise InvalidCorrelationError("covariance has rank 0")
        U, lam = self.eigenvectors, self.eigenvalues
        object.__setattr__(self, "sqrt", (U * np.sqrt(lam)) @ U.conj().T)

    @property
    def N(self):
        return self.R.shape[0]

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    @property
    def lambda_min_nz(self):
        return float(self.eigenvalues[self.N - self.rank])

    @property
    def nonzero_eigenvalues(self):
        """The ``rank`` retained eigenvalues, largest first."""
        return self.eigenvalues[self.N - self.rank :][::-1].copy()

    @classmethod
    def from_matrix(cls, R, tol=None, scale=1.0):
        R = np.asarray(R, dtype=complex)
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise ValueError("covariance must be a square matrix")
        n = R.shape[0]
        if np.linalg.norm(R - R.conj().T) > 1e-12 * max(np.linalg.norm(R), 1.0):
            raise InvalidCorrelationError("covariance is not Hermitian")
        R = 0.5 * (R + R.conj().T)
        lam, U = np.linalg.eigh(R)
        lam_max = max(lam[-1], 0.0)
        if lam[0] < -PSD_TOL * lam_max or lam_max <= 0:
            raise InvalidCorrelationError(
                f"correlation is not positive semidefinite (min eigenvalue {lam[0]:.3e})"
            )
        tol = default_rank_tol(n) if tol is None else tol
        lam = np.where(lam > tol * lam_max, lam, 0.0)
        rank = int(np.count_nonzero(lam))
        return cls(R=R, eigenvalues=lam, eigenvectors=U, rank=rank, tol=tol, scale=scale)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of the ``N`` per-slot channel matrices, shape (N, m_r, m_t)."""

    slots: np.ndarray

    @property
    def N(self):
        return self.slots.shape[0]


@dataclass(frozen=True, eq=False)
class JensenChannel:
    """Slot matrices laid side by side, shape (m_min, N * m_max)."""

    matrix: np.ndarray


def default_rank_tol(n):
    return 64.0 * n * EPS


def covariance_rank(R, tol=None):
    """Count eigenvalues of Hermitian ``R`` above ``tol * lambda_max``.

    The default relative threshold is ``64 * N * eps``. A zero matrix has
    rank 0.
    """
    R = np.asarray(R)
    lam = np.linalg.eigvalsh(R)
    tol = default_rank_tol(R.shape[0]) if tol is None else tol
    if lam[-1] <= 0:
        return 0
    return int(np.count_nonzero(lam > tol * lam[-1]))


def build_covariance_from_correlation(r, N=None, tol=None):
    """Hermitian Toeplitz covariance from correlation lags ``r(0), ..., r(N-1)``.

    Negative lags follow from ``r(-m) = r(m)^*``. When ``r(0) != 1`` the
    matrix is divided by ``r(0)`` and the factor is kept in ``scale``.
    """
    r = np.asarray(r, dtype=complex).ravel()
    if N is None:
        N = r.size
    if r.size != N:
        raise ValueError(f"expected {N} correlation lags, got {r.size}")
    r0 = r[0]
    if abs(r0.imag) > 1e-12 * abs(r0) or r0.real <= 0:
        raise InvalidCorrelationError("r(0) must be real and positive")
    scale = float(r0.real)
    R = toeplitz(r, r.conj()) / scale
    np.fill_diagonal(R, 1.0)
    return CovarianceSpec.from_matrix(R, tol=tol, scale=scale)


def pdp_correlation(pdp, N):
    """Correlation lags ``r(m) = sum_l s_l exp(-j 2 pi l m / N)`` of a profile."""
    s = np.asarray(pdp.variances)
    m = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(m, np.arange(s.size)) / N) @ s


def build_covariance_from_pdp(pdp, N, tol=None):
    """Covariance of an ``N``-tone cyclic (OFDM) channel with the given taps.

    ``R = F diag(N s_0, ..., N s_{L-1}, 0, ...) F^H`` with ``F`` the unitary
    DFT matrix, so the eigenpairs are known in closed form and the rank is
    the number of nonzero taps.
    """
    if not isinstance(pdp, PowerDelayProfile):
        pdp = PowerDelayProfile(tuple(pdp))
    if pdp.L > N:
        raise ValueError(f"profile has {pdp.L} taps but only {N} tones")
    pdp = pdp.normalized()
    s = np.zeros(N)
    s[: pdp.L] = pdp.variances
    n = np.arange(N)
    F = np.exp(-2j * np.pi * np.outer(n, n) / N) / np.sqrt(N)
    lam = N * s
    R = (F * lam) @ F.conj().T
    np.fill_diagonal(R, 1.0)
    order = np.argsort(lam, kind="stable")
    tol = default_rank_tol(N) if tol is None else tol
    lam = lam[order]
    lam = np.where(lam > tol * lam[-1], lam, 0.0)
    return CovarianceSpec(
        R=R,
        eigenvalues=lam,
        eigenvectors=F[:, order],
        rank=int(np.count_nonzero(lam)),
        tol=tol,
    )


def sample_whitened(ant, N, seed, start, count):
    """I.i.d. CN(0,1) slot matrices, shape (count, N, m_r, m_t)."""
    size = N * ant.m_r * ant.m_t
    w = streams.complex_normals(seed, streams.CHANNEL, start, count, size)
    return w.reshape(count, N, ant.m_r, ant.m_t)


def sample_channels(cov, ant, seed, start, count):
    """Correlated channel draws for trials ``start .. start+count-1``.

    Returns an array of shape (count, N, m_r, m_t); row ``k`` equals
    ``sample_channel(cov, ant, seed, start + k).slots``.
    """
    w = sample_whitened(ant, cov.N, seed, start, count)
    # H_n = sum_k S[n, k] W_k for every antenna pair
    h = cov.sqrt @ w.reshape(count, cov.N, ant.m_r * ant.m_t)
    return h.reshape(w.shape)


def sample_channel(cov, ant, seed, trial_index):
    """One realization; a pure function of ``(seed, trial_index)``."""
    return ChannelRealization(sample_channels(cov, ant, seed, trial_index, 1)[0])


def jensen_stack(slots, ant):
    """Arrange slot matrices (..., N, m_r, m_t) as (..., m_min, N * m_max)."""
    slots = np.asarray(slots)
    if ant.m_r > ant.m_t:
        slots = np.conj(np.swapaxes(slots, -1, -2))
    # (..., N, a, b) -> (..., a, N, b) -> (..., a, N*b)
    moved = np.moveaxis(slots, -3, -2)
    return moved.reshape(*moved.shape[:-2], moved.shape[-2] * moved.shape[-1])


def jensen_channel(re, ant):
    """``[H_0 ... H_{N-1}]`` if ``m_r <= m_t``, else ``[H_0^H ... H_{N-1}^H]``."""
    slots = re.slots
    if slots.shape[1:] != (ant.m_r, ant.m_t):
        raise ValueError(
            f"slot shape {slots.shape[1:]} does not match {ant.m_r}x{ant.m_t} antennas"
        )
    return JensenChannel(jensen_stack(slots, ant))


def sample_reduced_batch(rank, ant, seed, start, count):
    """I.i.d. reduced Jensen channels, shape (count, m_min, rank * m_max)."""
    if rank < 1:
        raise ValueError("rank must be at least 1")
    cols = rank * ant.m_max
    z = streams.complex_normals(seed, streams.REDUCED, start, count, ant.m_min * cols)
    return z.reshape(count, ant.m_min, cols)


def sample_reduced_iid(rank, ant, seed, trial_index):
    """The ``m_min x (rank * m_max)`` i.i.d. channel whose outage matches the
    Jensen channel's at the exponential scale."""
    return sample_reduced_batch(rank, ant, seed, trial_index, 1)[0]
