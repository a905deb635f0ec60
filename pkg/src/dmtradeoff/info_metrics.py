"""Mutual information, singularity levels and outage events.

All logarithms are natural. Rates are expressed as ``r * ln(snr)`` nats.
The functions with a ``_batch`` suffix work on leading trial axes and are
what the Monte Carlo engine calls; the others take single realizations.
"""

from dataclasses import dataclass

import numpy as np

from .channel_model import JensenChannel

__all__ = [
    "SnrPoint",
    "SingularityLevels",
    "slot_gram_eigenvalues",
    "jensen_gram_eigenvalues",
    "gram_eigenvalues",
    "logdet_from_eigenvalues",
    "levels_from_eigenvalues",
    "level_sum",
    "mutual_information",
    "jensen_mutual_information",
    "singularity_levels",
    "outage_indicator",
    "jensen_outage_indicator",
    "sandwich_values",
    "sandwich_batch",
]


@dataclass(frozen=True)
class SnrPoint:
    linear: float

    def __post_init__(self):
        if not self.linear > 0:
            raise ValueError(f"SNR must be positive, got {self.linear!r}")
        object.__setattr__(self, "linear", float(self.linear))

    @classmethod
    def from_db(cls, db):
        return cls(10.0 ** (float(db) / 10.0))

    @property
    def db(self):
        return 10.0 * np.log10(self.linear)

    @property
    def log(self):
        return float(np.log(self.linear))


def _as_snr(snr):
    return snr if isinstance(snr, SnrPoint) else SnrPoint(snr)


@dataclass(frozen=True, eq=False)
class SingularityLevels:
    """``per_slot[n, k]`` are the slot levels, ``jensen`` the reduced-channel
    levels sorted largest first."""

    per_slot: np.ndarray
    jensen: np.ndarray


def gram_eigenvalues(A):
    """Eigenvalues (ascending, clipped at 0) of the smaller Gram of ``A``.

    Works on stacks; the trailing two axes are the matrix.
    """
    A = np.asarray(A)
    rows, cols = A.shape[-2:]
    if rows > cols:
        A = np.conj(np.swapaxes(A, -1, -2))
        rows = cols
    if rows == 1:
        g = np.sum(np.abs(A) ** 2, axis=(-2, -1))
        return g[..., None]
    G = A @ np.conj(np.swapaxes(A, -1, -2))
    return np.clip(np.linalg.eigvalsh(G), 0.0, None)


def slot_gram_eigenvalues(slots):
    """Per-slot eigenvalues of ``H_n H_n^H`` restricted to its ``m_min``
    possibly nonzero ones: (..., N, m_r, m_t) -> (..., N, m_min)."""
    return gram_eigenvalues(slots)


def jensen_gram_eigenvalues(slots):
    """Eigenvalues of ``H_J H_J^H`` from the slot matrices, (..., m_min).

    ``H_J H_J^H`` is the sum of the per-slot small Grams, which avoids
    building the wide matrix.
    """
    slots = np.asarray(slots)
    m_r, m_t = slots.shape[-2:]
    if m_r > m_t:
        slots = np.conj(np.swapaxes(slots, -1, -2))
    if min(m_r, m_t) == 1:
        return np.sum(np.abs(slots) ** 2, axis=(-3, -2, -1))[..., None]
    G = np.sum(slots @ np.conj(np.swapaxes(slots, -1, -2)), axis=-3)
    return np.clip(np.linalg.eigvalsh(G), 0.0, None)


def logdet_from_eigenvalues(eigs, gain):
    """``sum_k ln(1 + gain * eig_k)`` over the last axis."""
    return np.sum(np.log1p(gain * eigs), axis=-1)


def levels_from_eigenvalues(eigs, snr):
    """Singularity levels ``-ln(eig) / ln(snr)``; zero eigenvalues map to +inf."""
    snr = _as_snr(snr)
    if snr.linear <= 1:
        raise ValueError("singularity levels need snr > 1")
    with np.errstate(divide="ignore"):
        return -np.log(eigs) / snr.log


def level_sum(levels):
    """``sum_k [1 - level_k]^+`` over the last axis (inf contributes 0)."""
    return np.sum(np.maximum(1.0 - levels, 0.0), axis=-1)


def mutual_information(re, ant, snr):
    """Average over slots of ``logdet(I + snr/m_t H_n H_n^H)``, in nats."""
    snr = _as_snr(snr)
    eigs = slot_gram_eigenvalues(re.slots)
    return float(np.mean(logdet_from_eigenvalues(eigs, snr.linear / ant.m_t)))


def jensen_mutual_information(jc, ant, N, snr):
    """``logdet(I + snr/(m_t N) H_J H_J^H)``; never below the slot average."""
    snr = _as_snr(snr)
    H = jc.matrix if isinstance(jc, JensenChannel) else np.asarray(jc)
    eigs = gram_eigenvalues(H)
    return float(logdet_from_eigenvalues(eigs, snr.linear / (ant.m_t * N)))


def singularity_levels(re, reduced, ant, snr):
    """Slot levels of ``re`` and the sorted levels of the reduced channel.

    Parameters
    ----------
    re : ChannelRealization
    reduced : ndarray, shape (m_min, rho * m_max)
        I.i.d. reduced Jensen channel.
    ant : AntennaConfig
    snr : float or SnrPoint
        Must exceed 1.
    """
    per_slot = levels_from_eigenvalues(slot_gram_eigenvalues(re.slots), snr)
    alpha = levels_from_eigenvalues(gram_eigenvalues(reduced), snr)
    if per_slot.shape[-1] != ant.m_min or alpha.shape[-1] != ant.m_min:
        raise ValueError("level count does not match m_min")
    # ascending eigenvalues give descending levels already; sort anyway for inf ties
    return SingularityLevels(per_slot=per_slot, jensen=np.sort(alpha)[::-1])


def outage_indicator(levels, r):
    """True iff ``(1/N) sum_n sum_k [1 - mu_k(n)]^+ < r``.

    ``levels`` is a :class:`SingularityLevels` or an array (..., N, m_min).
    """
    mu = levels.per_slot if isinstance(levels, SingularityLevels) else np.asarray(levels)
    out = np.mean(level_sum(mu), axis=-1) < r
    return bool(out) if out.ndim == 0 else out


def jensen_outage_indicator(levels, r):
    """True iff ``sum_k [1 - alpha_k]^+ < r`` (strict)."""
    alpha = levels.jensen if isinstance(levels, SingularityLevels) else np.asarray(levels)
    out = level_sum(alpha) < r
    return bool(out) if out.ndim == 0 else out


def sandwich_batch(hw, cov, ant, snr):
    """Vectorized :func:`sandwich_values` over a leading trial axis."""
    snr = _as_snr(snr)
    hw = np.asarray(hw)
    rho, m_max = cov.rank, ant.m_max
    gain = snr.linear / (ant.m_t * cov.N)
    bar = hw[..., : rho * m_max]
    eig_bar = gram_eigenvalues(bar)
    lower = logdet_from_eigenvalues(eig_bar, cov.lambda_min_nz * gain)
    upper = logdet_from_eigenvalues(eig_bar, cov.lambda_max * gain)
    weights = np.repeat(cov.nonzero_eigenvalues, m_max)
    middle = logdet_from_eigenvalues(gram_eigenvalues(bar * np.sqrt(weights)), gain)
    return lower, middle, upper


def sandwich_values(hw, cov, ant, snr):
    """Jensen mutual information of a whitened draw and its two bounds.

    With ``Lam`` holding the nonzero eigenvalues of ``R`` (largest first) in
    its leading diagonal blocks, ``middle = logdet(I + g hw (Lam x I) hw^H)``
    where ``g = snr / (m_t N)``. ``lower`` and ``upper`` replace ``Lam`` by
    the smallest and largest nonzero eigenvalue on the first ``rho * m_max``
    columns, so ``lower <= middle <= upper`` for every draw.
    """
    lower, middle, upper = sandwich_batch(hw, cov, ant, snr)
    return float(lower), float(middle), float(upper)
