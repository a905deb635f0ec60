"""Piecewise-linear diversity-multiplexing tradeoff curves."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TradeoffCurve",
    "CurveDomainError",
    "jensen_curve",
    "frequency_selective_curve",
    "flat_fading_curve",
    "evaluate",
]


class CurveDomainError(ValueError):
    pass


@dataclass(frozen=True)
class TradeoffCurve:
    """Integer vertices ``(r, d(r))`` for ``r = 0, ..., m_min``."""

    vertices: tuple

    @property
    def m_min(self):
        return self.vertices[-1][0]

    def __call__(self, r):
        return evaluate(self, r)


def _check_positive_int(name, v):
    if int(v) != v or v < 1:
        raise ValueError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


def jensen_curve(rho, ant):
    """Vertices ``(rho * m_max - r) * (m_min - r)``, exact integers."""
    rho = _check_positive_int("rho", rho)
    p, q = ant.m_min, ant.m_max
    return TradeoffCurve(tuple((r, (rho * q - r) * (p - r)) for r in range(p + 1)))


def frequency_selective_curve(L, ant):
    """Optimal curve of an ``L``-tap cyclic frequency-selective channel."""
    return jensen_curve(_check_positive_int("L", L), ant)


def flat_fading_curve(ant):
    """``(m_t - r)(m_r - r)``, the block-fading special case."""
    return TradeoffCurve(
        tuple((r, (ant.m_t - r) * (ant.m_r - r)) for r in range(ant.m_min + 1))
    )


def evaluate(curve, r):
    """Linear interpolation between the integer vertices; ``r`` in [0, m_min]."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r_arr)) or np.any(r_arr < 0) or np.any(r_arr > curve.m_min):
        raise CurveDomainError(f"r must lie in [0, {curve.m_min}], got {r!r}")
    xs, ds = zip(*curve.vertices)
    out = np.interp(r_arr, xs, ds)
    return float(out) if out.ndim == 0 else out
