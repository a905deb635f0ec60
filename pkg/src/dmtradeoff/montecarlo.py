"""Monte Carlo outage estimation and exponent fitting.

Trials are processed in fixed-size chunks; trial ``i`` always draws from the
substream ``(seed, i)`` so the integer outage counts, and everything built
from them, are identical for any number of workers. At a given SNR every
rate (and every target sharing a stream) is evaluated on the same draws.

Targets
-------
``outage``
    Singularity-level event: ``(1/N) sum_n sum_k [1 - mu_k(n)]^+ < r``.
``outage-mi``
    Rate event on the slot-averaged mutual information,
    ``(1/N) sum_n logdet(I + snr/m_t H_n H_n^H) < r ln snr``.
``jensen``
    Rate event on the Jensen channel, ``logdet(I + snr/(m_t N) H_J H_J^H) < r ln snr``.
``jensen-reduced``
    Rate event on the i.i.d. ``m_min x rho m_max`` reduced channel,
    ``logdet(I + snr Hbar Hbar^H) < r ln snr``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import info_metrics as im
from .channel_model import jensen_stack, sample_channels, sample_reduced_batch, sample_whitened
from .info_metrics import SnrPoint
from .streams import chunk_bounds

__all__ = [
    "TARGETS",
    "DEFAULT_CHUNK",
    "OutageEstimate",
    "ExponentFit",
    "InsufficientDataError",
    "wilson_interval",
    "sweep",
    "estimate_outage",
    "estimate_jensen_outage",
    "estimate_sandwich",
    "domination_check",
    "loglog_fit",
    "fit_exponent",
]

TARGETS = ("outage", "outage-mi", "jensen", "jensen-reduced")
DEFAULT_CHUNK = 1 << 15
Z95 = float(norm.ppf(0.975))
# I <= I_J holds exactly; allow for rounding in the two logdet evaluations
DOMINATION_RTOL = 1e-12


class InsufficientDataError(ValueError):
    """Too few grid points carry enough outage events to fit a slope."""


def wilson_interval(k, n, z=Z95):
    """Wilson score interval for ``k`` successes out of ``n``."""
    if n <= 0:
        raise ValueError("need at least one trial")
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # clamp against rounding so lo <= p_hat <= hi always holds
    return min(max(centre - half, 0.0), p), max(min(centre + half, 1.0), p)


@dataclass(frozen=True)
class OutageEstimate:
    snr: SnrPoint
    rate: float
    trials: int
    outages: int
    target: str = "outage"

    @property
    def p_hat(self):
        return self.outages / self.trials

    @property
    def ci95(self):
        return wilson_interval(self.outages, self.trials)


@dataclass(frozen=True)
class ExponentFit:
    """Log-log slope of outage probability against SNR.

    ``d_hat`` is the negated regression slope (a positive diversity order);
    ``excluded`` lists the SNRs (dB) dropped for having too few events.
    """

    d_hat: float
    stderr: float
    intercept: float
    points: tuple
    excluded: tuple = ()

    @property
    def used_points(self):
        return len(self.points)


def _as_snr(s):
    return s if isinstance(s, SnrPoint) else SnrPoint(s)


def _validate(ant, rates, snrs, trials, targets):
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    if not rates or not snrs:
        raise ValueError("rate and SNR grids must be nonempty")
    for r in rates:
        if not 0 <= r <= ant.m_min:
            raise ValueError(f"rate {r} outside [0, {ant.m_min}]")
    for s in snrs:
        if s.linear <= 1:
            raise ValueError(f"SNR must exceed 1 (0 dB), got {s.linear}")
    for t in targets:
        if t not in TARGETS:
            raise ValueError(f"unknown target {t!r}; choose from {TARGETS}")


def _statistics(target, cov, ant, snrs, slot_eigs, jensen_eigs, reduced_eigs):
    """Per-SNR statistic arrays and the matching threshold functions."""
    out = []
    for s in snrs:
        if target == "outage":
            mu = im.levels_from_eigenvalues(slot_eigs, s)
            stat, thresh = np.mean(im.level_sum(mu), axis=-1), (lambda r, s=s: r)
        elif target == "outage-mi":
            mi = im.logdet_from_eigenvalues(slot_eigs, s.linear / ant.m_t)
            stat, thresh = np.mean(mi, axis=-1), (lambda r, s=s: r * s.log)
        elif target == "jensen":
            gain = s.linear / (ant.m_t * cov.N)
            stat, thresh = im.logdet_from_eigenvalues(jensen_eigs, gain), (lambda r, s=s: r * s.log)
        else:
            stat, thresh = im.logdet_from_eigenvalues(reduced_eigs, s.linear), (lambda r, s=s: r * s.log)
        out.append((stat, thresh))
    return out


def _chunk_counts(cov, ant, snrs, rates, targets, seed, start, count):
    counts = np.zeros((len(targets), len(snrs), len(rates)), dtype=np.int64)
    slot_eigs = jensen_eigs = reduced_eigs = None
    if any(t != "jensen-reduced" for t in targets):
        slots = sample_channels(cov, ant, seed, start, count)
        if {"outage", "outage-mi"} & set(targets):
            slot_eigs = im.slot_gram_eigenvalues(slots)
        if "jensen" in targets:
            jensen_eigs = im.jensen_gram_eigenvalues(slots)
    if "jensen-reduced" in targets:
        reduced = sample_reduced_batch(cov.rank, ant, seed, start, count)
        reduced_eigs = im.gram_eigenvalues(reduced)
    for ti, t in enumerate(targets):
        stats = _statistics(t, cov, ant, snrs, slot_eigs, jensen_eigs, reduced_eigs)
        for si, (stat, thresh) in enumerate(stats):
            for ri, r in enumerate(rates):
                counts[ti, si, ri] = np.count_nonzero(stat < thresh(r))
    return counts


def _run_chunks(fn, trials, chunk_size, workers):
    chunks = chunk_bounds(trials, chunk_size)
    if workers <= 1 or len(chunks) == 1:
        results = map(fn, chunks)
        return sum(results)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(fn, chunks))


def sweep(cov, ant, rates, snr_grid, trials, seed, targets=("outage",), workers=1,
          chunk_size=DEFAULT_CHUNK):
    """Outage estimates over the full ``targets x snr_grid x rates`` product.

    Parameters
    ----------
    cov : CovarianceSpec
    ant : AntennaConfig
    rates : sequence of float
        Multiplexing rates in ``[0, m_min]``.
    snr_grid : sequence of float or SnrPoint
        Linear SNR values (> 1).
    trials : int
        Trials per grid point; the same draws serve every point.
    seed : int
    targets : sequence of str
        Any of :data:`TARGETS`.
    workers : int
        Thread count. Does not affect the result.
    chunk_size : int
        Trials per work unit. Does not affect the result either.

    Returns
    -------
    list of OutageEstimate
        Ordered by target, then SNR, then rate.
    """
    rates = [float(r) for r in rates]
    snrs = [_as_snr(s) for s in snr_grid]
    targets = tuple(targets)
    _validate(ant, rates, snrs, trials, targets)

    def work(chunk):
        return _chunk_counts(cov, ant, snrs, rates, targets, seed, *chunk)

    counts = _run_chunks(work, int(trials), chunk_size, workers)
    return [
        OutageEstimate(snr=s, rate=r, trials=int(trials), outages=int(counts[ti, si, ri]), target=t)
        for ti, t in enumerate(targets)
        for si, s in enumerate(snrs)
        for ri, r in enumerate(rates)
    ]


def estimate_outage(cov, ant, r, snr, trials, seed, event="levels", workers=1):
    """Outage frequency of the slot channel at one ``(r, snr)`` point.

    ``event="levels"`` counts the singularity-level event, ``event="mi"``
    compares the slot-averaged mutual information with ``r ln snr``.
    """
    target = {"levels": "outage", "mi": "outage-mi"}.get(event)
    if target is None:
        raise ValueError(f"event must be 'levels' or 'mi', got {event!r}")
    return sweep(cov, ant, [r], [snr], trials, seed, targets=(target,), workers=workers)[0]


def estimate_jensen_outage(cov, ant, r, snr, trials, seed, mode="exact", workers=1):
    """Jensen outage frequency; ``mode`` is ``"exact"`` or ``"reduced"``."""
    target = {"exact": "jensen", "reduced": "jensen-reduced"}.get(mode)
    if target is None:
        raise ValueError(f"mode must be 'exact' or 'reduced', got {mode!r}")
    return sweep(cov, ant, [r], [snr], trials, seed, targets=(target,), workers=workers)[0]


def estimate_sandwich(cov, ant, rates, snr_grid, trials, seed, workers=1,
                      chunk_size=DEFAULT_CHUNK):
    """Outage counts of the Jensen channel and its two eigenvalue bounds.

    All three events are evaluated on the same whitened draws. Returns
    ``(estimates, violations)`` where ``estimates`` maps ``"lambda_max"``,
    ``"jensen"`` and ``"lambda_min"`` to lists ordered by SNR then rate, and
    ``violations`` counts draws breaking ``lower <= middle <= upper``.
    The ``lambda_max`` event uses the largest eigenvalue and is the least
    likely, so its frequency lower-bounds the Jensen one.
    """
    rates = [float(r) for r in rates]
    snrs = [_as_snr(s) for s in snr_grid]
    _validate(ant, rates, snrs, trials, ())

    def work(chunk):
        start, count = chunk
        hw = jensen_stack(sample_whitened(ant, cov.N, seed, start, count), ant)
        c = np.zeros((3, len(snrs), len(rates)), dtype=np.int64)
        bad = 0
        for si, s in enumerate(snrs):
            lo, mid, hi = im.sandwich_batch(hw, cov, ant, s)
            slack = 1e-12 * np.maximum(hi, 1.0)
            bad += int(np.count_nonzero((lo > mid + slack) | (mid > hi + slack)))
            for ri, r in enumerate(rates):
                t = r * s.log
                c[:, si, ri] = (np.count_nonzero(hi < t), np.count_nonzero(mid < t),
                                np.count_nonzero(lo < t))
        return np.append(c.ravel(), bad)

    total = _run_chunks(work, int(trials), chunk_size, workers)
    bad = int(total[-1])
    c = total[:-1].reshape(3, len(snrs), len(rates))
    names = ("lambda_max", "jensen", "lambda_min")
    est = {
        name: [
            OutageEstimate(snr=s, rate=r, trials=int(trials), outages=int(c[k, si, ri]),
                           target=f"sandwich-{name}")
            for si, s in enumerate(snrs)
            for ri, r in enumerate(rates)
        ]
        for k, name in enumerate(names)
    }
    return est, bad


def domination_check(cov, ant, snr_grid, trials, seed, workers=1, chunk_size=DEFAULT_CHUNK):
    """Count draws where the slot-averaged MI exceeds the Jensen MI.

    Uses the same channel draws as :func:`sweep`. Returns the number of
    violations summed over the SNR grid (zero in exact arithmetic).
    """
    snrs = [_as_snr(s) for s in snr_grid]

    def work(chunk):
        slots = sample_channels(cov, ant, seed, *chunk)
        se = im.slot_gram_eigenvalues(slots)
        je = im.jensen_gram_eigenvalues(slots)
        bad = 0
        for s in snrs:
            mi = np.mean(im.logdet_from_eigenvalues(se, s.linear / ant.m_t), axis=-1)
            mj = im.logdet_from_eigenvalues(je, s.linear / (ant.m_t * cov.N))
            bad += int(np.count_nonzero(mi > mj * (1 + DOMINATION_RTOL) + 1e-300))
        return bad

    return int(_run_chunks(work, int(trials), chunk_size, workers))


def loglog_fit(log10_snr, log10_p, var=None):
    """Ordinary least squares of ``log10_p`` on ``log10_snr``.

    Returns ``(slope, intercept, stderr)``. The standard error is the larger
    of the one propagated from the per-point variances ``var`` (if given)
    and the residual-based one (if there are more than two points).
    """
    x = np.asarray(log10_snr, dtype=float)
    y = np.asarray(log10_p, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("need at least two points for a slope")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise InsufficientDataError("all points share one SNR")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    se2 = 0.0
    if var is not None:
        se2 = float(np.sum((xc / sxx) ** 2 * np.asarray(var, dtype=float)))
    if x.size > 2:
        resid = y - (intercept + slope * x)
        se2 = max(se2, float(resid @ resid) / (x.size - 2) / sxx)
    return slope, intercept, float(np.sqrt(se2))


def fit_exponent(estimates, min_events=50):
    """Fit the outage decay exponent from estimates at several SNRs.

    Points with fewer than ``min_events`` outages are excluded (their
    relative error would bias the slope). The per-point variance of
    ``log10 p_hat`` is the binomial delta-method value ``(1-p)/(k ln10^2)``.
    """
    used = [e for e in estimates if e.outages >= min_events]
    excluded = tuple(float(e.snr.db) for e in estimates if e.outages < min_events)
    if len({e.snr.linear for e in used}) < 2:
        raise InsufficientDataError(
            f"{len(used)} point(s) with >= {min_events} outage events; need 2 distinct SNRs"
        )
    x = [np.log10(e.snr.linear) for e in used]
    y = [np.log10(e.p_hat) for e in used]
    var = [(1 - e.p_hat) / (e.outages * np.log(10) ** 2) for e in used]
    slope, intercept, se = loglog_fit(x, y, var)
    return ExponentFit(
        d_hat=-slope,
        stderr=se,
        intercept=intercept,
        points=tuple(zip(x, y)),
        excluded=excluded,
    )
