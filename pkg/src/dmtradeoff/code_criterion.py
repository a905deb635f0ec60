"""Rank criterion for space-time codes over selective-fading channels.

For a codeword difference ``E = X - X'`` (``m_t x N``) the criterion matrix
is ``R (.) E^H E`` (Hadamard product, ``N x N``). The pairwise error bound
is written in terms of

    Y = (S (x) I_mt) blockdiag(e_n e_n^H) (S (x) I_mt),    S = R^{1/2}.

With ``B = blockdiag(e_0, ..., e_{N-1})`` and ``K = S (x) I`` we have
``Y = (K B)(K B)^H`` while ``(K B)^H (K B) = B^H (R (x) I) B = R (.) E^H E``.
So ``Y`` and the Hadamard matrix share their nonzero eigenvalues (hence
their rank) for every ``m_t``, not only ``m_t = 1``.

Convention note: writing the stacked channel as ``H_w (S (x) I)`` gives each
scalar subchannel the slot covariance ``R^T``. Channels drawn by
:func:`~dmtradeoff.channel_model.sample_channels` have covariance ``R``, so
for them ``sum_n ||H_n e_n||^2`` follows ``Y`` built from ``R^T = conj(R)``.
The two agree whenever ``R`` is real or ``m_t = 1``.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import streams
from .channel_model import default_rank_tol, sample_channels
from .info_metrics import SnrPoint
from .montecarlo import InsufficientDataError, loglog_fit

__all__ = [
    "Codebook",
    "PairResult",
    "CriterionReport",
    "DecayVerdict",
    "UnionBoundReport",
    "DegenerateCodebookError",
    "difference_gram",
    "criterion_matrix",
    "upsilon",
    "nonzero_eigenvalues",
    "criterion_rank",
    "check_codebook",
    "codebook_lambda",
    "decay_exponent",
    "check_decay",
    "pep_upper_bound",
    "pep_monte_carlo",
    "union_bound_value",
    "union_bound",
    "make_delay_diversity_codebook",
]


class DegenerateCodebookError(ValueError):
    """Every pair of codewords coincides, so no nonzero eigenvalue exists."""


@dataclass(frozen=True, eq=False)
class Codebook:
    """Codewords stacked as an array of shape (count, m_t, N)."""

    codewords: np.ndarray
    snr: SnrPoint = None
    rate: float = None

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=complex)
        if cw.ndim == 2:
            cw = cw[:, None, :]
        if cw.ndim != 3:
            raise ValueError("codewords must have shape (count, m_t, N)")
        object.__setattr__(self, "codewords", cw)
        if self.snr is not None and not isinstance(self.snr, SnrPoint):
            object.__setattr__(self, "snr", SnrPoint(self.snr))

    def __len__(self):
        return self.codewords.shape[0]

    @property
    def m_t(self):
        return self.codewords.shape[1]

    @property
    def N(self):
        return self.codewords.shape[2]

    def pairs(self):
        return combinations(range(len(self)), 2)


def difference_gram(X, Xp):
    """``E^H E`` for ``E = X - X'``."""
    X, Xp = np.atleast_2d(X), np.atleast_2d(Xp)
    if X.shape != Xp.shape:
        raise ValueError(f"codeword shapes differ: {X.shape} vs {Xp.shape}")
    E = X - Xp
    return E.conj().T @ E


def criterion_matrix(cov, E):
    E = np.atleast_2d(E)
    return cov.R * (E.conj().T @ E)


def upsilon(cov, E):
    """``(S (x) I) blockdiag(e_n e_n^H) (S (x) I)`` of size ``N m_t``."""
    E = np.atleast_2d(E)
    m_t, N = E.shape
    if N != cov.N:
        raise ValueError(f"codeword length {N} does not match covariance size {cov.N}")
    K = np.kron(cov.sqrt, np.eye(m_t))
    D = np.zeros((N * m_t, N * m_t), dtype=complex)
    for n in range(N):
        e = E[:, n]
        D[n * m_t:(n + 1) * m_t, n * m_t:(n + 1) * m_t] = np.outer(e, e.conj())
    return K @ D @ K


def nonzero_eigenvalues(A, tol=None):
    """Eigenvalues of Hermitian ``A`` above ``tol * lambda_max``, ascending."""
    lam = np.linalg.eigvalsh(A)
    tol = default_rank_tol(A.shape[0]) if tol is None else tol
    if lam[-1] <= 0:
        return lam[:0]
    return lam[lam > tol * lam[-1]]


@dataclass(frozen=True)
class PairResult:
    i: int
    j: int
    rank: int
    passed: bool
    margin: float
    lambda_min_nz: float


def _pair(cov, E, required, tol, form):
    A = upsilon(cov, E) if form == "upsilon" else criterion_matrix(cov, E)
    nz = nonzero_eigenvalues(A, tol)
    rank = int(nz.size)
    if rank == 0:
        return rank, False, 0.0, float("nan")
    thr = (default_rank_tol(A.shape[0]) if tol is None else tol) * nz[-1]
    return rank, rank == required, float(nz[0] / thr), float(nz[0])


def criterion_rank(cov, E, tol=None, form="upsilon"):
    """Rank of the criterion matrix and whether it reaches ``rho * m_t``.

    ``form`` selects ``"upsilon"`` (default) or the ``"hadamard"`` matrix;
    the two agree. Returns ``(rank, passed)``.
    """
    E = np.atleast_2d(E)
    rank, passed, _, _ = _pair(cov, E, cov.rank * E.shape[0], tol, form)
    return rank, passed


@dataclass(frozen=True)
class CriterionReport:
    pairs: tuple
    required_rank: int
    lambda_min_nz: float
    block_length_ok: bool

    @property
    def passed(self):
        return self.block_length_ok and all(p.passed for p in self.pairs)

    @property
    def failing_pairs(self):
        return [p for p in self.pairs if not p.passed]


def check_codebook(cov, codebook, tol=None, form="hadamard"):
    """Evaluate every unordered codeword pair against the rank criterion.

    ``margin`` in each :class:`PairResult` is the smallest retained eigenvalue
    divided by the rank threshold.
    """
    if len(codebook) < 2:
        raise ValueError("criterion checks need at least two codewords")
    if codebook.N != cov.N:
        raise ValueError(f"codeword length {codebook.N} does not match covariance size {cov.N}")
    required = cov.rank * codebook.m_t
    cw = codebook.codewords
    results = []
    for i, j in codebook.pairs():
        rank, passed, margin, lam = _pair(cov, cw[i] - cw[j], required, tol, form)
        results.append(PairResult(i, j, rank, passed, margin, lam))
    lams = [p.lambda_min_nz for p in results if p.rank > 0]
    return CriterionReport(
        pairs=tuple(results),
        required_rank=required,
        lambda_min_nz=min(lams) if lams else float("nan"),
        block_length_ok=codebook.N >= required,
    )


def codebook_lambda(cov, codebook, tol=None):
    """Smallest nonzero criterion eigenvalue over all codeword pairs."""
    report = check_codebook(cov, codebook, tol=tol)
    if np.isnan(report.lambda_min_nz):
        raise DegenerateCodebookError("all codeword differences are zero")
    return report.lambda_min_nz


@dataclass(frozen=True)
class DecayVerdict:
    b: float
    stderr: float
    m_min: int
    r: float
    eps: float
    passed: bool
    non_vanishing: bool


def decay_exponent(snrs, lambdas):
    """Fit ``lambda(snr) ~ snr^-b``; returns ``(b, stderr)``."""
    snrs = [s.linear if isinstance(s, SnrPoint) else float(s) for s in snrs]
    if len(snrs) < 2:
        raise InsufficientDataError("decay fit needs at least two SNR points")
    slope, _, se = loglog_fit(np.log10(snrs), np.log10(lambdas))
    return -slope, se


def check_decay(family, r, eps, m_min, cov=None):
    """Test ``lambda^m_min(snr)`` against ``snr^-(r - eps)`` on an SNR grid.

    ``family`` holds ``(snr, item)`` pairs where ``item`` is a codebook
    (then ``cov`` is required) or an already computed ``lambda`` value.
    Passes iff ``m_min * b <= r - eps`` allowing one fit standard error.
    ``non_vanishing`` is the stronger ``b <= 0`` condition.
    """
    snrs, lams = [], []
    for snr, item in family:
        snrs.append(snr)
        lams.append(codebook_lambda(cov, item) if isinstance(item, Codebook) else float(item))
    b, se = decay_exponent(snrs, lams)
    slack = se + 1e-12
    return DecayVerdict(
        b=b,
        stderr=se,
        m_min=m_min,
        r=r,
        eps=eps,
        passed=m_min * (b - slack) <= r - eps,
        non_vanishing=b <= slack,
    )


def pep_upper_bound(cov, E, ant, snr):
    """Closed-form ``E exp(-(snr/4m_t) tr(H_w Y H_w^H))``.

    Equals ``prod_k (1 + snr/(4 m_t) lambda_k(Y))^(-m_r)``.
    """
    snr = snr.linear if isinstance(snr, SnrPoint) else float(snr)
    lam = np.clip(np.linalg.eigvalsh(upsilon(cov, E)), 0.0, None)
    return float(np.exp(-ant.m_r * np.sum(np.log1p(snr / (4 * ant.m_t) * lam))))


def pep_monte_carlo(cov, E, ant, snr, trials, seed, route="upsilon", chunk_size=1 << 16):
    """Monte Carlo mean and standard error of the pairwise exponential bound.

    ``route="upsilon"`` averages ``exp(-(snr/4m_t) tr(H_w Y H_w^H))`` over
    i.i.d. ``m_r x N m_t`` matrices ``H_w``. ``route="channel"`` averages
    ``exp(-(snr/4m_t) sum_n ||H_n e_n||^2)`` over correlated channel draws
    and never forms ``Y`` (see the convention note in the module docstring).
    """
    snr = snr.linear if isinstance(snr, SnrPoint) else float(snr)
    E = np.atleast_2d(E)
    c = snr / (4 * ant.m_t)
    if route == "upsilon":
        Y = upsilon(cov, E)
        size = ant.m_r * Y.shape[0]
    elif route != "channel":
        raise ValueError(f"route must be 'upsilon' or 'channel', got {route!r}")
    total = total_sq = 0.0
    for start in range(0, trials, chunk_size):
        count = min(chunk_size, trials - start)
        if route == "upsilon":
            Hw = streams.complex_normals(seed, streams.PEP, start, count, size)
            Hw = Hw.reshape(count, ant.m_r, Y.shape[0])
            q = np.einsum("tij,jk,tik->t", Hw, Y, Hw.conj()).real
        else:
            H = sample_channels(cov, ant, seed, start, count)  # (t, N, m_r, m_t)
            q = np.sum(np.abs(np.einsum("tnij,jn->tni", H, E)) ** 2, axis=(1, 2))
        v = np.exp(-c * q)
        total += v.sum()
        total_sq += (v * v).sum()
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0)
    return mean, float(np.sqrt(var / trials))


def union_bound_value(lam, m_t, m_min, N, r, snr):
    """``snr^(N r) exp(-(lam / 4 m_t) snr^(r / m_min))``."""
    snr = snr.linear if isinstance(snr, SnrPoint) else float(snr)
    return float(np.exp(N * r * np.log(snr) - lam / (4 * m_t) * snr ** (r / m_min)))


@dataclass(frozen=True)
class UnionBoundReport:
    lam: float
    union_bound: float
    pep_sum: float


def union_bound(cov, codebook, ant, snr, r):
    """The union bound for a codebook next to its summed pairwise bounds.

    ``pep_sum`` sums :func:`pep_upper_bound` over ordered pairs, i.e. over
    every possible transmitted codeword.
    """
    if r <= 0:
        raise ValueError("union bound needs r > 0")
    lam = codebook_lambda(cov, codebook)
    cw = codebook.codewords
    pep = sum(pep_upper_bound(cov, cw[i] - cw[j], ant, snr) for i, j in codebook.pairs())
    return UnionBoundReport(
        lam=lam,
        union_bound=union_bound_value(lam, ant.m_t, ant.m_min, codebook.N, r, snr),
        pep_sum=2.0 * pep,
    )


def make_delay_diversity_codebook(ant, N, alphabet_size, snr=None, delay=1, cov=None):
    """PSK repetition code with a cyclic delay per transmit antenna.

    Codeword ``k`` sends the PSK symbol ``s_k = exp(j 2 pi k / M)`` on every
    slot, with antenna ``i`` applying the phase ramp
    ``exp(-j 2 pi i delay n / N)`` (a cyclic delay of ``i * delay`` samples
    in an OFDM system). Distinct codewords therefore differ in every slot.
    With ``delay = L`` and an ``L``-tap cyclic channel the criterion matrix
    picks up ``L * m_t`` distinct taps, i.e. full rank ``rho * m_t``.
    """
    M = int(alphabet_size)
    if M < 2:
        raise ValueError("alphabet needs at least two symbols")
    if delay < 1 or delay * ant.m_t > N:
        raise ValueError(f"need delay * m_t <= N, got delay={delay}, m_t={ant.m_t}, N={N}")
    if cov is not None and N < cov.rank * ant.m_t:
        raise ValueError(f"block length N={N} below rho * m_t = {cov.rank * ant.m_t}")
    symbols = np.exp(2j * np.pi * np.arange(M) / M)
    symbols.real[np.abs(symbols.real) < 1e-15] = 0.0
    symbols.imag[np.abs(symbols.imag) < 1e-15] = 0.0
    i, n = np.arange(ant.m_t)[:, None], np.arange(N)[None, :]
    ramp = np.exp(-2j * np.pi * i * delay * n / N)
    ramp[0] = 1.0
    return Codebook(codewords=symbols[:, None, None] * ramp[None], snr=snr)
