"""Counter-based random substreams.

Every Monte Carlo trial owns a fixed slice of a Philox stream keyed by
``(seed, stream)``: trial ``i`` starts at counter ``i * blocks_per_trial``.
Generating trials ``[start, start + count)`` in one call therefore gives
exactly the same numbers as generating each trial on its own, so results do
not depend on chunking or on how many workers share the work.

Complex normals are produced from raw 64-bit words (two words per sample)
rather than through ``Generator.standard_normal``, whose ziggurat sampler
consumes a variable number of words and would break the fixed layout.
"""

import numpy as np

# stream identifiers, one per kind of draw
CHANNEL = 0
REDUCED = 1
PEP = 2

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four uint64 per counter increment
_TWO_POW_M53 = 2.0**-53
_MAX_SEED = 2**64


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def blocks_per_trial(size):
    """Number of Philox counter blocks reserved for ``size`` complex samples."""
    return -(-2 * size // _WORDS_PER_BLOCK)


def complex_normals(seed, stream, start, count, size):
    """Draw i.i.d. CN(0, 1) samples for a contiguous range of trials.

    Parameters
    ----------
    seed : int
        Master seed, ``0 <= seed < 2**64``.
    stream : int
        Stream identifier separating independent kinds of draws.
    start : int
        Index of the first trial.
    count : int
        Number of trials.
    size : int
        Complex samples per trial.

    Returns
    -------
    ndarray, shape (count, size), complex128
        Row ``k`` depends only on ``(seed, stream, start + k, size)``.
    """
    seed = _check_seed(seed)
    if start < 0 or count < 0 or size < 1:
        raise ValueError("start and count must be nonnegative, size positive")
    bpt = blocks_per_trial(size)
    words = bpt * _WORDS_PER_BLOCK
    key = seed | (int(stream) << 64)
    bitgen = np.random.Philox(key=key, counter=int(start) * bpt)
    raw = bitgen.random_raw(count * words).reshape(count, words)[:, : 2 * size]
    # u1 in (0, 1] so the log is finite, u2 in [0, 1)
    u1 = ((raw[:, 0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_POW_M53
    u2 = (raw[:, 1::2] >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53
    # |z|^2 ~ Exp(1) with uniform phase is exactly CN(0, 1)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def chunk_bounds(trials, chunk_size):
    """Split ``range(trials)`` into fixed ``(start, count)`` chunks."""
    return [(a, min(chunk_size, trials - a)) for a in range(0, trials, chunk_size)]
