"""Plain-text codebook files.

Layout::

    # comment
    m_t N count
    re,im re,im ...      # codeword 0, row-major m_t x N entries
    ...

Entries are whitespace separated and may wrap across lines freely; ``#``
starts a comment. Floats are written with ``repr`` so files round-trip
bit for bit.
"""

from pathlib import Path

import numpy as np

from .code_criterion import Codebook

__all__ = ["CodebookFormatError", "parse_codebook", "read_codebook", "format_codebook", "write_codebook"]


class CodebookFormatError(ValueError):
    def __init__(self, msg, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.line = line
        self.field = field


def _tokens(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        for col, tok in enumerate(body.split(), start=1):
            yield lineno, col, tok


def parse_codebook(text, snr=None, rate=None):
    toks = list(_tokens(text))
    if len(toks) < 3:
        raise CodebookFormatError("missing header 'm_t N count'", line=toks[-1][0] if toks else 1)
    header = []
    for lineno, col, tok in toks[:3]:
        try:
            v = int(tok)
        except ValueError:
            raise CodebookFormatError(f"header value {tok!r} is not an integer", lineno, col) from None
        if v < 1:
            raise CodebookFormatError(f"header value {v} must be positive", lineno, col)
        header.append(v)
    m_t, N, count = header
    body = toks[3:]
    expected = m_t * N * count
    if len(body) != expected:
        last = body[-1][0] if body else toks[2][0]
        raise CodebookFormatError(
            f"expected {expected} entries (m_t={m_t}, N={N}, count={count}), found {len(body)}",
            line=last,
        )
    values = np.empty(expected, dtype=complex)
    for k, (lineno, col, tok) in enumerate(body):
        parts = tok.split(",")
        if len(parts) != 2:
            raise CodebookFormatError(f"entry {tok!r} is not a 're,im' pair", lineno, col)
        try:
            values[k] = complex(float(parts[0]), float(parts[1]))
        except ValueError:
            raise CodebookFormatError(f"entry {tok!r} has a non-numeric part", lineno, col) from None
    return Codebook(values.reshape(count, m_t, N), snr=snr, rate=rate)


def read_codebook(path, snr=None, rate=None):
    return parse_codebook(Path(path).read_text(encoding="utf-8"), snr=snr, rate=rate)


def format_codebook(codebook):
    cw = codebook.codewords
    count, m_t, N = cw.shape
    lines = [f"{m_t} {N} {count}"]
    for k in range(count):
        lines.append(f"# codeword {k}")
        for row in cw[k]:
            lines.append(" ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def write_codebook(path, codebook):
    Path(path).write_text(format_codebook(codebook), encoding="utf-8", newline="\n")
