"""Deterministic random-stream derivation.

Every stochastic component of the package draws from a PCG64 generator whose
seed is derived from a root seed plus a tuple of context tags (strings or
integers). Large sample batches are generated in canonical chunks of
``CHUNK_SIZE`` rows, each chunk owning the stream derived from
``(root, tags..., chunk_index)``. The chunk grid is part of the determinism
contract: a batch of n rows is always the concatenation of the same chunk
outputs, regardless of how callers schedule or parallelize the chunks.

Gaussian variates come from ``Generator.standard_normal`` (ziggurat); this
choice is fixed because bitwise reproducibility is a package contract.
"""

from __future__ import annotations

import hashlib
from typing import Iterator

import numpy as np

CHUNK_SIZE = 1 << 16

SeedLike = int | str | tuple


def _entropy_words(part) -> list[int]:
    """Map one seed part to non-negative 64-bit words for SeedSequence."""
    if isinstance(part, (tuple, list)):
        out: list[int] = []
        for p in part:
            out.extend(_entropy_words(p))
        return out
    if isinstance(part, (int, np.integer)):
        return [int(part) & 0xFFFFFFFFFFFFFFFF]
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return [int.from_bytes(digest[:8], "little")]
    raise TypeError(f"unsupported seed part: {part!r}")


def seed_sequence(*parts: SeedLike) -> np.random.SeedSequence:
    return np.random.SeedSequence(_entropy_words(parts))


def generator(*parts: SeedLike) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(*parts)))


def chunks(n: int, start: int = 0) -> Iterator[tuple[int, int, int]]:
    """Yield (lo, hi, chunk_index) covering [start, start+n) on the canonical grid."""
    lo = start
    end = start + n
    while lo < end:
        c = lo // CHUNK_SIZE
        hi = min((c + 1) * CHUNK_SIZE, end)
        yield lo, hi, c
        lo = hi


def chunked_normal(shape_cols: int, n: int, start: int, *parts: SeedLike) -> np.ndarray:
    """Standard-normal rows [start, start+n) of the stream keyed by ``parts``.

    Rows are addressed by absolute position on the canonical chunk grid, so
    ``chunked_normal(c, n, 0, k)`` equals the row-wise concatenation of
    ``chunked_normal(c, m, 0, k)`` and ``chunked_normal(c, n-m, m, k)``.
    """
    out = np.empty((n, shape_cols), dtype=np.float64)
    for lo, hi, c in chunks(n, start):
        g = generator(*parts, c)
        offset = lo - c * CHUNK_SIZE
        block = g.standard_normal((hi - c * CHUNK_SIZE, shape_cols))
        out[lo - start : hi - start] = block[offset:]
    return out


def chunked_uniform(n: int, start: int, *parts: SeedLike) -> np.ndarray:
    """Uniform[0,1) values [start, start+n) keyed by ``parts``; same grid contract."""
    out = np.empty(n, dtype=np.float64)
    for lo, hi, c in chunks(n, start):
        g = generator(*parts, c)
        offset = lo - c * CHUNK_SIZE
        block = g.random(hi - c * CHUNK_SIZE)
        out[lo - start : hi - start] = block[offset:]
    return out
