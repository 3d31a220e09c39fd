"""Deterministic sample streams for certification and axiom checks.

Randomness comes from SplitMix64: output k mixes the state
``seed + k*0x9E3779B97F4B7C15`` (mod 2^64), so any slice of the stream
can be produced directly with uint64 array arithmetic.  A draw maps to
``lo + (hi-lo) * ((z >> 11) * 2^-53)``.  The same seed therefore yields
the same samples everywhere, independent of engine, chunking, or numpy
version.

Grid pairs enumerate the upper triangle (x_i, x_j), i <= j, in row-major
order; random pairs are canonicalized to x <= y.  Triples for triangle
checks walk the full grid cube in lexicographic order plus random
triples drawn three doubles at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["PairSampler", "splitmix64", "splitmix64_uniform"]

_GAMMA = np.uint64(0x9E3779B97F4B7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TWO_NEG53 = 2.0 ** -53

CHUNK = 1 << 18


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Outputs start+1 .. start+count of the SplitMix64 stream, as uint64."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed) + _GAMMA * idx
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix64_uniform(seed: int, start: int, count: int, lo: float, hi: float) -> np.ndarray:
    z = splitmix64(seed, start, count)
    u = (z >> np.uint64(11)).astype(np.float64) * _TWO_NEG53
    return lo + (hi - lo) * u


@dataclass(frozen=True)
class PairSampler:
    """Sampling plan: a uniform grid plus seeded random draws.

    ``grid_points`` is the grid resolution on an interval domain (finite
    domains always enumerate their own points), ``random_pairs`` the
    number of extra random pairs (reused as the random-triple budget in
    triangle checks), ``seed`` the SplitMix64 seed.
    """

    grid_points: int = 2001
    random_pairs: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.grid_points < 0 or self.random_pairs < 0:
            raise ValidationError("grid_points and random_pairs must be non-negative")
        if self.grid_points in (0, 1) and self.random_pairs == 0:
            raise ValidationError("sampler needs a grid of at least 2 points or random draws")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")

    def grid(self, domain) -> np.ndarray:
        if domain.kind == "finite":
            return np.asarray(domain.points)
        if self.grid_points < 2:
            return np.zeros(0)
        n = self.grid_points
        i = np.arange(n, dtype=np.float64)
        return domain.lo + (i / (n - 1)) * (domain.hi - domain.lo)

    def points(self, domain) -> np.ndarray:
        """Every value that appears in some pair: grid then random draws."""
        parts = [self.grid(domain)]
        if self.random_pairs and domain.kind == "interval":
            parts.append(
                splitmix64_uniform(self.seed, 0, 2 * self.random_pairs, domain.lo, domain.hi)
            )
        return np.concatenate(parts)

    def iter_pairs(self, domain, chunk: int = CHUNK):
        """Yield (xs, ys) blocks covering grid pairs then random pairs."""
        g = self.grid(domain)
        n = len(g)
        buf_x, buf_y, filled = [], [], 0
        for i in range(n):
            buf_x.append(np.full(n - i, g[i]))
            buf_y.append(g[i:])
            filled += n - i
            if filled >= chunk:
                yield np.concatenate(buf_x), np.concatenate(buf_y)
                buf_x, buf_y, filled = [], [], 0
        if filled:
            yield np.concatenate(buf_x), np.concatenate(buf_y)
        if self.random_pairs and domain.kind == "interval":
            for start in range(0, self.random_pairs, chunk):
                m = min(chunk, self.random_pairs - start)
                raw = splitmix64_uniform(self.seed, 2 * start, 2 * m, domain.lo, domain.hi)
                a = raw[0::2]
                b = raw[1::2]
                yield np.where(b < a, b, a), np.where(b > a, b, a)

    def pair_count(self, domain) -> int:
        n = len(self.grid(domain))
        total = n * (n + 1) // 2
        if domain.kind == "interval":
            total += self.random_pairs
        return total

    def iter_triples(self, domain, chunk: int = CHUNK):
        """Yield (a, b, c) blocks: the grid cube, then random triples."""
        g = self.grid(domain)
        n = len(g)
        buf_a, buf_b, buf_c, filled = [], [], [], 0
        for i in range(n):
            for j in range(n):
                buf_a.append(np.full(n, g[i]))
                buf_b.append(np.full(n, g[j]))
                buf_c.append(g)
                filled += n
                if filled >= chunk:
                    yield np.concatenate(buf_a), np.concatenate(buf_b), np.concatenate(buf_c)
                    buf_a, buf_b, buf_c, filled = [], [], [], 0
        if filled:
            yield np.concatenate(buf_a), np.concatenate(buf_b), np.concatenate(buf_c)
        if self.random_pairs and domain.kind == "interval":
            for start in range(0, self.random_pairs, chunk):
                m = min(chunk, self.random_pairs - start)
                raw = splitmix64_uniform(self.seed, 3 * start, 3 * m, domain.lo, domain.hi)
                yield raw[0::3], raw[1::3], raw[2::3]

    def triple_count(self, domain) -> int:
        n = len(self.grid(domain))
        total = n ** 3
        if domain.kind == "interval":
            total += self.random_pairs
        return total
