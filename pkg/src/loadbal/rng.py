"""Counter-based random streams.

Every random decision in the simulator is a pure function of
``(seed, round, key, tag, word)``: a splitmix64-style hash, so that
per-edge decisions within a round do not depend on processing order and a
round can be evaluated for many trials at once with bit-identical results.

The scalar functions (pure Python ints) and the vectorised ones (numpy
``uint64``) implement the same function; the test-suite checks that they agree.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# purpose tags
TAG_ORIENT = 1
TAG_SHUFFLE = 2
TAG_PROPOSE = 3
TAG_EDGE = 4
TAG_TRIAL = 5


def mix64(z: int) -> int:
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def hash_key(seed: int, rnd: int, key: int, tag: int, word: int = 0) -> int:
    h = mix64(seed & MASK64)
    h = mix64(h ^ (rnd & MASK64))
    h = mix64(h ^ (key & MASK64))
    h = mix64(h ^ (tag & MASK64))
    return mix64(h ^ (word & MASK64))


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def hash_keys(seed, rnd, key, tag, word=0) -> np.ndarray:
    """Vectorised :func:`hash_key`; arguments broadcast against each other."""
    with np.errstate(over="ignore"):
        h = _mix64_np(np.asarray(seed, dtype=np.uint64))
        h = _mix64_np(h ^ np.asarray(rnd, dtype=np.uint64))
        h = _mix64_np(h ^ np.asarray(key, dtype=np.uint64))
        h = _mix64_np(h ^ np.asarray(tag, dtype=np.uint64))
        return _mix64_np(h ^ np.asarray(word, dtype=np.uint64))


def to_unit(h) -> np.ndarray:
    """Map 64-bit hashes to floats in [0, 1) using the top 53 bits."""
    return (np.asarray(h, dtype=np.uint64) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def coin(h) -> np.ndarray:
    """Fair bit from the top bit of a hash."""
    return (np.asarray(h, dtype=np.uint64) >> np.uint64(63)).astype(bool)


def derive_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th independent sub-stream (e.g. a trial)."""
    return hash_key(seed, 0, index, TAG_TRIAL)


def trial_seeds(seed: int, trials: int) -> np.ndarray:
    return np.array([derive_seed(seed, i) for i in range(trials)], dtype=np.uint64)


class CounterStream:
    """A keyed stream; ``flip`` negates every orientation it hands out.

    The flipped stream is the coupling used to run a process on ``K - x``
    with mirrored rounding decisions.
    """

    def __init__(self, seed: int, flip: bool = False):
        self.seed = int(seed) & MASK64
        self.flip = flip

    def flipped(self) -> "CounterStream":
        return CounterStream(self.seed, not self.flip)

    def orientation(self, rnd: int, code: int) -> int:
        phi = 1 if hash_key(self.seed, rnd, code, TAG_ORIENT) >> 63 else -1
        return -phi if self.flip else phi

    def bits(self, rnd: int, code: int, tag: int, count: int) -> list[bool]:
        out: list[bool] = []
        word = 0
        while len(out) < count:
            h = hash_key(self.seed, rnd, code, tag, word)
            take = min(64, count - len(out))
            out.extend(bool((h >> (63 - i)) & 1) for i in range(take))
            word += 1
        return out

    def unit(self, rnd: int, code: int, tag: int) -> float:
        return (hash_key(self.seed, rnd, code, tag) >> 11) * (2.0 ** -53)

    def __repr__(self) -> str:
        return f"CounterStream(seed={self.seed}, flip={self.flip})"
