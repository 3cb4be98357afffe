"""Height-sensitive token process.

Each node holds a stack of token ids; a token's height is its 1-based position
in the stack. On a matched pair the heavier endpoint (ties: lower id) passes
its top ``ceil((A - B)/2)`` tokens to the lighter one, order preserved. Then
the two stacks, now of lengths ``floor(s/2)`` and ``ceil(s/2)``, swap their
equal-height siblings independently, and for odd ``s`` the unpaired top token
of the receiving stack may cross back.

Randomness per pair: one 64-bit word per 64 sibling levels (tag
``TAG_SHUFFLE``) and the pair orientation (tag ``TAG_ORIENT``) for the excess
token. The excess crosses back exactly when the orientation assigns the
ceiling to the sending endpoint, so the load trajectory coincides with the
standard process driven by the same stream.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .rng import TAG_ORIENT, TAG_SHUFFLE, CounterStream, coin, hash_keys
from .schedule import Matching, ScheduleError


class TokenStateError(ValueError):
    pass


def bits_needed(a: int, b: int) -> int:
    s = a + b
    return s // 2 + (s & 1)


def apply_pair(stacks: list[list[int]], u: int, v: int, swaps: Sequence[bool], excess: bool) -> None:
    """Balance one matched pair in place.

    ``swaps[h]`` swaps the siblings at height ``h+1``; ``excess`` moves the
    unpaired top token (odd sum only) back to the sending endpoint.
    """
    A, B = stacks[u], stacks[v]
    if len(A) > len(B) or (len(A) == len(B) and u < v):
        hi, lo = A, B
    else:
        hi, lo = B, A
    k = (len(hi) - len(lo) + 1) // 2
    if k:
        lo.extend(hi[len(hi) - k:])
        del hi[len(hi) - k:]
    for h in range(len(hi)):
        if swaps[h]:
            hi[h], lo[h] = lo[h], hi[h]
    if len(lo) > len(hi) and excess:
        hi.append(lo.pop())


def sender_of(stacks: list[list[int]], u: int, v: int) -> int:
    a, b = len(stacks[u]), len(stacks[v])
    return u if a > b or (a == b and u < v) else v


def word_bits(word: int, count: int) -> list[bool]:
    return [bool((word >> (63 - i)) & 1) for i in range(count)]


class TokenState:
    """Per-node token stacks (bottom first); tokens are positive ints."""

    def __init__(self, stacks: Sequence[Sequence[int]]):
        self.stacks = [list(s) for s in stacks]
        seen: set[int] = set()
        for s in self.stacks:
            for t in s:
                if t in seen:
                    raise TokenStateError(f"token {t} appears twice")
                seen.add(t)
        self.num_tokens = len(seen)

    @classmethod
    def from_loads(cls, loads: Sequence[int]) -> "TokenState":
        """Tokens 1..|T| numbered in node order, then bottom to top."""
        stacks, nxt = [], 1
        for x in loads:
            x = int(x)
            if x < 0:
                raise TokenStateError("loads must be >= 0")
            stacks.append(list(range(nxt, nxt + x)))
            nxt += x
        return cls(stacks)

    @property
    def n(self) -> int:
        return len(self.stacks)

    def copy(self) -> "TokenState":
        return TokenState(self.stacks)

    def loads(self) -> np.ndarray:
        return np.array([len(s) for s in self.stacks], dtype=np.int64)

    def positions(self) -> dict[int, tuple[int, int]]:
        """token -> (node, height)."""
        return {t: (u, h) for u, s in enumerate(self.stacks) for h, t in enumerate(s, start=1)}

    def location(self, token: int) -> int:
        for u, s in enumerate(self.stacks):
            if token in s:
                return u
        raise TokenStateError(f"unknown token {token}")

    def count_above(self, level: int) -> int:
        """Tokens at height > level, i.e. sum_u max(X_u - level, 0)."""
        return sum(max(len(s) - level, 0) for s in self.stacks)

    def check_invariants(self) -> None:
        total = sum(len(s) for s in self.stacks)
        if total != self.num_tokens:
            raise TokenStateError("token count changed")
        if len({t for s in self.stacks for t in s}) != total:
            raise TokenStateError("duplicate token")

    def __eq__(self, other) -> bool:
        return isinstance(other, TokenState) and self.stacks == other.stacks

    def __repr__(self) -> str:
        return f"TokenState({self.stacks})"


def pair_randomness(stream: CounterStream, rnd: int, u: int, v: int, n: int, a: int, b: int):
    """(swap bits, orientation) for pair [u:v] with current stack sizes a, b."""
    code = u * n + v
    c = (a + b) // 2
    swaps = stream.bits(rnd, code, TAG_SHUFFLE, c) if c else []
    return swaps, stream.orientation(rnd, code)


def step_height(state: TokenState, m: Matching, stream: CounterStream, rnd: int | None = None) -> TokenState:
    """One round of the height-sensitive process, in place."""
    t = m.round if rnd is None else rnd
    n = state.n
    st = state.stacks
    for u, v in m.pairs:
        if v >= n:
            raise ScheduleError(f"matching references node {v} >= n={n}")
        swaps, phi = pair_randomness(stream, t, u, v, n, len(st[u]), len(st[v]))
        ceil_to = u if phi > 0 else v
        apply_pair(st, u, v, swaps, excess=(ceil_to == sender_of(st, u, v)))
    return state


def run_height_fast(state: TokenState, partner_rows: np.ndarray, rounds: np.ndarray, seed: int,
                    flip: bool = False, on_pair=None) -> TokenState:
    """Advance ``state`` over several rounds with vectorised hashing.

    ``partner_rows[i]`` is the partner array of round ``rounds[i]``. Produces
    exactly the trajectory of repeated :func:`step_height`. ``on_pair(u, v,
    before_u, before_v)`` is called after each pair with the pre-step stacks.
    """
    n = state.n
    st = state.stacks
    idx = np.arange(n)
    P = np.asarray(partner_rows)
    R = np.asarray(rounds, dtype=np.int64)[:, None]
    codes = np.minimum(idx, P) * n + np.maximum(idx, P)
    sw = hash_keys(np.uint64(seed), R, codes, TAG_SHUFFLE)
    orient = coin(hash_keys(np.uint64(seed), R, codes, TAG_ORIENT)) ^ flip
    stream = CounterStream(seed, flip)
    for i in range(P.shape[0]):
        row = P[i]
        for u in np.flatnonzero(row > idx).tolist():
            v = int(row[u])
            a, b = len(st[u]), len(st[v])
            c = (a + b) // 2
            if c <= 64:
                swaps = word_bits(int(sw[i, u]), c)
            else:
                swaps = stream.bits(int(R[i, 0]), u * n + v, TAG_SHUFFLE, c)
            ceil_to = u if orient[i, u] else v
            if on_pair is None:
                apply_pair(st, u, v, swaps, ceil_to == sender_of(st, u, v))
            else:
                bu, bv = list(st[u]), list(st[v])
                apply_pair(st, u, v, swaps, ceil_to == sender_of(st, u, v))
                on_pair(u, v, bu, bv)
    return state
