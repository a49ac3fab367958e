"""Counter-based random streams.

Every random draw in a simulation is addressed by ``(master_seed, index, party)``
plus a position within that party's stream, so a round's outcome never depends
on how many draws other rounds or other parties made. The generator is
SplitMix64: a stream is a 64-bit key, draw ``j`` is ``finalize(key + (j+1)*GOLDEN)``.
Because each draw is a closed-form function of its address, the same numbers
can be produced one at a time (``RandomStream``) or as numpy arrays
(``stream_uniforms``), and the two agree bit for bit.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53

# party tags
ALICE = 1
BOB = 2
EVE = 3
MESSAGE = 4
TRIAL = 5
RAW_KEY = 6


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64(z: int) -> int:
    """One SplitMix64 step applied to ``z``."""
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def hash64(*words: int) -> int:
    """Chain ``mix64`` over the words; order matters."""
    h = 0
    for w in words:
        h = mix64(h ^ (w & MASK64))
    return h


def stream_key(master_seed: int, index: int, party: int) -> int:
    return hash64(master_seed, index, party)


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for the ``index``-th independent trial under ``master_seed``."""
    return hash64(master_seed, index, TRIAL)


class RandomStream:
    """Sequential view of one SplitMix64 stream.

    ``uniform`` returns doubles on the 2**-53 grid in [0, 1).
    """

    __slots__ = ("_state", "draws")

    def __init__(self, key: int):
        self._state = key & MASK64
        self.draws = 0

    @classmethod
    def for_party(cls, master_seed: int, index: int, party: int) -> RandomStream:
        return cls(stream_key(master_seed, index, party))

    def next_u64(self) -> int:
        self._state = z = (self._state + GOLDEN) & MASK64
        self.draws += 1
        z = ((z ^ (z >> 30)) * _M1) & MASK64
        z = ((z ^ (z >> 27)) * _M2) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        self._state = z = (self._state + GOLDEN) & MASK64
        self.draws += 1
        z = ((z ^ (z >> 30)) * _M1) & MASK64
        z = ((z ^ (z >> 27)) * _M2) & MASK64
        return ((z ^ (z >> 31)) >> 11) * _INV_2_53

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    def choice_index(self, k: int) -> int:
        return int(self.uniform() * k)


@lru_cache(maxsize=256)
def _seed_prefix(master_seed: int) -> int:
    return mix64(master_seed & MASK64)


class RoundStreams:
    """The three per-party streams of one protocol round.

    Keys equal ``stream_key(master_seed, round_index, party)``; the shared
    (seed, round) prefix of the hash chain is computed once, and Eve's stream
    is only keyed when first touched.
    """

    __slots__ = ("round_index", "alice", "bob", "_base", "_eve")

    def __init__(self, master_seed: int, round_index: int):
        self.round_index = round_index
        self._base = base = mix64(_seed_prefix(master_seed) ^ (round_index & MASK64))
        self.alice = RandomStream(mix64(base ^ ALICE))
        self.bob = RandomStream(mix64(base ^ BOB))
        self._eve = None

    @property
    def eve(self) -> RandomStream:
        if self._eve is None:
            self._eve = RandomStream(mix64(self._base ^ EVE))
        return self._eve


# ---------------------------------------------------------------- vectorized

_U = np.uint64


# uint64 arithmetic wraps by design; numpy only warns for 0-d operands
@np.errstate(over="ignore")
def _finalize_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _U(_M1)
    z = (z ^ (z >> _U(27))) * _U(_M2)
    return z ^ (z >> _U(31))


@np.errstate(over="ignore")
def mix64_np(z: np.ndarray) -> np.ndarray:
    return _finalize_np(z + _U(GOLDEN))


def hash64_np(*words) -> np.ndarray:
    """Vectorized ``hash64``; arguments broadcast (ints or uint64 arrays)."""
    arrays = [np.asarray(w, dtype=np.uint64) if not isinstance(w, int)
              else np.uint64(w & MASK64) for w in words]
    shape = np.broadcast_shapes(*(np.shape(a) for a in arrays))
    h = np.zeros(shape, dtype=np.uint64)
    for a in arrays:
        h = mix64_np(h ^ a)
    return h


def stream_keys(master_seeds, indices, party: int) -> np.ndarray:
    return hash64_np(master_seeds, indices, party)


def stream_u64(keys: np.ndarray, count: int) -> np.ndarray:
    """First ``count`` outputs of each stream; shape ``keys.shape + (count,)``."""
    keys = np.asarray(keys, dtype=np.uint64)
    steps = (np.arange(1, count + 1, dtype=np.uint64) * _U(GOLDEN))
    return _finalize_np(keys[..., None] + steps)


def stream_uniforms(keys: np.ndarray, count: int) -> np.ndarray:
    return (stream_u64(keys, count) >> _U(11)).astype(np.float64) * _INV_2_53


def derive_seeds(master_seed: int, indices) -> np.ndarray:
    return hash64_np(master_seed, np.asarray(indices, dtype=np.uint64), TRIAL)
