"""Key-transfer variant: Bob sends random bits, both sides hash them down.

A session that ends in detection yields no key material at all. There is no
error reconciliation, so an undetected attack that corrupts raw bits (the
A->B denial-of-service) shows up as an Alice/Bob key mismatch.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.linalg import toeplitz

from . import rng as rngmod
from .protocol import ProtocolConfig, SessionResult, run_session


class KeyStatus(str, enum.Enum):
    ESTABLISHED = "established"
    ABORTED = "aborted"


@dataclass(frozen=True)
class KeySession:
    raw_bits: int
    final_bits: int
    toeplitz_seed: int = 0

    def __post_init__(self):
        if self.raw_bits < 1 or self.final_bits < 1:
            raise ValueError("raw_bits and final_bits must be >= 1")
        if self.final_bits > self.raw_bits:
            raise ValueError(f"final_bits ({self.final_bits}) > raw_bits ({self.raw_bits})")
        if not 0 <= self.toeplitz_seed <= rngmod.MASK64:
            raise ValueError("toeplitz_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class KeyOutcome:
    status: KeyStatus
    alice_key: Optional[np.ndarray] = None
    bob_key: Optional[np.ndarray] = None
    session: Optional[SessionResult] = None

    @property
    def established(self) -> bool:
        return self.status is KeyStatus.ESTABLISHED

    @property
    def keys_match(self) -> bool:
        return self.established and bool(np.array_equal(self.alice_key, self.bob_key))


def toeplitz_matrix(toeplitz_seed: int, m: int, n: int) -> np.ndarray:
    """M x N binary Toeplitz matrix; its M+N-1 free bits come from the seed."""
    bits = np.random.default_rng(toeplitz_seed).integers(0, 2, size=m + n - 1, dtype=np.uint8)
    # T[i, j] = col[i - j] below the diagonal, row[j - i] above; they share T[0, 0]
    first_col = bits[:m]
    first_row = np.concatenate([bits[:1], bits[m:]])
    return toeplitz(first_col, first_row)


def privacy_amplify(raw, toeplitz_seed: int, m: int) -> np.ndarray:
    """T @ raw over GF(2)."""
    raw = np.asarray(raw, dtype=np.uint8)
    n = raw.shape[-1]
    if m > n:
        raise ValueError(f"cannot amplify {n} bits to {m} bits")
    if m < 1:
        raise ValueError("output length must be >= 1")
    t = toeplitz_matrix(toeplitz_seed, m, n).astype(np.int64)
    return ((t @ raw.astype(np.int64).T).T % 2).astype(np.uint8)


def raw_key_bits(master_seed: int, n: int) -> list[int]:
    """Bob's secret random bits for a key session."""
    s = rngmod.RandomStream.for_party(master_seed, 0, rngmod.RAW_KEY)
    return [int(s.uniform() < 0.5) for _ in range(n)]


def run_key_transfer(config: ProtocolConfig, key_session: KeySession) -> KeyOutcome:
    n = key_session.raw_bits
    cfg = config if config.message_bits == n else replace(config, message_bits=n, max_rounds=None)
    bob_raw = raw_key_bits(config.master_seed, n)
    result = run_session(cfg, bob_raw)
    if result.aborted:
        return KeyOutcome(KeyStatus.ABORTED, session=result)
    alice_raw = [a for _, a in result.delivered_bits]
    m, seed = key_session.final_bits, key_session.toeplitz_seed
    return KeyOutcome(KeyStatus.ESTABLISHED,
                      alice_key=privacy_amplify(alice_raw, seed, m),
                      bob_key=privacy_amplify(bob_raw, seed, m),
                      session=result)


def to_hex(bits) -> str:
    """Lowercase hex, most significant bit first, zero-padded on the left."""
    bits = [int(b) for b in bits]
    if not bits:
        return ""
    value = int("".join(map(str, bits)), 2)
    return format(value, f"0{(len(bits) + 3) // 4}x")
