"""Vectorized round and session execution.

Mirrors ``protocol.run_round`` / ``protocol.run_session`` draw for draw, so for
the same seeds the arrays here equal the scalar transcripts exactly
(``tests/test_batch.py`` checks this). Monte Carlo estimates at 1e5-1e6 rounds
go through this path; the scalar path stays the reference.

Every qubit on the wire is, up to global phase, an eigenstate of one of the
bases Z, X, Breidbart, so a wire state is a (basis id, bit) pair and Born
probabilities come from a lookup table computed with ``qstate``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import qstate, rng as rngmod
from .adversary import BasisPolicy, EveKind, EveStrategySpec, _GUESS_TABLE
from .protocol import CONTROL_STATES, MaxRoundsExceeded, Mode, ProtocolConfig

Z, X, B = 0, 1, 2
_BASES = (qstate.Z_BASIS, qstate.X_BASIS, qstate.BREIDBART_BASIS)


def _build_tables():
    # p0[state_basis, state_bit, meas_basis] = P(outcome 0)
    p0 = np.empty((3, 2, 3))
    for sb, sbasis in enumerate(_BASES):
        for bit in (0, 1):
            psi = sbasis.states[bit]
            for mb, mbasis in enumerate(_BASES):
                p0[sb, bit, mb] = qstate.born_probability(mbasis.states[0], psi)
    # i*sigma_y must flip the bit within every basis, otherwise the label
    # representation is not closed under Bob's encoding
    for sbasis in _BASES:
        for bit in (0, 1):
            out = qstate.apply(qstate.I_SIGMA_Y, sbasis.states[bit])
            if not out.equals_up_to_phase(sbasis.states[1 - bit]):
                raise AssertionError(f"i*sigma_y does not flip {sbasis.name}{bit}")
    guess = np.array([_GUESS_TABLE[b.name] for b in _BASES], dtype=np.int8)
    return p0, guess


P0, GUESS = _build_tables()
_CTRL_BASIS = np.array([Z if s.basis.value == "z" else X for s in CONTROL_STATES], dtype=np.int8)
_CTRL_BIT = np.array([s.bit for s in CONTROL_STATES], dtype=np.int8)


@dataclass
class RoundBatch:
    """Per-round arrays; -1 marks an absent optional value."""

    control: np.ndarray        # bool
    alice_basis: np.ndarray    # int8, Z or X (Alice prepared bit 0 in it)
    bob_state: np.ndarray      # int8 index into CONTROL_STATES, -1 in message rounds
    bob_bit: np.ndarray        # int8, -1 in control rounds
    alice_outcome: np.ndarray  # int8
    sifted: np.ndarray         # bool
    detected: np.ndarray       # bool
    decoded_bit: np.ndarray    # int8, -1 in control rounds
    eve_guess: np.ndarray      # int8, -1 when Eve makes no guess

    def __len__(self):
        return len(self.control)


def _measure(state_basis, state_bit, meas_basis, u):
    p = P0[state_basis, state_bit, meas_basis]
    return np.where(u < p, 0, 1).astype(np.int8)


class _EveDraws:
    def __init__(self, keys: np.ndarray):
        self.u = rngmod.stream_uniforms(keys, 4)
        self.j = 0

    def next(self):
        col = self.u[:, self.j]
        self.j += 1
        return col


def _eve_basis(policy: BasisPolicy, draws: _EveDraws, n: int):
    if policy is BasisPolicy.FIXED_Z:
        return np.full(n, Z, dtype=np.int8)
    if policy is BasisPolicy.FIXED_X:
        return np.full(n, X, dtype=np.int8)
    if policy is BasisPolicy.BREIDBART:
        return np.full(n, B, dtype=np.int8)
    return np.where(draws.next() < 0.5, Z, X).astype(np.int8)


def simulate_rounds(config: ProtocolConfig, seeds, round_indices, bob_bits=0,
                    force_mode: Optional[Mode] = None) -> RoundBatch:
    """Run one round per element of the broadcast (seed, round_index, bob_bit)."""
    seeds, round_indices, bob_bits = np.broadcast_arrays(
        np.asarray(seeds, dtype=np.uint64), np.asarray(round_indices, dtype=np.uint64),
        np.asarray(bob_bits, dtype=np.int8))
    n = seeds.shape[0] if seeds.ndim else 1
    seeds, round_indices, bob_bits = (np.atleast_1d(a) for a in (seeds, round_indices, bob_bits))
    spec = config.eve
    kind = spec.kind

    ua = rngmod.stream_uniforms(rngmod.stream_keys(seeds, round_indices, rngmod.ALICE), 2)
    ub = rngmod.stream_uniforms(rngmod.stream_keys(seeds, round_indices, rngmod.BOB), 2)
    eve = (_EveDraws(rngmod.stream_keys(seeds, round_indices, rngmod.EVE))
           if spec.attacks else None)

    alice_basis = np.where(ua[:, 0] < 0.5, Z, X).astype(np.int8)
    sb = alice_basis.copy()
    sbit = np.zeros(n, dtype=np.int8)

    ab_basis = ab_out = None
    if kind in (EveKind.INTERCEPT_RESEND_AB, EveKind.INTERCEPT_RESEND_BOTH, EveKind.DOS_AB):
        policy = BasisPolicy.RANDOM_ZX if kind is EveKind.DOS_AB else spec.policy
        ab_basis = _eve_basis(policy, eve, n)
        ab_out = _measure(sb, sbit, ab_basis, eve.next())
        sb, sbit = ab_basis, ab_out

    if force_mode is None:
        control = ub[:, 0] < config.c
    else:
        control = np.full(n, Mode(force_mode) is Mode.CONTROL)
    ctrl_idx = (ub[:, 1] * 4).astype(np.int8)
    sb = np.where(control, _CTRL_BASIS[ctrl_idx], sb)
    sbit = np.where(control, _CTRL_BIT[ctrl_idx], sbit ^ bob_bits).astype(np.int8)

    ba_basis = ba_out = None
    if kind in (EveKind.INTERCEPT_RESEND_BA, EveKind.MEASURE_ONLY_BA):
        ba_basis = _eve_basis(spec.policy, eve, n)
    elif kind is EveKind.INTERCEPT_RESEND_BOTH:
        ba_basis = ab_basis
    if ba_basis is not None:
        ba_out = _measure(sb, sbit, ba_basis, eve.next())
        sb, sbit = ba_basis, ba_out

    outcome = _measure(sb, sbit, alice_basis, ua[:, 1])
    sifted = control & (_CTRL_BASIS[ctrl_idx] == alice_basis)
    detected = sifted & (outcome != _CTRL_BIT[ctrl_idx])
    message = ~control

    if kind is EveKind.INTERCEPT_RESEND_BOTH:
        guess = (ba_out != ab_out).astype(np.int8)
    elif kind is EveKind.MEASURE_ONLY_BA:
        guess = GUESS[ba_basis, ba_out]
    else:
        guess = np.full(n, -1, dtype=np.int8)

    return RoundBatch(
        control=control,
        alice_basis=alice_basis,
        bob_state=np.where(control, ctrl_idx, -1).astype(np.int8),
        bob_bit=np.where(message, bob_bits, -1).astype(np.int8),
        alice_outcome=outcome,
        sifted=sifted,
        detected=detected,
        decoded_bit=np.where(message, outcome, -1).astype(np.int8),
        eve_guess=np.where(message, guess, -1).astype(np.int8),
    )


def message_bits_for(seeds: np.ndarray, n: int) -> np.ndarray:
    """Vectorized ``protocol.message_from_seed``; shape (len(seeds), n)."""
    keys = rngmod.stream_keys(np.asarray(seeds, dtype=np.uint64), 0, rngmod.MESSAGE)
    return (rngmod.stream_uniforms(keys, n) < 0.5).astype(np.int8)


@dataclass
class SessionBatch:
    seeds: np.ndarray
    aborted: np.ndarray         # bool
    abort_round: np.ndarray     # int64, -1 when not aborted
    qubits_used: np.ndarray     # int64
    message_rounds: np.ndarray  # int64
    control_rounds: np.ndarray  # int64
    delivered: np.ndarray       # int64
    bit_errors: np.ndarray      # int64
    eve_guesses: np.ndarray     # int64
    eve_correct: np.ndarray     # int64

    def __len__(self):
        return len(self.seeds)

    @property
    def completed(self) -> np.ndarray:
        return ~self.aborted


def run_sessions(config: ProtocolConfig, seeds: Sequence[int] | np.ndarray,
                 messages: Optional[np.ndarray] = None) -> SessionBatch:
    """``protocol.run_session`` for many master seeds at once.

    ``config.master_seed`` is ignored; session ``i`` uses ``seeds[i]``.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    s = len(seeds)
    nbits = config.message_bits
    bits = message_bits_for(seeds, nbits) if messages is None else np.asarray(messages, np.int8)
    zeros = lambda: np.zeros(s, dtype=np.int64)  # noqa: E731
    out = SessionBatch(seeds, np.zeros(s, bool), np.full(s, -1, np.int64), zeros(), zeros(),
                       zeros(), zeros(), zeros(), zeros(), zeros())
    k = zeros()
    active = np.arange(s)
    r = 0
    while active.size:
        if r >= config.max_rounds:
            raise MaxRoundsExceeded(config.max_rounds, int(k[active].min()), nbits)
        rb = simulate_rounds(config, seeds[active], r, bits[active, k[active]])
        out.qubits_used[active] += 1
        out.control_rounds[active] += rb.control
        det = rb.detected
        out.aborted[active[det]] = True
        out.abort_round[active[det]] = r
        msg = ~rb.control
        m_idx = active[msg]
        out.message_rounds[m_idx] += 1
        out.delivered[m_idx] += 1
        out.bit_errors[m_idx] += rb.decoded_bit[msg] != rb.bob_bit[msg]
        g = rb.eve_guess[msg]
        out.eve_guesses[m_idx] += g >= 0
        out.eve_correct[m_idx] += g == rb.bob_bit[msg]
        k[m_idx] += 1
        active = active[~det & (k[active] < nbits)]
        r += 1
    return out
