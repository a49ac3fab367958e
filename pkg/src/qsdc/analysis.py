"""Closed-form security quantities, exact branch enumeration, Monte Carlo estimators."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from . import batch, qstate, rng as rngmod
from .adversary import BasisPolicy, EveKind, EveStrategySpec
from .protocol import Mode, ProtocolConfig
from .qstate import StateLabel

Z95 = 1.959963984540054
BB84_QUBITS_PER_BIT = 4  # baseline constant, not re-derived

SWEEP_HEADER = ("c", "d_exact", "strategy", "survival_formula", "survival_mc", "ci95", "trials")


class DegenerateParams(ValueError):
    pass


class UnsupportedStrategy(ValueError):
    pass


@dataclass(frozen=True)
class SecurityParams:
    c: float
    d: float
    n: int = 1
    i0: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ValueError(f"c must lie in [0, 1], got {self.c}")
        if not 0.0 <= self.d <= 1.0:
            raise ValueError(f"d must lie in [0, 1], got {self.d}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.i0 > 0:
            raise ValueError(f"i0 must be > 0, got {self.i0}")


@dataclass(frozen=True)
class EstimateWithCI:
    point: float
    half_width_95: float
    samples: int

    @property
    def low(self) -> float:
        return self.point - self.half_width_95

    @property
    def high(self) -> float:
        return self.point + self.half_width_95

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    @classmethod
    def from_counts(cls, successes: int, samples: int) -> EstimateWithCI:
        """Normal-approximation binomial interval."""
        p = successes / samples
        return cls(p, Z95 * math.sqrt(p * (1.0 - p) / samples), samples)


# --------------------------------------------------------------- closed forms

def survival_one(params: SecurityParams) -> float:
    """P(Eve eavesdrops one message transfer before a control round catches her)."""
    c, d = params.c, params.d
    denom = 1.0 - c * (1.0 - d)
    if denom <= 0.0:
        raise DegenerateParams("c = 1 and d = 0: no message round ever happens")
    return (1.0 - c) / denom


def survival_n(params: SecurityParams) -> float:
    """Survival over I = n*i0 bits of eavesdropped information."""
    info = params.n * params.i0
    return survival_one(params) ** (info / params.i0)


def effective_rate(c: float) -> float:
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c}")
    return 1.0 - c


def rounds_for_survival(params: SecurityParams, target: float) -> int:
    """Smallest n with survival_n <= target (requires c, d > 0)."""
    s = survival_one(params)
    if s >= 1.0:
        raise DegenerateParams("survival is 1; no number of rounds reaches the target")
    if s == 0.0:
        return 1
    return max(1, math.ceil(math.log(target) / math.log(s) - 1e-12))


def bb84_cost_comparison(n: int, c: float) -> dict:
    """Expected qubits to move n message bits: this protocol vs. the BB84 baseline."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rate = effective_rate(c)
    ours = math.inf if rate == 0.0 else n / rate
    return {"this_protocol_qubits": ours, "bb84_qubits": float(BB84_QUBITS_PER_BIT * n)}


# ---------------------------------------------------------- exact enumeration
#
# Independent of adversary.intervene: the branch rules below are written out
# again from the strategy definitions, and every branch carries its exact
# Born-rule weight.

_Z = qstate.Z_BASIS
_X = qstate.X_BASIS
_BB = qstate.BREIDBART_BASIS


def _policy_bases(policy: BasisPolicy):
    return {
        BasisPolicy.FIXED_Z: ((1.0, _Z),),
        BasisPolicy.FIXED_X: ((1.0, _X),),
        BasisPolicy.RANDOM_ZX: ((0.5, _Z), (0.5, _X)),
        BasisPolicy.BREIDBART: ((1.0, _BB),),
    }[policy]


def _outcomes(psi, basis):
    for b in (0, 1):
        p = qstate.born_probability(basis.states[b], psi)
        if p > 0.0:
            yield p, b, basis.states[b]


def _ab_options(spec: EveStrategySpec):
    if spec.kind in (EveKind.INTERCEPT_RESEND_AB, EveKind.INTERCEPT_RESEND_BOTH):
        return _policy_bases(spec.policy)
    if spec.kind is EveKind.DOS_AB:
        return _policy_bases(BasisPolicy.RANDOM_ZX)
    return None


def _rho_guess(state) -> int:
    return int(qstate.rho1().expectation(state) > qstate.rho0().expectation(state))


@dataclass(frozen=True)
class Branch:
    weight: float
    mode: Mode
    sifted: bool
    detected: bool
    bit_error: Optional[bool]
    eve_correct: Optional[bool]


def enumerate_branches(spec: EveStrategySpec, mode: Mode) -> Iterator[Branch]:
    """Every leaf of one round's probability tree, conditioned on ``mode``."""
    if not isinstance(spec, EveStrategySpec):
        raise UnsupportedStrategy(f"cannot enumerate {spec!r}")
    ab_opts = _ab_options(spec)
    for prep in (StateLabel.Z0, StateLabel.X0):
        w_prep = 0.5
        alice_basis = _Z if prep is StateLabel.Z0 else _X
        psi0 = qstate.prepare(prep)
        ab_leaves = [(1.0, None, None, psi0)]
        if ab_opts is not None:
            ab_leaves = [(wb * p, basis, b, post)
                         for wb, basis in ab_opts for p, b, post in _outcomes(psi0, basis)]
        for w_ab, ab_basis, ab_out, psi1 in ab_leaves:
            if mode is Mode.CONTROL:
                bob = [(0.25, lbl, qstate.prepare(lbl), None)
                       for lbl in (StateLabel.Z0, StateLabel.Z1, StateLabel.X0, StateLabel.X1)]
            else:
                bob = [(0.5, None, qstate.apply(op, psi1), bit)
                       for bit, op in enumerate(qstate.PROTOCOL_OPERATORS)]
            for w_bob, ctrl_label, psi2, bob_bit in bob:
                if spec.kind in (EveKind.INTERCEPT_RESEND_BA, EveKind.MEASURE_ONLY_BA):
                    ba_opts = _policy_bases(spec.policy)
                elif spec.kind is EveKind.INTERCEPT_RESEND_BOTH:
                    ba_opts = ((1.0, ab_basis),)
                else:
                    ba_opts = None
                ba_leaves = [(1.0, None, None, psi2)]
                if ba_opts is not None:
                    ba_leaves = [(wb * p, basis, b, post)
                                 for wb, basis in ba_opts for p, b, post in _outcomes(psi2, basis)]
                for w_ba, ba_basis, ba_out, psi3 in ba_leaves:
                    for p_a, a_out, _ in _outcomes(psi3, alice_basis):
                        w = w_prep * w_ab * w_bob * w_ba * p_a
                        if mode is Mode.CONTROL:
                            sifted = ctrl_label.basis.value == alice_basis.name
                            yield Branch(w, mode, sifted, sifted and a_out != ctrl_label.bit,
                                         None, None)
                            continue
                        # Alice prepared outcome 0 of her basis; a flip reads as 1
                        decoded = a_out
                        if spec.kind is EveKind.INTERCEPT_RESEND_BOTH:
                            guess = int(ba_out != ab_out)
                        elif spec.kind is EveKind.MEASURE_ONLY_BA:
                            guess = _rho_guess(ba_basis.states[ba_out])
                        else:
                            guess = None
                        yield Branch(w, mode, False, False, decoded != bob_bit,
                                     None if guess is None else guess == bob_bit)


def _expect(branches: Iterable[Branch], pick) -> float:
    return math.fsum(b.weight for b in branches if pick(b))


def enumerate_detection(spec: EveStrategySpec) -> float:
    """Exact P(detected | control round)."""
    return _expect(enumerate_branches(spec, Mode.CONTROL), lambda b: b.detected)


def enumerate_sift_rate(spec: EveStrategySpec) -> float:
    return _expect(enumerate_branches(spec, Mode.CONTROL), lambda b: b.sifted)


def enumerate_message_error(spec: EveStrategySpec) -> float:
    """Exact P(Alice decodes the wrong bit | message round)."""
    return _expect(enumerate_branches(spec, Mode.MESSAGE), lambda b: b.bit_error)


def enumerate_guess_accuracy(spec: EveStrategySpec) -> Optional[float]:
    """Exact P(Eve's guess equals Bob's bit | message round); None if she never guesses."""
    branches = list(enumerate_branches(spec, Mode.MESSAGE))
    if all(b.eve_correct is None for b in branches):
        return None
    return _expect(branches, lambda b: bool(b.eve_correct))


# ------------------------------------------------------------- Monte Carlo

def detection_frequency(spec: EveStrategySpec, rounds: int, master_seed: int = 0) -> EstimateWithCI:
    """Fraction of forced control rounds in which Alice detects Eve."""
    rb = batch.simulate_rounds(ProtocolConfig(c=1.0, eve=spec), master_seed,
                               np.arange(rounds, dtype=np.uint64), 0, force_mode=Mode.CONTROL)
    return EstimateWithCI.from_counts(int(rb.detected.sum()), rounds)


@dataclass(frozen=True)
class MessageStats:
    rounds: int
    bit_error: EstimateWithCI
    guess_accuracy: Optional[EstimateWithCI]


def message_statistics(spec: EveStrategySpec, rounds: int, master_seed: int = 0) -> MessageStats:
    """Bit-error rate and Eve's guess accuracy over forced message rounds.

    Bob's bit in round ``i`` is bit ``i`` of the seed's message stream.
    """
    idx = np.arange(rounds, dtype=np.uint64)
    bits = batch.message_bits_for(np.array([master_seed], dtype=np.uint64), rounds)[0]
    rb = batch.simulate_rounds(ProtocolConfig(c=0.0, eve=spec), master_seed, idx, bits,
                               force_mode=Mode.MESSAGE)
    err = EstimateWithCI.from_counts(int((rb.decoded_bit != rb.bob_bit).sum()), rounds)
    guessed = rb.eve_guess >= 0
    acc = None
    if guessed.any():
        acc = EstimateWithCI.from_counts(int((rb.eve_guess[guessed] == rb.bob_bit[guessed]).sum()),
                                         int(guessed.sum()))
    return MessageStats(rounds, err, acc)


def _check_survival_config(config: ProtocolConfig, trials: int) -> None:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if config.c >= 1.0:
        raise DegenerateParams("c = 1: Bob never sends a message round")


def session_survival(config: ProtocolConfig, trials: int) -> EstimateWithCI:
    """Fraction of ``config.message_bits``-bit sessions Eve rides out undetected.

    A session counts when every bit is delivered with no detection and, for
    strategies that guess, Eve produced a guess for each delivered bit.
    Trial ``t`` runs under ``derive_seed(config.master_seed, t)``.
    """
    _check_survival_config(config, trials)
    seeds = rngmod.derive_seeds(config.master_seed, np.arange(trials))
    sb = batch.run_sessions(config, seeds)
    ok = sb.completed
    if config.eve.guesses:
        ok &= sb.eve_guesses == sb.delivered
    return EstimateWithCI.from_counts(int(ok.sum()), trials)


def estimate_survival(config: ProtocolConfig, trials: int) -> EstimateWithCI:
    """Monte Carlo counterpart of ``survival_one``: single-bit sessions."""
    return session_survival(replace(config, message_bits=1, max_rounds=None), trials)


# -------------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepRow:
    c: float
    d_exact: float
    strategy: str
    survival_formula: float
    survival_mc: float
    ci95: float
    trials: int


def sweep(c_values: Sequence[float], strategies: Sequence[EveStrategySpec], trials: int,
          master_seed: int = 0) -> list[SweepRow]:
    """One row per (c, strategy); Monte Carlo trials are seeded per cell."""
    rows = []
    for ci, c in enumerate(c_values):
        for si, spec in enumerate(strategies):
            d = enumerate_detection(spec)
            formula = survival_one(SecurityParams(c, d))
            cell_seed = rngmod.hash64(master_seed, ci, si)
            est = estimate_survival(ProtocolConfig(c=c, master_seed=cell_seed, eve=spec), trials)
            rows.append(SweepRow(c, d, spec.label, formula, est.point, est.half_width_95, trials))
    return rows


def fmt(x: float) -> str:
    """Floats pinned to 10 significant digits."""
    return format(x, ".10g")


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([fmt(r.c), fmt(r.d_exact), r.strategy, fmt(r.survival_formula),
                    fmt(r.survival_mc), fmt(r.ci95), r.trials])
    return buf.getvalue()
