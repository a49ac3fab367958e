"""Eavesdropping strategies on the A->B and B->A legs of the travel qubit."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from . import qstate
from .qstate import BasisSpec, StateVector


class EveKind(str, enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND_AB = "intercept-ab"
    INTERCEPT_RESEND_BA = "intercept-ba"
    INTERCEPT_RESEND_BOTH = "intercept-both"
    MEASURE_ONLY_BA = "measure-ba"
    DOS_AB = "dos-ab"


class BasisPolicy(str, enum.Enum):
    FIXED_Z = "z"
    FIXED_X = "x"
    RANDOM_ZX = "random-zx"
    BREIDBART = "breidbart"


class Leg(str, enum.Enum):
    A_TO_B = "a_to_b"
    B_TO_A = "b_to_a"


class EveAction(str, enum.Enum):
    MEASURED = "measured"
    RESENT = "resent"
    BLOCKED = "blocked"


_DEFAULT_POLICY = {
    EveKind.INTERCEPT_RESEND_AB: BasisPolicy.RANDOM_ZX,
    EveKind.INTERCEPT_RESEND_BA: BasisPolicy.RANDOM_ZX,
    EveKind.INTERCEPT_RESEND_BOTH: BasisPolicy.RANDOM_ZX,
    EveKind.MEASURE_ONLY_BA: BasisPolicy.BREIDBART,
}


@dataclass(frozen=True)
class EveStrategySpec:
    kind: EveKind = EveKind.NONE
    basis_policy: Optional[BasisPolicy] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", EveKind(self.kind))
        if self.basis_policy is not None:
            object.__setattr__(self, "basis_policy", BasisPolicy(self.basis_policy))

    @property
    def policy(self) -> Optional[BasisPolicy]:
        """Effective basis policy; None for strategies that ignore it."""
        if self.kind in (EveKind.NONE, EveKind.DOS_AB):
            return None
        return self.basis_policy or _DEFAULT_POLICY[self.kind]

    @property
    def label(self) -> str:
        p = self.policy
        return self.kind.value if p is None else f"{self.kind.value}/{p.value}"

    @property
    def attacks(self) -> bool:
        return self.kind is not EveKind.NONE

    @property
    def guesses(self) -> bool:
        return self.kind in (EveKind.INTERCEPT_RESEND_BOTH, EveKind.MEASURE_ONLY_BA)

    @classmethod
    def parse(cls, text: str) -> EveStrategySpec:
        """``"intercept-ba/random-zx"`` or ``"none"``."""
        kind, _, policy = text.partition("/")
        return cls(EveKind(kind), BasisPolicy(policy) if policy else None)


NO_EVE = EveStrategySpec()

# every attacking strategy the simulator ships, with the basis policies that
# have closed-form detection probabilities
SHIPPED_ATTACKS = (
    EveStrategySpec(EveKind.INTERCEPT_RESEND_BA, BasisPolicy.RANDOM_ZX),
    EveStrategySpec(EveKind.INTERCEPT_RESEND_BOTH, BasisPolicy.RANDOM_ZX),
    EveStrategySpec(EveKind.MEASURE_ONLY_BA, BasisPolicy.BREIDBART),
    EveStrategySpec(EveKind.INTERCEPT_RESEND_BA, BasisPolicy.FIXED_Z),
)


@dataclass(frozen=True, slots=True)
class EveEvent:
    leg: Leg
    action: EveAction
    round_index: int
    basis: Optional[str] = None
    outcome: Optional[int] = None
    state: Optional[str] = None

    def to_dict(self) -> dict:
        d = {"leg": self.leg.value, "action": self.action.value,
             "round_index": self.round_index}
        if self.action is EveAction.MEASURED:
            d["basis"] = self.basis
            d["outcome"] = self.outcome
        elif self.action is EveAction.RESENT:
            d["state"] = self.state
        return d

    @classmethod
    def from_dict(cls, d: dict) -> EveEvent:
        return cls(Leg(d["leg"]), EveAction(d["action"]), d["round_index"],
                   d.get("basis"), d.get("outcome"), d.get("state"))


@dataclass(frozen=True, slots=True)
class EveGuess:
    round_index: int
    guessed_bob_bit: Optional[int]


@dataclass(slots=True)
class EveMemory:
    """Eve's classical notes for a single round."""

    ab_basis: Optional[BasisSpec] = None
    ab_outcome: Optional[int] = None
    ba_basis: Optional[BasisSpec] = None
    ba_outcome: Optional[int] = None


def _choose_basis(policy: BasisPolicy, rng) -> BasisSpec:
    if policy is BasisPolicy.FIXED_Z:
        return qstate.Z_BASIS
    if policy is BasisPolicy.FIXED_X:
        return qstate.X_BASIS
    if policy is BasisPolicy.BREIDBART:
        return qstate.BREIDBART_BASIS
    return qstate.Z_BASIS if rng.uniform() < 0.5 else qstate.X_BASIS


def _measure_events(leg, basis, outcome, round_index, resend):
    measured = EveEvent(leg, EveAction.MEASURED, round_index, basis.name, outcome)
    if not resend:
        return (measured,)
    return measured, EveEvent(leg, EveAction.RESENT, round_index,
                              state=f"{basis.name[0]}{outcome}")


def intervene(spec: EveStrategySpec, leg: Leg, qubit: StateVector, memory: EveMemory,
              rng, round_index: int = 0) -> tuple[Optional[StateVector], tuple[EveEvent, ...]]:
    """Let Eve act on one leg. Returns the qubit she forwards and her events.
    Intercept-resend kinds emit a Measured event followed by a Resent event;
    MeasureOnlyBA forwards the collapsed qubit and emits Measured only.
    """
    kind = spec.kind
    if kind is EveKind.NONE:
        return qubit, ()
    if leg is Leg.A_TO_B:
        if kind in (EveKind.INTERCEPT_RESEND_AB, EveKind.INTERCEPT_RESEND_BOTH):
            basis = _choose_basis(spec.policy, rng)
        elif kind is EveKind.DOS_AB:
            basis = _choose_basis(BasisPolicy.RANDOM_ZX, rng)
        else:
            return qubit, ()
        outcome, post = qstate.measure(qubit, basis, rng)
        memory.ab_basis, memory.ab_outcome = basis, outcome
        return post, _measure_events(leg, basis, outcome, round_index, True)

    if kind is EveKind.INTERCEPT_RESEND_BA or kind is EveKind.MEASURE_ONLY_BA:
        basis = _choose_basis(spec.policy, rng)
    elif kind is EveKind.INTERCEPT_RESEND_BOTH:
        # she reads Bob's flip in the basis she resent on the way out
        basis = memory.ab_basis
    else:
        return qubit, ()
    outcome, post = qstate.measure(qubit, basis, rng)
    memory.ba_basis, memory.ba_outcome = basis, outcome
    resend = kind is not EveKind.MEASURE_ONLY_BA
    return post, _measure_events(leg, basis, outcome, round_index, resend)


def _closer_to_rho1(basis: BasisSpec) -> tuple[int, int]:
    r0, r1 = qstate.rho0(), qstate.rho1()
    return tuple(int(r1.expectation(s) > r0.expectation(s)) for s in basis.states)


_GUESS_TABLE = {
    b.name: _closer_to_rho1(b)
    for b in (qstate.Z_BASIS, qstate.X_BASIS, qstate.BREIDBART_BASIS)
}


def guess_bob_bit(spec: EveStrategySpec, memory: EveMemory, round_index: int = 0) -> EveGuess:
    """Eve's estimate of Bob's encoding after she has seen the B->A qubit."""
    if spec.kind is EveKind.INTERCEPT_RESEND_BOTH and memory.ba_outcome is not None:
        return EveGuess(round_index, int(memory.ba_outcome != memory.ab_outcome))
    if spec.kind is EveKind.MEASURE_ONLY_BA and memory.ba_outcome is not None:
        return EveGuess(round_index, _GUESS_TABLE[memory.ba_basis.name][memory.ba_outcome])
    return EveGuess(round_index, None)
