"""Alice/Bob round and session execution.

One round: Alice prepares |0> or |phi0>, the qubit crosses A->B, Bob either
encodes a bit (message mode) or swaps in a random BB84 state (control mode),
the qubit crosses B->A, Alice measures in her preparation basis. Eve may act
on either crossing. Each round draws randomness only from its own
``RoundStreams``, so sessions are reproducible from ``master_seed`` alone.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from . import qstate, rng as rngmod
from .adversary import (EveEvent, EveMemory, EveStrategySpec, Leg, NO_EVE,
                        guess_bob_bit, intervene)
from .qstate import StateLabel

CONTROL_STATES = (StateLabel.Z0, StateLabel.Z1, StateLabel.X0, StateLabel.X1)


class ConfigError(ValueError):
    pass


class MaxRoundsExceeded(RuntimeError):
    def __init__(self, max_rounds: int, delivered: int, wanted: int):
        super().__init__(
            f"hit max_rounds={max_rounds} with {delivered}/{wanted} bits delivered "
            "(control probability too close to 1, or cap too small)")
        self.max_rounds = max_rounds
        self.delivered = delivered


class Mode(str, enum.Enum):
    MESSAGE = "message"
    CONTROL = "control"


class BobAction(str, enum.Enum):
    ENCODE_I = "encode_i"
    ENCODE_IY = "encode_iy"
    CONTROL_SUBSTITUTE = "control_substitute"


@dataclass(frozen=True)
class ProtocolConfig:
    c: float = 0.1
    message_bits: int = 1
    master_seed: int = 0
    eve: EveStrategySpec = NO_EVE
    max_rounds: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ConfigError(f"c must lie in [0, 1], got {self.c}")
        if self.message_bits < 1:
            raise ConfigError(f"message_bits must be >= 1, got {self.message_bits}")
        if not 0 <= self.master_seed <= rngmod.MASK64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.max_rounds is None:
            object.__setattr__(self, "max_rounds", 64 * self.message_bits + 1000)
        elif self.max_rounds < self.message_bits:
            raise ConfigError(
                f"max_rounds ({self.max_rounds}) must be >= message_bits ({self.message_bits})")


@dataclass(frozen=True, slots=True)
class RoundTranscript:
    round_index: int
    mode: Mode
    alice_prep: StateLabel
    bob_action: BobAction
    alice_outcome: int
    alice_basis: str
    sifted: bool
    detected: bool
    decoded_bit: Optional[int]
    bob_bit: Optional[int] = None
    bob_state: Optional[StateLabel] = None  # control mode only
    eve_events: tuple[EveEvent, ...] = ()
    eve_guess: Optional[int] = None
    # receipt / announcement exchange on the public channel, in order
    public_events: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "mode": self.mode.value,
            "alice_prep": self.alice_prep.value,
            "bob_action": self.bob_action.value,
            "bob_state": self.bob_state.value if self.bob_state else None,
            "bob_bit": self.bob_bit,
            "eve_events": [e.to_dict() for e in self.eve_events],
            "eve_guess": self.eve_guess,
            "alice_outcome": self.alice_outcome,
            "alice_basis": self.alice_basis,
            "sifted": self.sifted,
            "detected": self.detected,
            "decoded_bit": self.decoded_bit,
            "public_events": list(self.public_events),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d: dict) -> RoundTranscript:
        return cls(
            round_index=d["round_index"],
            mode=Mode(d["mode"]),
            alice_prep=StateLabel(d["alice_prep"]),
            bob_action=BobAction(d["bob_action"]),
            alice_outcome=d["alice_outcome"],
            alice_basis=d["alice_basis"],
            sifted=d["sifted"],
            detected=d["detected"],
            decoded_bit=d["decoded_bit"],
            bob_bit=d.get("bob_bit"),
            bob_state=StateLabel(d["bob_state"]) if d.get("bob_state") else None,
            eve_events=tuple(EveEvent.from_dict(e) for e in d.get("eve_events", ())),
            eve_guess=d.get("eve_guess"),
            public_events=tuple(d.get("public_events", ())),
        )


@dataclass(frozen=True)
class SessionResult:
    transcripts: tuple[RoundTranscript, ...]
    aborted: bool
    abort_round: Optional[int]
    delivered_bits: tuple[tuple[int, int], ...]
    qubits_used: int


@dataclass(frozen=True)
class SessionStats:
    rounds: int
    message_rounds: int
    control_rounds: int
    sifted_control_rounds: int
    aborted: bool
    abort_round: Optional[int]
    delivered_bits: int
    bit_errors: int
    eve_guesses: int
    eve_correct_guesses: int
    qubits_used: int

    @classmethod
    def from_result(cls, result: SessionResult) -> SessionStats:
        ts = result.transcripts
        guesses = [(t.eve_guess, t.bob_bit) for t in ts
                   if t.mode is Mode.MESSAGE and t.eve_guess is not None]
        return cls(
            rounds=len(ts),
            message_rounds=sum(t.mode is Mode.MESSAGE for t in ts),
            control_rounds=sum(t.mode is Mode.CONTROL for t in ts),
            sifted_control_rounds=sum(t.sifted for t in ts),
            aborted=result.aborted,
            abort_round=result.abort_round,
            delivered_bits=len(result.delivered_bits),
            bit_errors=sum(a != b for a, b in result.delivered_bits),
            eve_guesses=len(guesses),
            eve_correct_guesses=sum(g == b for g, b in guesses),
            qubits_used=result.qubits_used,
        )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def decode(alice_prep: StateLabel, alice_outcome: int) -> int:
    """Bob's bit as Alice reads it: 0 if the qubit came back as prepared."""
    prep = alice_prep if isinstance(alice_prep, StateLabel) else StateLabel(alice_prep)
    if prep not in (StateLabel.Z0, StateLabel.X0):
        raise ConfigError(f"Alice only prepares z0 or x0, got {prep.value}")
    return 0 if alice_outcome == prep.bit else 1


_ENCODE = {0: (qstate.IDENTITY, BobAction.ENCODE_I), 1: (qstate.I_SIGMA_Y, BobAction.ENCODE_IY)}
_RECEIPT = ("alice:receipt",)
_CONTROL_ANNOUNCE = ("alice:receipt", "bob:control_run", "bob:announce_state")


def run_round(config: ProtocolConfig, bob_pending_bit: int, streams: rngmod.RoundStreams, *,
              force_mode: Optional[Mode] = None,
              force_alice_prep: Optional[StateLabel] = None,
              force_control_state: Optional[StateLabel] = None) -> RoundTranscript:
    """Execute one round.

    Randomness use is fixed per party: Alice draws prep then her measurement,
    Bob draws mode then (control only) his substitute state, Eve draws in the
    order her strategy acts. The ``force_*`` overrides still consume the draw
    they replace so the remaining draws are unchanged.
    """
    idx = streams.round_index
    alice, bob = streams.alice, streams.bob
    eve_rng = streams.eve if config.eve.attacks else None
    spec = config.eve

    prep = StateLabel.Z0 if alice.uniform() < 0.5 else StateLabel.X0
    if force_alice_prep is not None:
        prep = StateLabel(force_alice_prep)
    qubit = qstate.prepare(prep)

    memory = EveMemory()
    qubit, ev_ab = intervene(spec, Leg.A_TO_B, qubit, memory, eve_rng, idx)

    mode = Mode.CONTROL if bob.uniform() < config.c else Mode.MESSAGE
    if force_mode is not None:
        mode = Mode(force_mode)

    bob_state = None
    bob_bit = None
    if mode is Mode.CONTROL:
        bob_state = CONTROL_STATES[bob.choice_index(4)]
        if force_control_state is not None:
            bob_state = StateLabel(force_control_state)
        returning = qstate.prepare(bob_state)  # Alice's qubit is discarded
        action = BobAction.CONTROL_SUBSTITUTE
    else:
        bob_bit = int(bob_pending_bit)
        op, action = _ENCODE[bob_bit]
        returning = qstate.apply(op, qubit)

    returning, ev_ba = intervene(spec, Leg.B_TO_A, returning, memory, eve_rng, idx)

    basis = qstate.Z_BASIS if prep is StateLabel.Z0 else qstate.X_BASIS
    outcome, _ = qstate.measure(returning, basis, alice)

    if mode is Mode.CONTROL:
        sifted = bob_state.basis.value == basis.name
        detected = sifted and outcome != bob_state.bit
        decoded = None
        guess = None
        public = _CONTROL_ANNOUNCE + (("alice:detected_eve",) if detected else ())
    else:
        sifted = detected = False
        decoded = decode(prep, outcome)
        guess = guess_bob_bit(spec, memory, idx).guessed_bob_bit
        public = _RECEIPT

    return RoundTranscript(
        round_index=idx, mode=mode, alice_prep=prep, bob_action=action,
        alice_outcome=outcome, alice_basis=basis.name, sifted=sifted,
        detected=detected, decoded_bit=decoded, bob_bit=bob_bit,
        bob_state=bob_state, eve_events=ev_ab + ev_ba, eve_guess=guess,
        public_events=public,
    )


def message_from_seed(master_seed: int, n: int) -> list[int]:
    """Bob's default message: n fair bits from the seed's message stream."""
    s = rngmod.RandomStream.for_party(master_seed, 0, rngmod.MESSAGE)
    return [int(s.uniform() < 0.5) for _ in range(n)]


def run_session(config: ProtocolConfig, message: Optional[Sequence[int]] = None) -> SessionResult:
    """Run rounds until every bit is delivered or Alice detects Eve.

    Control rounds consume no message bits. Raises ``MaxRoundsExceeded`` when
    ``config.max_rounds`` rounds pass without finishing.
    """
    n = config.message_bits
    bits = list(message) if message is not None else message_from_seed(config.master_seed, n)
    if len(bits) != n:
        raise ConfigError(f"message has {len(bits)} bits, config expects {n}")
    transcripts: list[RoundTranscript] = []
    delivered: list[tuple[int, int]] = []
    k = 0
    r = 0
    while k < n:
        if r >= config.max_rounds:
            raise MaxRoundsExceeded(config.max_rounds, k, n)
        t = run_round(config, bits[k], rngmod.RoundStreams(config.master_seed, r))
        transcripts.append(t)
        r += 1
        if t.detected:
            return SessionResult(tuple(transcripts), True, t.round_index,
                                 tuple(delivered), len(transcripts))
        if t.mode is Mode.MESSAGE:
            delivered.append((bits[k], t.decoded_bit))
            k += 1
    return SessionResult(tuple(transcripts), False, None, tuple(delivered), len(transcripts))


def write_transcripts(transcripts: Iterable[RoundTranscript], fh) -> None:
    for t in transcripts:
        fh.write(t.to_json())
        fh.write("\n")


def read_transcripts(fh) -> list[RoundTranscript]:
    return [RoundTranscript.from_dict(json.loads(line)) for line in fh if line.strip()]
