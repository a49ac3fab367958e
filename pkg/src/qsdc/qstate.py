"""Single-qubit state algebra for the protocol.

Pure states are stored as two Python complex amplitudes rather than numpy
arrays: the round simulator touches them a few times per round and small-array
numpy overhead dominates at that size. Density matrices are numpy 2x2 arrays
since they only appear in analysis code.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-12
INV_SQRT2 = 1.0 / math.sqrt(2.0)


class QStateError(ValueError):
    """Invalid state, operator, basis, or probability vector."""


class StateLabel(str, enum.Enum):
    Z0 = "z0"
    Z1 = "z1"
    X0 = "x0"
    X1 = "x1"

    @property
    def basis(self) -> BasisLabel:
        return BasisLabel.Z if self.value[0] == "z" else BasisLabel.X

    @property
    def bit(self) -> int:
        return int(self.value[1])


class BasisLabel(str, enum.Enum):
    Z = "z"
    X = "x"
    CUSTOM = "custom"


@dataclass(frozen=True, slots=True)
class StateVector:
    """a0|0> + a1|1>, normalized."""

    a0: complex
    a1: complex

    def __post_init__(self):
        norm = abs(self.a0) ** 2 + abs(self.a1) ** 2
        if abs(norm - 1.0) > TOL:
            raise QStateError(f"state not normalized: |a0|^2+|a1|^2 = {norm!r}")

    @classmethod
    def normalized(cls, a0: complex, a1: complex) -> StateVector:
        n = math.sqrt(abs(a0) ** 2 + abs(a1) ** 2)
        if n == 0.0:
            raise QStateError("zero vector cannot be normalized")
        return cls(complex(a0) / n, complex(a1) / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    def canonical(self) -> StateVector:
        """Same ray with the first nonzero amplitude made real and positive."""
        lead = self.a0 if abs(self.a0) > TOL else self.a1
        phase = lead / abs(lead)
        return StateVector(self.a0 / phase, self.a1 / phase)

    def equals_up_to_phase(self, other: StateVector, tol: float = TOL) -> bool:
        return abs(abs(inner_product(self, other)) - 1.0) <= tol

    def bloch(self) -> tuple[float, float, float]:
        return ensemble_density([(1.0, self)]).bloch()


@dataclass(frozen=True)
class Operator:
    """2x2 complex matrix; ``entries[r][c]``."""

    entries: tuple[tuple[complex, complex], tuple[complex, complex]]
    name: str = ""

    @classmethod
    def from_matrix(cls, m, name: str = "") -> Operator:
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise QStateError(f"operator must be 2x2, got {m.shape}")
        return cls(((complex(m[0, 0]), complex(m[0, 1])),
                    (complex(m[1, 0]), complex(m[1, 1]))), name)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.entries, dtype=complex)

    @cached_property
    def is_unitary(self) -> bool:
        m = self.matrix
        return bool(np.allclose(m.conj().T @ m, np.eye(2), rtol=0.0, atol=TOL))

    def dagger(self) -> Operator:
        return Operator.from_matrix(self.matrix.conj().T, self.name + "^dag")


IDENTITY = Operator(((1 + 0j, 0j), (0j, 1 + 0j)), "I")
# |0><1| - |1><0|
I_SIGMA_Y = Operator(((0j, 1 + 0j), (-1 + 0j, 0j)), "i*sigma_y")
PROTOCOL_OPERATORS = (IDENTITY, I_SIGMA_Y)

_CANONICAL = {
    StateLabel.Z0: StateVector(1 + 0j, 0j),
    StateLabel.Z1: StateVector(0j, 1 + 0j),
    StateLabel.X0: StateVector(INV_SQRT2 + 0j, INV_SQRT2 + 0j),
    StateLabel.X1: StateVector(INV_SQRT2 + 0j, -INV_SQRT2 + 0j),
}


def prepare(label: StateLabel | str) -> StateVector:
    return _CANONICAL[label if isinstance(label, StateLabel) else StateLabel(label)]


def apply(op: Operator, psi: StateVector) -> StateVector:
    if not op.is_unitary:
        raise QStateError(f"operator {op.name or op.entries!r} is not unitary")
    (m00, m01), (m10, m11) = op.entries
    a0, a1 = psi.a0, psi.a1
    return StateVector(m00 * a0 + m01 * a1, m10 * a0 + m11 * a1)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    return a.a0.conjugate() * b.a0 + a.a1.conjugate() * b.a1


def born_probability(outcome_state: StateVector, psi: StateVector) -> float:
    """|<outcome_state|psi>|^2."""
    amp = inner_product(outcome_state, psi)
    return amp.real * amp.real + amp.imag * amp.imag


@dataclass(frozen=True)
class BasisSpec:
    """An orthonormal measurement basis; outcome ``b`` projects onto ``states[b]``."""

    label: BasisLabel
    states: tuple[StateVector, StateVector]
    name: str = ""

    def __post_init__(self):
        s0, s1 = self.states
        if abs(inner_product(s0, s1)) > TOL:
            raise QStateError("basis states are not orthogonal")
        if not self.name:
            object.__setattr__(self, "name", self.label.value)

    def eigenstate(self, outcome: int) -> StateVector:
        return self.states[outcome]


Z_BASIS = BasisSpec(BasisLabel.Z, (_CANONICAL[StateLabel.Z0], _CANONICAL[StateLabel.Z1]))
X_BASIS = BasisSpec(BasisLabel.X, (_CANONICAL[StateLabel.X0], _CANONICAL[StateLabel.X1]))


def basis_for(label: BasisLabel | str) -> BasisSpec:
    label = BasisLabel(label)
    if label is BasisLabel.Z:
        return Z_BASIS
    if label is BasisLabel.X:
        return X_BASIS
    raise QStateError("custom bases have no canonical instance; build a BasisSpec")


def breidbart_basis() -> BasisSpec:
    """Eigenbasis of (sigma_x + sigma_z)/sqrt(2): Bloch directions at pi/4 in the x-z plane."""
    return BREIDBART_BASIS


_C8 = math.cos(math.pi / 8)
_S8 = math.sin(math.pi / 8)
BREIDBART_BASIS = BasisSpec(
    BasisLabel.CUSTOM,
    (StateVector(_C8 + 0j, _S8 + 0j), StateVector(-_S8 + 0j, _C8 + 0j)),
    name="breidbart",
)


def measure(psi: StateVector, basis: BasisSpec, rng) -> tuple[int, StateVector]:
    """Projective measurement. Draws exactly one uniform from ``rng``."""
    p0 = born_probability(basis.states[0], psi)
    outcome = 0 if rng.uniform() < p0 else 1
    return outcome, basis.states[outcome]


# ------------------------------------------------------------ density matrices

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise QStateError(f"density matrix must be 2x2, got {m.shape}")
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=TOL):
            raise QStateError("density matrix not Hermitian")
        if abs(np.trace(m) - 1.0) > TOL:
            raise QStateError(f"density matrix trace {np.trace(m)!r} != 1")
        if np.linalg.eigvalsh(m).min() < -TOL:
            raise QStateError("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_bloch(cls, r: Sequence[float]) -> DensityMatrix:
        m = 0.5 * np.eye(2, dtype=complex)
        for ri, p in zip(r, _PAULI):
            m = m + 0.5 * ri * p
        return cls(m)

    def bloch(self) -> tuple[float, float, float]:
        return tuple(float(np.trace(self.entries @ p).real) for p in _PAULI)

    def conjugate_by(self, op: Operator) -> DensityMatrix:
        u = op.matrix
        return DensityMatrix(u @ self.entries @ u.conj().T)

    def expectation(self, psi: StateVector) -> float:
        """<psi|rho|psi>."""
        v = psi.as_array()
        return float((v.conj() @ self.entries @ v).real)

    def allclose(self, other: DensityMatrix, tol: float = TOL) -> bool:
        return bool(np.allclose(self.entries, other.entries, rtol=0.0, atol=tol))


def ensemble_density(states: Iterable[tuple[float, StateVector]]) -> DensityMatrix:
    states = list(states)
    probs = [p for p, _ in states]
    if any(p < 0 for p in probs):
        raise QStateError("negative probability in ensemble")
    if abs(math.fsum(probs) - 1.0) > TOL:
        raise QStateError(f"ensemble probabilities sum to {math.fsum(probs)!r}")
    m = np.zeros((2, 2), dtype=complex)
    for p, psi in states:
        v = psi.as_array()
        m += p * np.outer(v, v.conj())
    return DensityMatrix(m)


def trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """0.5 * Tr|r1 - r2|."""
    eig = np.linalg.eigvalsh(r1.entries - r2.entries)
    return float(min(1.0, 0.5 * np.abs(eig).sum()))


def rho0() -> DensityMatrix:
    """What an outsider sees on the A->B leg: |0> or |phi0> with equal weight."""
    return ensemble_density([(0.5, prepare(StateLabel.Z0)), (0.5, prepare(StateLabel.X0))])


def rho1() -> DensityMatrix:
    """rho0 after Bob's i*sigma_y."""
    return rho0().conjugate_by(I_SIGMA_Y)


def helstrom_success(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """Best single-shot discrimination probability at equal priors."""
    return 0.5 * (1.0 + trace_distance(r1, r2))
