# src/quantum/core.py
"""
Exact state-vector representation of signal qubits and attacker pairs.

Qubits are 2-component complex vectors; attacker pairs are 4-component vectors
in lexicographic tensor order (first factor = transmitted qubit A, second =
retained ancilla E, index i*2+j). Measurement is projective in one of the
three conjugate bases with Born-rule sampling from an injected
numpy Generator.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import IntEnum
from math import sqrt
from typing import TYPE_CHECKING, Tuple

import numpy as np

from src.config.settings import EXACT_TOL, PHASE_TOL
from src.utils.errors import DimensionError, NormError

if TYPE_CHECKING:
    from src.quantum.labels import StateLabel

logger = logging.getLogger(__name__)

_S = 1 / sqrt(2)


class Basis(IntEnum):
    """Measurement basis; the value is the basis trit b (0=Z, 1=X, 2=Y)."""
    Z = 0
    X = 1
    Y = 2


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size not in (2, 4):
            raise DimensionError(f"Unsupported state dimension {amps.size}; expected 2 or 4.")
        norm = float(np.real(np.vdot(amps, amps)))
        if abs(norm - 1.0) > EXACT_TOL:
            raise NormError(f"State is not normalised (squared norm {norm!r}).")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.dimension == other.dimension and bool(
            np.allclose(self.amplitudes, other.amplitudes, atol=EXACT_TOL)
        )

    # equality is tolerance based, so states are unhashable
    __hash__ = None


@dataclass(frozen=True)
class OpCode:
    """Encoding operation U_rot · σ_pauli."""
    pauli: int = 0
    rot: int = 0

    def __post_init__(self):
        if self.pauli not in (0, 1, 2) or self.rot not in (0, 1, 2):
            raise ValueError(f"OpCode trits must be in {{0,1,2}}, got ({self.pauli}, {self.rot}).")

    @property
    def matrix(self) -> np.ndarray:
        return _OP_MATRICES[(self.pauli, self.rot)]


IDENTITY = OpCode(0, 0)

# σ0 = I, σ1 = iσy = |0><1| - |1><0|, σ2 = σz
PAULI_MATRICES = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [-1, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
# U1 cycles Z -> X -> Y -> Z, U2 cycles Z -> Y -> X -> Z
ROTATION_MATRICES = (
    np.eye(2, dtype=complex),
    _S * np.array([[1, -1j], [1, 1j]], dtype=complex),
    _S * np.array([[1, 1], [1j, -1j]], dtype=complex),
)

_OP_MATRICES = {
    (p, r): ROTATION_MATRICES[r] @ PAULI_MATRICES[p]
    for p in range(3) for r in range(3)
}
ALL_OPCODES = tuple(OpCode(p, r) for r in range(3) for p in range(3))

# Eigenvectors indexed [basis][bit]; bit 0 is the +1 eigenstate.
_EIGENVECTORS = (
    (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
    (_S * np.array([1, 1], dtype=complex), _S * np.array([1, -1], dtype=complex)),
    (_S * np.array([1, 1j], dtype=complex), _S * np.array([1, -1j], dtype=complex)),
)
_EIGENSTATES = tuple(tuple(PureState(v) for v in pair) for pair in _EIGENVECTORS)


def eigenvector(basis: Basis, bit: int) -> np.ndarray:
    return _EIGENVECTORS[int(basis)][bit]


def make_state(label: "StateLabel") -> PureState:
    """Amplitude vector of |psi_ab> for a = label.bit, b = label.basis_trit."""
    return _EIGENSTATES[label.basis_trit][label.bit]


def apply_op(op: OpCode, s: PureState) -> PureState:
    """Apply U_rot σ_pauli to a qubit, or to the first factor of a pair."""
    if s.dimension == 2:
        return PureState(op.matrix @ s.amplitudes)
    if s.dimension == 4:
        return PureState(np.kron(op.matrix, np.eye(2)) @ s.amplitudes)
    raise DimensionError(f"apply_op expects dimension 2 or 4, got {s.dimension}.")


def inner(s1: PureState, s2: PureState) -> complex:
    if s1.dimension != s2.dimension:
        raise DimensionError(f"Cannot take overlap of dimensions {s1.dimension} and {s2.dimension}.")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def equal_up_to_phase(s1: PureState, s2: PureState, tol: float = PHASE_TOL) -> bool:
    if s1.dimension != s2.dimension:
        return False
    return abs(inner(s1, s2)) >= 1 - tol


def _sample(p0: float, rng: np.random.Generator) -> int:
    return 0 if rng.random() < p0 else 1


def measure(s: PureState, basis: Basis, rng: np.random.Generator) -> Tuple[int, PureState]:
    """Projective qubit measurement; returns (bit, collapsed eigenstate)."""
    if s.dimension != 2:
        raise DimensionError(f"measure expects a qubit, got dimension {s.dimension}.")
    e0 = _EIGENVECTORS[int(basis)][0]
    p0 = min(1.0, abs(np.vdot(e0, s.amplitudes)) ** 2)
    bit = _sample(p0, rng)
    return bit, _EIGENSTATES[int(basis)][bit]


def make_pair(alpha, beta) -> PureState:
    """|0>|alpha> + |1>|beta> with a 2-level ancilla."""
    alpha = np.asarray(alpha, dtype=complex).reshape(-1)
    beta = np.asarray(beta, dtype=complex).reshape(-1)
    if alpha.size != 2 or beta.size != 2:
        raise DimensionError("alpha and beta must be 2-component ancilla vectors.")
    total = float(np.real(np.vdot(alpha, alpha) + np.vdot(beta, beta)))
    if abs(total - 1.0) > EXACT_TOL:
        raise NormError(f"<a|a> + <b|b> must be 1, got {total!r}.")
    return PureState(np.concatenate([alpha, beta]))


def _project_pair(s: PureState, basis: Basis, rng: np.random.Generator, factor: int) -> Tuple[int, PureState]:
    if s.dimension != 4:
        raise DimensionError(f"Pair measurement expects dimension 4, got {s.dimension}.")
    m = s.amplitudes.reshape(2, 2)
    branches = []
    for bit in (0, 1):
        e = _EIGENVECTORS[int(basis)][bit]
        # remaining factor after projecting the measured one onto e
        rest = np.conj(e) @ m if factor == 0 else m @ np.conj(e)
        branches.append((e, rest, float(np.real(np.vdot(rest, rest)))))
    bit = _sample(branches[0][2], rng)
    e, rest, prob = branches[bit]
    rest = rest / np.sqrt(prob)
    post = np.kron(e, rest) if factor == 0 else np.kron(rest, e)
    return bit, PureState(post)


def measure_first(s: PureState, basis: Basis, rng: np.random.Generator) -> Tuple[int, PureState]:
    """Measure the transmitted qubit A of a pair; the ancilla collapses with it."""
    return _project_pair(s, basis, rng, factor=0)


def measure_second(s: PureState, basis: Basis, rng: np.random.Generator) -> Tuple[int, PureState]:
    """Measure the retained ancilla E of a pair."""
    return _project_pair(s, basis, rng, factor=1)


def first_factor(s: PureState) -> PureState:
    """Qubit A of a product pair state (after either factor was measured)."""
    if s.dimension != 4:
        raise DimensionError(f"first_factor expects dimension 4, got {s.dimension}.")
    m = s.amplitudes.reshape(2, 2)
    col = m[:, int(np.argmax(np.linalg.norm(m, axis=0)))]
    return PureState(col / np.linalg.norm(col))
