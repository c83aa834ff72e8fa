# src/quantum/labels.py
"""
Classical label algebra over the six signal states.

The 9x6 action table is derived once at import by applying every encoding
matrix to every six-state vector and matching the result up to global phase.
"""
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, Iterable, List, Tuple

import numpy as np

from src.config.settings import PHASE_TOL
from src.quantum.core import ALL_OPCODES, Basis, OpCode, PureState, apply_op, make_state

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class StateLabel:
    bit: int
    basis_trit: int

    def __post_init__(self):
        if self.bit not in (0, 1) or self.basis_trit not in (0, 1, 2):
            raise ValueError(f"Invalid label (bit={self.bit}, basis_trit={self.basis_trit}).")

    @property
    def basis(self) -> Basis:
        return Basis(self.basis_trit)


ALL_LABELS: Tuple[StateLabel, ...] = tuple(StateLabel(a, b) for b in range(3) for a in range(2))


@dataclass
class EncodingRecord:
    """Per-position (pauli, rot) trits of the encoding Alices, in party order."""
    pauli_trits: List[int] = field(default_factory=list)
    rot_trits: List[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.pauli_trits) != len(self.rot_trits):
            raise ValueError("pauli_trits and rot_trits must have equal length.")

    @classmethod
    def from_ops(cls, ops: Iterable[OpCode]) -> "EncodingRecord":
        ops = list(ops)
        return cls([op.pauli for op in ops], [op.rot for op in ops])

    def ops(self) -> List[OpCode]:
        return [OpCode(p, r) for p, r in zip(self.pauli_trits, self.rot_trits)]


def nearest_label(s: PureState) -> StateLabel:
    """Six-state label with the largest overlap with a qubit state."""
    overlaps = [abs(np.vdot(make_state(lbl).amplitudes, s.amplitudes)) for lbl in ALL_LABELS]
    return ALL_LABELS[int(np.argmax(overlaps))]


def _derive_table() -> Dict[Tuple[OpCode, StateLabel], StateLabel]:
    table = {}
    for op, label in product(ALL_OPCODES, ALL_LABELS):
        image = apply_op(op, make_state(label))
        target = nearest_label(image)
        fidelity = abs(np.vdot(make_state(target).amplitudes, image.amplitudes))
        if fidelity < 1 - PHASE_TOL:
            raise RuntimeError(f"{op} does not map {label} onto a six-state vector.")
        table[(op, label)] = target
    logger.debug("Derived label action table with %d entries.", len(table))
    return table


_ACTION = _derive_table()


def op_on_label(op: OpCode, label: StateLabel) -> StateLabel:
    return _ACTION[(op, label)]


def combined_label(initial: StateLabel, rec: EncodingRecord) -> StateLabel:
    """Fold the encodings of Alice 2..m over Alice 1's label."""
    label = initial
    for op in rec.ops():
        label = op_on_label(op, label)
    return label


def sifted_basis(rec: EncodingRecord, b1: int) -> Basis:
    return Basis((b1 + sum(rec.rot_trits)) % 3)


def solve_ops(prefix: StateLabel, target: StateLabel) -> List[OpCode]:
    """All encoding operations taking `prefix` to `target`."""
    return [op for op in ALL_OPCODES if _ACTION[(op, prefix)] == target]
