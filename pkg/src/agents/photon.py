# src/agents/photon.py
"""Transmissible carriers and the operations every party performs on them."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.quantum.core import Basis, OpCode, PureState, apply_op, measure, measure_first
from src.quantum.labels import StateLabel, op_on_label


@dataclass
class EntangledPair:
    """Joint A-E state shared between a carrier and the attacker's ancilla register."""
    initial: PureState
    state: PureState


@dataclass
class Photon:
    uid: int
    label: Optional[StateLabel] = None
    raw: Optional[PureState] = None
    pair: Optional[EntangledPair] = None
    is_decoy: bool = False
    is_padding: bool = False
    invisible: bool = False
    extra_copies: int = 0
    lost: bool = False

    @property
    def is_signal(self) -> bool:
        return not (self.is_decoy or self.is_padding or self.invisible)

    def apply(self, op: OpCode) -> None:
        if self.label is not None:
            self.label = op_on_label(op, self.label)
        elif self.raw is not None:
            self.raw = apply_op(op, self.raw)
        elif self.pair is not None:
            self.pair.state = apply_op(op, self.pair.state)

    def measure(self, basis: Basis, rng: np.random.Generator) -> int:
        """Projective measurement; the carrier collapses to a labeled eigenstate."""
        if self.label is not None:
            if self.label.basis_trit == int(basis):
                bit = self.label.bit
            else:
                bit = int(rng.integers(2))
        elif self.raw is not None:
            bit, _ = measure(self.raw, basis, rng)
            self.raw = None
        else:
            bit, self.pair.state = measure_first(self.pair.state, basis, rng)
        self.label = StateLabel(bit, int(basis))
        return bit

    def replace(self, label: StateLabel) -> None:
        """Overwrite the payload with a fresh six-state photon."""
        self.label, self.raw, self.pair = label, None, None
