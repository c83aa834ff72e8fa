# src/agents/bob_agent.py
import logging
from dataclasses import dataclass, field
from functools import reduce
from operator import xor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.agents.alice_agent import CheckOutcome, abort_check
from src.agents.photon import Photon
from src.config.schema import ProtocolConfig
from src.quantum.core import Basis

logger = logging.getLogger(__name__)


@dataclass
class BobAgent:
    """Bob l: holds the photons at positions l, l+n, l+2n, ... of Alice m's output."""
    index: int
    photons: Dict[int, Photon] = field(default_factory=dict)
    arrival: Dict[int, Tuple[Basis, int]] = field(default_factory=dict)
    bits: Dict[int, int] = field(default_factory=dict)
    lost: int = 0

    def receive(self, positions: Sequence[Tuple[int, Photon]], memory_mode: str, rng: np.random.Generator) -> None:
        for position, photon in positions:
            if photon.lost:
                self.lost += 1
                continue
            self.photons[position] = photon
            if memory_mode == "measure_immediately":
                basis = Basis(int(rng.integers(3)))
                self.arrival[position] = (basis, photon.measure(basis, rng))


# --- M4 ---
def distribute(photons: List[Photon], n: int) -> List[List[Tuple[int, Photon]]]:
    """Bob l (0-based) receives positions p with p mod n == l."""
    if len(photons) % n:
        raise ValueError(f"{len(photons)} photons cannot be split evenly among {n} Bobs; padding is missing.")
    return [[(p, photons[p]) for p in range(l, len(photons), n)] for l in range(n)]


# --- M5 ---
def bob_check(
    bobs: List[BobAgent],
    board,
    cfg: ProtocolConfig,
    rng: np.random.Generator,
    blocks: int,
) -> CheckOutcome:
    """
    The Bobs pick check_fraction_bob of the blocks j; Bob l measures position
    nj+l in his own random basis and compares with the Alices' announcements.
    Unpicked blocks stay whole for the key.
    """
    outcome = CheckOutcome()
    tally = outcome.tally
    n = len(bobs)
    picks = rng.random(blocks) < cfg.check_fraction_bob
    for j in np.flatnonzero(picks):
        for bob in bobs:
            position = int(j) * n + bob.index
            if position not in bob.photons:
                continue
            photon = bob.photons.pop(position)
            tally.sampled += 1
            if photon.extra_copies > 0:
                tally.multiphoton += 1
                return abort_check(outcome, f"multi-photon signal detected by Bob {bob.index + 1}")
            if position in bob.arrival:
                basis, bit = bob.arrival.pop(position)
            else:
                basis = Basis(int(rng.integers(3)))
                bit = photon.measure(basis, rng)
            implied = board.query(photon.uid, cfg.m, rng)
            if implied is None:
                return abort_check(outcome, f"announcement refused for photon {photon.uid}")
            if implied.basis_trit == int(basis):
                tally.retained += 1
                tally.errors += int(bit != implied.bit)

    outcome.error_rate = tally.error_rate
    if outcome.error_rate > cfg.error_threshold:
        return abort_check(outcome, f"Bob check error rate {outcome.error_rate:.4f} above threshold")
    return outcome


@dataclass
class MeasurementSummary:
    signal_positions: int = 0
    usable: int = 0
    discarded: int = 0

    @property
    def usable_fraction(self) -> Optional[float]:
        return self.usable / self.signal_positions if self.signal_positions else None


# --- M6 ---
def announce_and_measure(bobs: List[BobAgent], board, memory_mode: str, rng: np.random.Generator) -> MeasurementSummary:
    """
    Decoys and padding are announced and discarded; the Alices broadcast their
    basis strings and each Bob derives a bit per remaining position. With quantum
    memory every position is measured in the sifted basis; otherwise only positions
    whose arrival basis already equals the sifted basis are usable.
    """
    summary = MeasurementSummary()
    for bob in bobs:
        for position in sorted(bob.photons):
            photon = bob.photons[position]
            if not photon.is_signal:
                del bob.photons[position]
                bob.arrival.pop(position, None)
                summary.discarded += 1
                continue
            summary.signal_positions += 1
            basis = board.sifted_basis(photon.uid, rng)
            if basis is None:
                continue
            if memory_mode == "quantum_memory":
                bob.bits[position] = photon.measure(basis, rng)
            else:
                guessed, bit = bob.arrival[position]
                if guessed != basis:
                    continue
                bob.bits[position] = bit
            summary.usable += 1
    return summary


def complete_blocks(bobs: List[BobAgent], blocks: int) -> List[int]:
    n = len(bobs)
    return [j for j in range(blocks) if all(j * n + l in bobs[l].bits for l in range(n))]


# --- M7 ---
def final_check(
    bobs: List[BobAgent],
    board,
    cfg: ProtocolConfig,
    rng: np.random.Generator,
    blocks: int,
) -> Tuple[CheckOutcome, List[int], List[int]]:
    """
    Select whole key blocks at random and compare the Bobs' bits with the
    announced labels. Returns the outcome, the complete blocks and the
    blocks left unchecked for the key.
    """
    outcome = CheckOutcome()
    tally = outcome.tally
    n = len(bobs)
    complete = complete_blocks(bobs, blocks)
    picks = rng.random(len(complete)) < cfg.check_fraction_final
    unchecked = [j for j, picked in zip(complete, picks) if not picked]

    for j in (j for j, picked in zip(complete, picks) if picked):
        for l, bob in enumerate(bobs):
            position = j * n + l
            implied = board.query(bob.photons[position].uid, cfg.m, rng)
            if implied is None:
                return abort_check(outcome, f"announcement refused for photon {bob.photons[position].uid}"), complete, []
            tally.sampled += 1
            tally.retained += 1
            tally.errors += int(bob.bits[position] != implied.bit)

    outcome.error_rate = tally.error_rate
    if outcome.error_rate > cfg.error_threshold:
        return abort_check(outcome, f"final check error rate {outcome.error_rate:.4f} above threshold"), complete, []
    return outcome, complete, unchecked


# --- M8 ---
def extract_keys(
    bob_bits: Sequence[Dict[int, int]],
    blocks: Sequence[int],
    reference_bits: Optional[Dict[int, int]] = None,
) -> Tuple[str, str]:
    """XOR of the n Bob bits per block, and the Alices' matching reference bits."""
    n = len(bob_bits)
    key, reference = [], []
    for j in blocks:
        positions = [j * n + l for l in range(n)]
        key.append(reduce(xor, (bob_bits[l][p] for l, p in enumerate(positions)), 0))
        if reference_bits is not None:
            reference.append(reduce(xor, (reference_bits[p] for p in positions), 0))
    return "".join(map(str, key)), "".join(map(str, reference))
