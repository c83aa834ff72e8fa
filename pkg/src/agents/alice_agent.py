# src/agents/alice_agent.py
import logging
from dataclasses import dataclass, field
from itertools import count
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.agents.photon import Photon
from src.config.schema import ProtocolConfig
from src.quantum.core import Basis, OpCode
from src.quantum.labels import ALL_LABELS, StateLabel
from src.reports.schema import StageTally
from src.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

# Origin parties record the label they prepared; encoding parties the operation applied.
Entry = Union[StateLabel, OpCode]


def entry_trit(entry: Entry) -> int:
    """Publicly announced basis contribution of an entry (b value)."""
    return entry.basis_trit if isinstance(entry, StateLabel) else entry.rot


def random_label(rng: np.random.Generator) -> StateLabel:
    return ALL_LABELS[int(rng.integers(len(ALL_LABELS)))]


class AliceAgent:
    """Honest encoding party holding a private ledger uid -> entry."""
    dishonest = False

    def __init__(self, index: int):
        self.index = index
        self.ledger: Dict[int, Entry] = {}

    def holds(self, uid: int) -> bool:
        return uid in self.ledger

    def announce(self, uid: int, participants: Sequence[int], public: Dict[int, Entry], rng: np.random.Generator) -> Optional[Entry]:
        return self.ledger.get(uid)

    def announce_trit(self, uid: int, participants: Sequence[int], public: Dict[int, int], rng: np.random.Generator) -> Optional[int]:
        entry = self.ledger.get(uid)
        return None if entry is None else entry_trit(entry)

    def prepare(self, cfg: ProtocolConfig, rng: np.random.Generator) -> List[Photon]:
        return alice1_prepare(cfg, rng, self)

    def encode(self, photons: List[Photon], cfg: ProtocolConfig, rng: np.random.Generator, uids: Iterator[int]) -> List[Photon]:
        photons, _, _ = alice_encode(self.index, photons, cfg, rng, self, uids)
        return photons

    def __repr__(self):
        return f"{type(self).__name__}(index={self.index}, entries={len(self.ledger)})"


# --- M1 ---
def alice1_prepare(cfg: ProtocolConfig, rng: np.random.Generator, alice: Optional[AliceAgent] = None) -> List[Photon]:
    """n*N signal photons with uniformly random (a1, b1)."""
    alice = alice or AliceAgent(1)
    total = cfg.n * cfg.N
    bits = rng.integers(2, size=total)
    trits = rng.integers(3, size=total)
    photons = []
    for uid in range(total):
        label = StateLabel(int(bits[uid]), int(trits[uid]))
        alice.ledger[uid] = label
        photons.append(Photon(uid=uid, label=label))
    logger.info(f"[[Alice 1]]: Prepared {total} signal photons.")
    return photons


def insert_decoys(alice: AliceAgent, photons: List[Photon], amount: int, rng: np.random.Generator, uids: Iterator[int]) -> None:
    """Insert `amount` random six-state decoys at uniformly random positions."""
    for _ in range(amount):
        label = random_label(rng)
        decoy = Photon(uid=next(uids), label=label, is_decoy=True)
        alice.ledger[decoy.uid] = label
        photons.insert(int(rng.integers(len(photons) + 1)), decoy)


def _pauli_probabilities(cfg: ProtocolConfig) -> np.ndarray:
    weights = np.asarray(cfg.pauli_weights, dtype=float)
    if weights.shape != (3,) or np.any(weights <= 0):
        raise ConfigurationError(
            f"Encoding Alices must use all three pauli codes with nonzero probability, got weights {cfg.pauli_weights}."
        )
    return weights / weights.sum()


# --- M2 / M3 ---
def alice_encode(
    i: int,
    photons: List[Photon],
    cfg: ProtocolConfig,
    rng: np.random.Generator,
    alice: Optional[AliceAgent] = None,
    uids: Optional[Iterator[int]] = None,
    forced_op: Optional[OpCode] = None,
) -> Tuple[List[Photon], List[int], List[int]]:
    """
    Alice i applies a random U_rot sigma_pauli to every photon and inserts her decoys.

    Returns the outgoing photons and the trit strings (A_i, B_i) in the order the
    photons arrived. `forced_op` pins every operation (used to exercise the
    all-identity case).
    """
    if not 2 <= i <= cfg.m:
        raise ConfigurationError(f"Encoding party index must be in 2..{cfg.m}, got {i}.")
    probabilities = _pauli_probabilities(cfg)
    alice = alice or AliceAgent(i)
    uids = uids if uids is not None else count(cfg.n * cfg.N + 1_000_000 * i)

    paulis = rng.choice(3, size=len(photons), p=probabilities)
    rots = rng.integers(3, size=len(photons))
    a_string, b_string = [], []
    for photon, pauli, rot in zip(photons, paulis, rots):
        op = forced_op or OpCode(int(pauli), int(rot))
        photon.apply(op)
        alice.ledger[photon.uid] = op
        a_string.append(op.pauli)
        b_string.append(op.rot)

    photons = list(photons)
    insert_decoys(alice, photons, cfg.decoys[i - 2], rng, uids)
    logger.info(f"[[Alice {i}]]: Encoded {len(a_string)} photons, inserted {cfg.decoys[i - 2]} decoys.")
    return photons, a_string, b_string


def alice_pad(alice: AliceAgent, photons: List[Photon], n: int, rng: np.random.Generator, uids: Iterator[int]) -> List[Photon]:
    """Alice m appends random labeled photons until the count is a multiple of n."""
    missing = (-len(photons)) % n
    for _ in range(missing):
        label = random_label(rng)
        pad = Photon(uid=next(uids), label=label, is_padding=True)
        alice.ledger[pad.uid] = label
        photons.append(pad)
    if missing:
        logger.info(f"[[Alice {alice.index}]]: Appended {missing} padding photons.")
    return photons


@dataclass
class CheckOutcome:
    verdict: str = "continue"
    error_rate: float = 0.0
    survivors: List = field(default_factory=list)
    tally: StageTally = field(default_factory=StageTally)
    reason: Optional[str] = None

    @property
    def aborted(self) -> bool:
        return self.verdict == "abort"


def abort_check(outcome: CheckOutcome, reason: str) -> CheckOutcome:
    outcome.verdict = "abort"
    outcome.reason = reason
    outcome.error_rate = outcome.tally.error_rate
    return outcome


def hop_check(
    receiver_index: int,
    incoming: List[Photon],
    board,
    cfg: ProtocolConfig,
    rng: np.random.Generator,
) -> CheckOutcome:
    """
    Check run by Alice `receiver_index` on the photons received from her predecessor.

    Invisible photons are filtered first. Each remaining photon is sampled with
    probability check_fraction_hop; a sampled photon carrying extra copies aborts
    immediately. Samples are measured in a random basis and compared with the label
    implied by the predecessors' announcements; only basis matches are retained.
    """
    if not 2 <= receiver_index <= cfg.m:
        raise ConfigurationError(f"hop_check receiver must be Alice 2..{cfg.m}, got {receiver_index}.")
    outcome = CheckOutcome()
    tally = outcome.tally

    arrived = [p for p in incoming if not p.lost]
    visible = [p for p in arrived if not p.invisible]
    tally.filtered = len(arrived) - len(visible)

    picks = rng.random(len(visible)) < cfg.check_fraction_hop
    outcome.survivors = [p for p, picked in zip(visible, picks) if not picked]
    samples = [p for p, picked in zip(visible, picks) if picked]
    tally.sampled = len(samples)

    for photon in samples:
        if photon.extra_copies > 0:
            tally.multiphoton += 1
            return abort_check(outcome, f"multi-photon signal detected at Alice {receiver_index}")
        basis = Basis(int(rng.integers(3)))
        bit = photon.measure(basis, rng)
        implied = board.query(photon.uid, receiver_index - 1, rng)
        if implied is None:
            return abort_check(outcome, f"announcement refused for photon {photon.uid}")
        if implied.basis_trit == int(basis):
            tally.retained += 1
            tally.errors += int(bit != implied.bit)

    outcome.error_rate = tally.error_rate
    if outcome.error_rate > cfg.error_threshold:
        return abort_check(outcome, f"error rate {outcome.error_rate:.4f} above threshold at Alice {receiver_index}")
    return outcome
