# src/agents/attacker_agent.py
"""
Adversaries of the protocol.

External attackers sit on one quantum link (the link leaving Alice `link`;
link m feeds the Bobs). A dishonest Alice i0 replaces every photon she forwards
with a state she controls and answers announcements so that the implied label
matches what she believes the carrier holds.
"""
import logging
from itertools import count
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.agents.alice_agent import AliceAgent, Entry, entry_trit, insert_decoys, random_label
from src.agents.photon import EntangledPair, Photon
from src.config.schema import AttackStrategy, ProtocolConfig
from src.config.settings import PHASE_TOL
from src.quantum.core import IDENTITY, Basis, OpCode, PureState, eigenvector, make_pair, make_state, measure_second
from src.quantum.labels import StateLabel, nearest_label, op_on_label, solve_ops
from src.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


class KeyPredictor:
    """Key-bit prediction from a label known at the output of Alice `point`."""
    point: int = 0

    def __init__(self):
        self.known: Dict[int, Tuple[StateLabel, bool]] = {}

    def knowledge(self, uid: int, rng: np.random.Generator) -> Optional[Tuple[StateLabel, bool]]:
        return self.known.get(uid)

    def predict(self, uid: int, board, m: int, rng: np.random.Generator) -> Tuple[int, bool]:
        """
        Predicted Bob bit for a position and whether it is certain.

        Uses the public basis strings; unknown pauli trits of later Alices are
        taken as 0.
        """
        known = self.knowledge(uid, rng)
        trits = board.public_trits.get(uid)
        if known is None or trits is None:
            return int(rng.integers(2)), False
        label, exact = known
        basis_here = sum(t for i, t in trits.items() if i <= self.point) % 3
        if label.basis_trit != basis_here:
            return int(rng.integers(2)), False
        downstream = sorted(i for i in trits if i > self.point)
        for i in downstream:
            label = op_on_label(OpCode(0, trits[i]), label)
        return label.bit, exact and not downstream


class ExternalAttacker(KeyPredictor):
    dishonest = False

    def __init__(self, link: int):
        super().__init__()
        self.point = link
        self.tampered = 0

    def on_link(self, k: int, photons: List[Photon], rng: np.random.Generator) -> List[Photon]:
        if k != self.point:
            return photons
        return self.intercept(photons, rng)

    def intercept(self, photons: List[Photon], rng: np.random.Generator) -> List[Photon]:
        return photons


class InterceptResend(ExternalAttacker):
    """Measure every photon in a random basis and resend the collapsed state."""

    def intercept(self, photons, rng):
        for photon in photons:
            if photon.lost or photon.invisible:
                continue
            basis = Basis(int(rng.integers(3)))
            photon.measure(basis, rng)
            self.known[photon.uid] = (photon.label, True)
            self.tampered += 1
        logger.info(f"[[Eve]]: Intercepted and resent {self.tampered} photons on link {self.point}.")
        return photons


class InvisibleProbe(ExternalAttacker):
    """Append invisible probe photons; a receiver's filter removes all of them."""

    def __init__(self, link: int, fraction: float):
        super().__init__(link)
        self.fraction = fraction
        self._uids = count(-1, -1)

    def intercept(self, photons, rng):
        out = []
        for photon in photons:
            out.append(photon)
            if rng.random() < self.fraction:
                out.append(Photon(uid=next(self._uids), label=random_label(rng), invisible=True))
                self.tampered += 1
        return out


class TrojanMultiphoton(ExternalAttacker):
    """Split extra copies off signals; the retained copy is read once the bases are public."""

    def __init__(self, link: int, fraction: float):
        super().__init__(link)
        self.fraction = fraction

    def intercept(self, photons, rng):
        for photon in photons:
            if photon.lost or photon.invisible or rng.random() >= self.fraction:
                continue
            photon.extra_copies += 1
            self.tampered += 1
            if photon.label is not None:
                self.known[photon.uid] = (photon.label, True)
        return photons


class DishonestAlice(AliceAgent, KeyPredictor):
    """
    Alice i0 mounting a fake-signal attack.

    Every forwarded carrier is replaced, either by a random six-state photon
    (single-photon attack) or by qubit A of |0>|alpha> + |1>|beta> (entangled
    attack, ancilla E kept). Answers are committed once per position.
    """
    dishonest = True

    def __init__(self, index: int, alpha=None, beta=None):
        AliceAgent.__init__(self, index)
        KeyPredictor.__init__(self)
        self.point = index
        self.pair_state: Optional[PureState] = None if alpha is None else make_pair(alpha, beta)
        self.fakes: Dict[int, StateLabel] = {}
        self.register: Dict[int, EntangledPair] = {}
        self.committed: Dict[int, Entry] = {}
        self.tampered = 0

    @property
    def entangled(self) -> bool:
        return self.pair_state is not None

    def holds(self, uid: int) -> bool:
        return uid in self.ledger or uid in self.fakes or uid in self.register

    def substitute(self, photons: List[Photon], rng: np.random.Generator) -> None:
        for photon in photons:
            if photon.lost or photon.invisible:
                continue
            if self.entangled:
                holder = EntangledPair(initial=self.pair_state, state=self.pair_state)
                photon.label, photon.raw, photon.pair = None, None, holder
                self.register[photon.uid] = holder
            else:
                fake = random_label(rng)
                photon.replace(fake)
                self.fakes[photon.uid] = fake
            self.tampered += 1

    def prepare(self, cfg, rng):
        photons = [Photon(uid=uid) for uid in range(cfg.n * cfg.N)]
        self.substitute(photons, rng)
        logger.info(f"[[Alice {self.index}]]: Sent {len(photons)} substituted carriers as origin.")
        return photons

    def encode(self, photons, cfg, rng, uids):
        photons = list(photons)
        self.substitute(photons, rng)
        insert_decoys(self, photons, cfg.decoys[self.index - 2], rng, uids)
        logger.info(f"[[Alice {self.index}]]: Substituted {len(photons)} carriers.")
        return photons

    # --- what she believes the carrier held when it left her ---
    def knowledge(self, uid, rng):
        if uid in self.fakes:
            return self.fakes[uid], True
        if uid in self.register:
            return self._steer(uid, rng)
        entry = self.ledger.get(uid)
        if isinstance(entry, StateLabel):
            return entry, True
        return None

    def _steer(self, uid: int, rng: np.random.Generator) -> Tuple[StateLabel, bool]:
        if uid in self.known:
            return self.known[uid]
        holder = self.register[uid]
        basis = Basis(int(rng.integers(3)))
        bit, holder.state = measure_second(holder.state, basis, rng)
        # amplitude of A given ancilla outcome: M conj(e), M[i][j] = <i|<j|Psi>
        phi = holder.initial.amplitudes.reshape(2, 2) @ np.conj(eigenvector(basis, bit))
        phi = phi / np.linalg.norm(phi)
        target = nearest_label(PureState(phi))
        exact = abs(np.vdot(make_state(target).amplitudes, phi)) >= 1 - PHASE_TOL
        self.known[uid] = (target, exact)
        return self.known[uid]

    def _target(self, uid: int, rng: np.random.Generator) -> StateLabel:
        return self.knowledge(uid, rng)[0]

    def _solve(self, prefix: Optional[StateLabel], target: StateLabel, rng: np.random.Generator) -> Entry:
        if prefix is None:
            return target
        candidates = solve_ops(prefix, target)
        return candidates[int(rng.integers(len(candidates)))]

    def announce(self, uid, participants, public, rng):
        if uid in self.ledger:
            return self.ledger[uid]
        if uid not in self.committed:
            prefix = None
            for index in participants:
                if index >= self.index:
                    break
                entry = public.get(index)
                if prefix is None:
                    prefix = entry if isinstance(entry, StateLabel) else random_label(rng)
                else:
                    prefix = op_on_label(entry if isinstance(entry, OpCode) else IDENTITY, prefix)
            self.committed[uid] = self._solve(prefix, self._target(uid, rng), rng)
        return self.committed[uid]

    def announce_trit(self, uid, participants, public, rng):
        if uid in self.ledger:
            return entry_trit(self.ledger[uid])
        if uid not in self.committed:
            # only the basis trits of earlier parties are public at this point
            prefix = None
            for index in participants:
                if index >= self.index:
                    break
                trit = public[index]
                if prefix is None:
                    prefix = StateLabel(int(rng.integers(2)), trit)
                else:
                    prefix = op_on_label(OpCode(0, trit), prefix)
            self.committed[uid] = self._solve(prefix, self._target(uid, rng), rng)
        return entry_trit(self.committed[uid])


def build_attacker(attack: AttackStrategy, cfg: ProtocolConfig):
    """Instantiate the adversary of `attack`; None for an attack-free run."""
    kind = attack.kind
    if kind == "none":
        return None
    if kind in ("single_photon_fake", "entangled_fake"):
        if not 1 <= attack.attacker_index <= cfg.m:
            raise ConfigurationError(f"Dishonest Alice index must be in 1..{cfg.m}, got {attack.attacker_index}.")
        if kind == "entangled_fake":
            return DishonestAlice(attack.attacker_index, np.asarray(attack.alpha), np.asarray(attack.beta))
        return DishonestAlice(attack.attacker_index)
    if not 1 <= attack.link <= cfg.m:
        raise ConfigurationError(f"Attacked link must be in 1..{cfg.m}, got {attack.link}.")
    if kind == "intercept_resend":
        return InterceptResend(attack.link)
    if kind == "invisible_probe":
        return InvisibleProbe(attack.link, attack.tamper_fraction)
    if kind == "trojan_multiphoton":
        return TrojanMultiphoton(attack.link, attack.tamper_fraction)
    raise ConfigurationError(f"Unknown attack kind {kind!r}.")
