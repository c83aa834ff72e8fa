# src/agents/announcement.py
"""Public classical channel over which the Alices announce their per-position entries."""
import logging
from typing import Dict, List, Mapping, Optional

import numpy as np

from src.agents.alice_agent import AliceAgent, Entry
from src.quantum.core import Basis, OpCode
from src.quantum.labels import EncodingRecord, StateLabel, combined_label, sifted_basis

logger = logging.getLogger(__name__)


def fold_entries(entries: Mapping[int, Entry]) -> Optional[StateLabel]:
    """Implied label: the origin label followed by the later parties' operations, in party order."""
    if not entries:
        return None
    origin, *ops = (entries[i] for i in sorted(entries))
    if not isinstance(origin, StateLabel) or not all(isinstance(op, OpCode) for op in ops):
        return None
    return combined_label(origin, EncodingRecord.from_ops(ops))


class AnnouncementBoard:
    """
    Routes announcement requests to the parties holding an entry for a position.

    Full (a, b) announcements are answered one party at a time in a fresh
    uniformly random order per position; every party sees the answers given
    before its turn. Basis strings are broadcast with the honest parties first.
    """

    def __init__(self, alices: Mapping[int, AliceAgent]):
        self.alices = dict(alices)
        self.public_trits: Dict[int, Dict[int, int]] = {}
        self.refusals = 0

    def participants(self, uid: int, upto: int) -> List[int]:
        return [i for i in sorted(self.alices) if i <= upto and self.alices[i].holds(uid)]

    def query(self, uid: int, upto: int, rng: np.random.Generator) -> Optional[StateLabel]:
        participants = self.participants(uid, upto)
        if not participants:
            self.refusals += 1
            return None
        public: Dict[int, Entry] = {}
        for k in rng.permutation(len(participants)):
            index = participants[int(k)]
            answer = self.alices[index].announce(uid, participants, public, rng)
            if answer is None:
                self.refusals += 1
                logger.warning(f"[[Announcements]]: Alice {index} refused to announce photon {uid}.")
                return None
            public[index] = answer
        return fold_entries(public)

    def sifted_basis(self, uid: int, rng: np.random.Generator, upto: Optional[int] = None) -> Optional[Basis]:
        upto = upto if upto is not None else max(self.alices)
        participants = self.participants(uid, upto)
        if not participants:
            return None
        ordered = [i for i in participants if not self.alices[i].dishonest] + [
            i for i in participants if self.alices[i].dishonest
        ]
        public: Dict[int, int] = {}
        for index in ordered:
            trit = self.alices[index].announce_trit(uid, participants, public, rng)
            if trit is None:
                self.refusals += 1
                return None
            public[index] = trit
        self.public_trits[uid] = public
        origin, *rots = (public[i] for i in sorted(public))
        # only the rotation trits are public
        return sifted_basis(EncodingRecord([0] * len(rots), rots), origin)

    def resolve(self, uid: int, upto: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> Optional[StateLabel]:
        """Implied label from the parties' entries without consuming randomness when all are fixed."""
        upto = upto if upto is not None else max(self.alices)
        participants = self.participants(uid, upto)
        entries = {}
        for index in participants:
            answer = self.alices[index].announce(uid, participants, entries, rng)
            if answer is None:
                return None
            entries[index] = answer
        return fold_entries(entries)
