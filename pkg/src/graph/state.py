# src/graph/state.py
from typing import Any, Dict, Iterator, List, Optional

import numpy as np
from typing_extensions import TypedDict

from src.agents.alice_agent import AliceAgent
from src.agents.announcement import AnnouncementBoard
from src.agents.bob_agent import BobAgent
from src.agents.photon import Photon
from src.config.schema import AttackStrategy, ChannelModel, ProtocolConfig
from src.reports.schema import StageTally


class ProtocolState(TypedDict, total=False):
    config: ProtocolConfig
    channel: ChannelModel
    attack: AttackStrategy
    rng: np.random.Generator
    trial: int

    alices: Dict[int, AliceAgent]
    board: AnnouncementBoard
    attacker: Optional[Any]
    uids: Iterator[int]

    # photons in flight and the Alice who sent them
    photons: List[Photon]
    hop: int
    bobs: List[BobAgent]

    aborted: bool
    abort_stage: Optional[str]
    abort_reason: Optional[str]

    per_hop_error_rates: List[float]
    bob_check_error_rate: float
    final_check_error_rate: float
    stage_tallies: Dict[str, StageTally]

    lost_photons: int
    bob_filtered: int
    photons_per_bob: int
    sifted_count: int
    usable_fraction: Optional[float]
    check_count: int
    dropped_blocks: int
    unchecked_blocks: List[int]

    key_length: int
    bob_xor_key: str
    alice_combined_bits: str
    attacker_key_accuracy: Optional[float]
    attacker_info_gain: float
