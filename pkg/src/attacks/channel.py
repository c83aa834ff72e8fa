# src/attacks/channel.py
import logging
from typing import List

import numpy as np

from src.agents.alice_agent import random_label
from src.agents.photon import Photon
from src.config.schema import ChannelModel

logger = logging.getLogger(__name__)


def transmit(channel: ChannelModel, photons: List[Photon], rng: np.random.Generator) -> List[Photon]:
    """
    Send photons through one quantum link.

    depolarizing: each carrier is replaced by a uniformly random six-state photon
    with probability p. lossy: each carrier is flagged lost with probability p;
    the receiver discards flagged positions.
    """
    if channel.kind == "identity" or channel.p == 0:
        return photons
    hits = rng.random(len(photons)) < channel.p
    if channel.kind == "depolarizing":
        for photon, hit in zip(photons, hits):
            if hit and not photon.lost:
                photon.replace(random_label(rng))
    elif channel.kind == "lossy":
        for photon, hit in zip(photons, hits):
            photon.lost = photon.lost or bool(hit)
    logger.debug(f"[[Channel]]: {channel.kind} p={channel.p} affected {int(hits.sum())} of {len(photons)} photons.")
    return photons


def expected_check_error(channel: ChannelModel, links: int = 1) -> float:
    """Error rate of a basis-matched check after `links` passes through the channel."""
    if channel.kind == "depolarizing":
        # a relabelled photon disagrees with its announced label half of the time
        return (1 - (1 - channel.p) ** links) / 2
    return 0.0
