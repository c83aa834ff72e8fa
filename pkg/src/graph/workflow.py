# src/graph/workflow.py
import logging
from itertools import count
from typing import Optional

import numpy as np
from langgraph.graph import END, StateGraph

from src.agents.alice_agent import AliceAgent, alice_pad, hop_check
from src.agents.announcement import AnnouncementBoard
from src.agents.attacker_agent import DishonestAlice, ExternalAttacker, build_attacker
from src.agents.bob_agent import BobAgent, announce_and_measure, bob_check, distribute, extract_keys, final_check
from src.attacks.channel import transmit
from src.config.schema import AttackStrategy, ChannelModel, ProtocolConfig
from src.graph.state import ProtocolState
from src.reports.schema import RunReport
from src.utils.rng import make_rng

logger = logging.getLogger(__name__)


def _abort_update(stage: str, reason: str) -> dict:
    logger.warning(f"[[Abort]]: {stage}: {reason}")
    return {"aborted": True, "abort_stage": stage, "abort_reason": reason}


# --- Node Definition: M1 ---
def prepare_node(state: ProtocolState):
    """Sets up the parties and lets Alice 1 prepare the signal photons."""
    logger.info("--- Executing Node: [[prepare]] ---")
    cfg = state["config"]
    attacker = build_attacker(state["attack"], cfg)
    alices = {i: AliceAgent(i) for i in range(1, cfg.m + 1)}
    if isinstance(attacker, DishonestAlice):
        alices[attacker.index] = attacker
        logger.info(f"[[Prepare]]: Alice {attacker.index} is dishonest.")

    photons = alices[1].prepare(cfg, state["rng"])
    return {
        "alices": alices,
        "board": AnnouncementBoard(alices),
        "attacker": attacker,
        "uids": count(cfg.n * cfg.N),
        "photons": photons,
        "hop": 1,
        "aborted": False,
        "per_hop_error_rates": [],
        "stage_tallies": {},
        "lost_photons": 0,
    }


# --- Node Definition: quantum link ---
def transmit_node(state: ProtocolState):
    """Sends the photons of Alice `hop` over the link to the next party."""
    logger.info(f"--- Executing Node: [[transmit]] (link {state['hop']}) ---")
    photons = state["photons"]
    attacker = state.get("attacker")
    if isinstance(attacker, ExternalAttacker):
        photons = attacker.on_link(state["hop"], photons, state["rng"])
    photons = transmit(state["channel"], photons, state["rng"])
    return {"photons": photons}


# --- Node Definition: M2 / M3 check ---
def hop_check_node(state: ProtocolState):
    receiver = state["hop"] + 1
    logger.info(f"--- Executing Node: [[hop_check]] (Alice {receiver}) ---")
    photons = state["photons"]
    lost = state["lost_photons"] + sum(p.lost for p in photons)
    outcome = hop_check(receiver, photons, state["board"], state["config"], state["rng"])

    tallies = dict(state["stage_tallies"])
    tallies[f"hop{receiver}"] = outcome.tally
    update = {
        "photons": outcome.survivors,
        "lost_photons": lost,
        "stage_tallies": tallies,
        "per_hop_error_rates": state["per_hop_error_rates"] + [outcome.error_rate],
    }
    logger.info(f"[[Alice {receiver}]]: Check error rate {outcome.error_rate:.4f} on {outcome.tally.retained} retained samples.")
    if outcome.aborted:
        update.update(_abort_update("M2" if receiver == 2 else "M3", outcome.reason))
    return update


# --- Node Definition: M2 / M3 encoding ---
def encode_node(state: ProtocolState):
    i = state["hop"] + 1
    logger.info(f"--- Executing Node: [[encode]] (Alice {i}) ---")
    cfg = state["config"]
    alice = state["alices"][i]
    photons = alice.encode(state["photons"], cfg, state["rng"], state["uids"])
    if i == cfg.m:
        photons = alice_pad(alice, photons, cfg.n, state["rng"], state["uids"])
    return {"photons": photons, "hop": i}


# --- Node Definition: M4 ---
def distribute_node(state: ProtocolState):
    logger.info("--- Executing Node: [[distribute]] ---")
    cfg = state["config"]
    photons = state["photons"]
    visible = [p for p in photons if not p.invisible]
    bobs = [BobAgent(l) for l in range(cfg.n)]
    for bob, positions in zip(bobs, distribute(visible, cfg.n)):
        bob.receive(positions, cfg.memory_mode, state["rng"])
    return {
        "bobs": bobs,
        "photons_per_bob": len(visible) // cfg.n,
        "bob_filtered": len(photons) - len(visible),
        "lost_photons": state["lost_photons"] + sum(bob.lost for bob in bobs),
    }


# --- Node Definition: M5 ---
def bob_check_node(state: ProtocolState):
    logger.info("--- Executing Node: [[bob_check]] ---")
    outcome = bob_check(state["bobs"], state["board"], state["config"], state["rng"], state["photons_per_bob"])
    outcome.tally.filtered = state["bob_filtered"]
    tallies = dict(state["stage_tallies"])
    tallies["bob"] = outcome.tally
    update = {"stage_tallies": tallies, "bob_check_error_rate": outcome.error_rate}
    logger.info(f"[[Bobs]]: Check error rate {outcome.error_rate:.4f} on {outcome.tally.retained} retained samples.")
    if outcome.aborted:
        update.update(_abort_update("M5", outcome.reason))
    return update


# --- Node Definition: M6 ---
def announce_measure_node(state: ProtocolState):
    logger.info("--- Executing Node: [[announce_measure]] ---")
    summary = announce_and_measure(state["bobs"], state["board"], state["config"].memory_mode, state["rng"])
    logger.info(f"[[Bobs]]: {summary.usable} usable bits from {summary.signal_positions} signal positions.")
    return {"sifted_count": summary.usable, "usable_fraction": summary.usable_fraction}


# --- Node Definition: M7 ---
def final_check_node(state: ProtocolState):
    logger.info("--- Executing Node: [[final_check]] ---")
    cfg = state["config"]
    blocks = state["photons_per_bob"]
    outcome, complete, unchecked = final_check(state["bobs"], state["board"], cfg, state["rng"], blocks)
    tallies = dict(state["stage_tallies"])
    tallies["final"] = outcome.tally
    update = {
        "stage_tallies": tallies,
        "final_check_error_rate": outcome.error_rate,
        "dropped_blocks": blocks - len(complete),
        "check_count": outcome.tally.sampled,
        "unchecked_blocks": unchecked,
    }
    if outcome.aborted:
        update.update(_abort_update("M7", outcome.reason))
    return update


# --- Node Definition: M8 ---
def extract_keys_node(state: ProtocolState):
    logger.info("--- Executing Node: [[extract_keys]] ---")
    cfg, rng, board = state["config"], state["rng"], state["board"]
    bobs = state["bobs"]
    blocks = state["unchecked_blocks"]
    n = cfg.n

    reference = {}
    for j in blocks:
        for l, bob in enumerate(bobs):
            position = j * n + l
            reference[position] = board.resolve(bob.photons[position].uid, rng=rng).bit
    key, alice_bits = extract_keys([bob.bits for bob in bobs], blocks, reference)

    accuracy, gain = None, 0.0
    attacker = state.get("attacker")
    if attacker is not None and blocks:
        hits, certain = 0, 0
        for j, key_bit in zip(blocks, key):
            predictions = [attacker.predict(bobs[l].photons[j * n + l].uid, board, cfg.m, rng) for l in range(n)]
            guess = 0
            for bit, _ in predictions:
                guess ^= bit
            hits += int(guess == int(key_bit))
            certain += int(all(sure for _, sure in predictions))
        accuracy, gain = hits / len(blocks), certain / len(blocks)
        logger.info(f"[[Attacker]]: Key prediction accuracy {accuracy:.4f}, certain on {gain:.4f} of bits.")

    return {
        "key_length": len(key),
        "bob_xor_key": key,
        "alice_combined_bits": alice_bits,
        "attacker_key_accuracy": accuracy,
        "attacker_info_gain": gain,
    }


workflow = StateGraph(ProtocolState)

workflow.add_node("prepare", prepare_node)
workflow.add_node("transmit", transmit_node)
workflow.add_node("hop_check", hop_check_node)
workflow.add_node("encode", encode_node)
workflow.add_node("distribute", distribute_node)
workflow.add_node("bob_check", bob_check_node)
workflow.add_node("announce_measure", announce_measure_node)
workflow.add_node("final_check", final_check_node)
workflow.add_node("extract_keys", extract_keys_node)


# 1. Decision after a link: next Alice or the Bobs
def decide_after_transmit(state: ProtocolState):
    if state["hop"] < state["config"].m:
        logger.info(f"[Decision] Photons reached Alice {state['hop'] + 1}, running her check.")
        return "hop_check"
    logger.info("[Decision] Photons left Alice m, distributing to the Bobs.")
    return "distribute"


# 2. Decision after any check
def make_check_router(next_node: str):
    def decide(state: ProtocolState):
        if state.get("aborted"):
            logger.info(f"[Decision] Abort at {state['abort_stage']}, ending execution.")
            return END
        return next_node
    return decide


workflow.set_entry_point("prepare")
workflow.add_edge("prepare", "transmit")
workflow.add_conditional_edges(
    "transmit",
    decide_after_transmit,
    {"hop_check": "hop_check", "distribute": "distribute"},
)
workflow.add_conditional_edges("hop_check", make_check_router("encode"), {"encode": "encode", END: END})
workflow.add_edge("encode", "transmit")
workflow.add_edge("distribute", "bob_check")
workflow.add_conditional_edges("bob_check", make_check_router("announce_measure"), {"announce_measure": "announce_measure", END: END})
workflow.add_edge("announce_measure", "final_check")
workflow.add_conditional_edges("final_check", make_check_router("extract_keys"), {"extract_keys": "extract_keys", END: END})
workflow.add_edge("extract_keys", END)

# Compile graph
app = workflow.compile()


def run_protocol(
    cfg: ProtocolConfig,
    attack: Optional[AttackStrategy] = None,
    channel: Optional[ChannelModel] = None,
    rng: Optional[np.random.Generator] = None,
    trial: int = 0,
) -> RunReport:
    """Execute one M1-M8 run and summarise it as a RunReport."""
    initial = {
        "config": cfg,
        "attack": attack or AttackStrategy(),
        "channel": channel or ChannelModel(),
        "rng": rng if rng is not None else make_rng(cfg.seed),
        "trial": trial,
    }
    final = app.invoke(initial, config={"recursion_limit": 3 * cfg.m + 10})

    attacker = final.get("attacker")
    per_bob = final.get("photons_per_bob", 0)
    key_length = final.get("key_length", 0)
    return RunReport(
        trial=trial,
        seed=cfg.seed,
        aborted=final.get("aborted", False),
        abort_stage=final.get("abort_stage"),
        abort_reason=final.get("abort_reason"),
        per_hop_error_rates=final.get("per_hop_error_rates", []),
        bob_check_error_rate=final.get("bob_check_error_rate", 0.0),
        final_check_error_rate=final.get("final_check_error_rate", 0.0),
        stage_tallies=final.get("stage_tallies", {}),
        signal_photons=cfg.n * cfg.N,
        photons_per_bob=per_bob,
        lost_photons=final.get("lost_photons", 0),
        tampered_photons=getattr(attacker, "tampered", 0),
        sifted_count=final.get("sifted_count", 0),
        check_count=final.get("check_count", 0),
        dropped_blocks=final.get("dropped_blocks", 0),
        key_length=key_length,
        usable_fraction=final.get("usable_fraction"),
        efficiency=key_length / per_bob if per_bob and not final.get("aborted") else None,
        alice_combined_bits=final.get("alice_combined_bits", ""),
        bob_xor_key=final.get("bob_xor_key", ""),
        attacker_key_accuracy=final.get("attacker_key_accuracy"),
        attacker_info_gain=final.get("attacker_info_gain", 0.0),
    )
