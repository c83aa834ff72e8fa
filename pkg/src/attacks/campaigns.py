# src/attacks/campaigns.py
"""Monte Carlo campaigns: many seeded protocol runs under one attack, summarised as DetectionStats."""
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.analysis.bounds import p2_bound, params_from_pair
from src.config.schema import AttackStrategy, ChannelModel, ExperimentConfig, ProtocolConfig
from src.graph.workflow import run_protocol
from src.quantum.core import ALL_OPCODES, apply_op, make_pair
from src.reports.schema import (
    DetectionStats,
    DiscriminationReport,
    EfficiencyReport,
    EfficiencyRow,
    ExperimentReport,
    RunReport,
)
from src.utils.rng import trial_rng

logger = logging.getLogger(__name__)

# Gram-Schmidt drops frame vectors shorter than this
FRAME_TOL = 1e-9


def summarize(reports: Sequence[RunReport], expected_detection: Optional[float] = None) -> DetectionStats:
    stats = DetectionStats(trials=len(reports), expected_detection_probability=expected_detection)
    errors: Dict[str, int] = {}
    rates: Dict[str, List[float]] = {}
    for report in reports:
        if report.aborted:
            stats.abort_count += 1
            stats.abort_by_stage[report.abort_stage] = stats.abort_by_stage.get(report.abort_stage, 0) + 1
        for stage, tally in report.stage_tallies.items():
            stats.retained_by_stage[stage] = stats.retained_by_stage.get(stage, 0) + tally.retained
            errors[stage] = errors.get(stage, 0) + tally.errors
            if tally.retained:
                rates.setdefault(stage, []).append(tally.error_rate)

    for stage, retained in stats.retained_by_stage.items():
        stats.pooled_error_rate_by_stage[stage] = errors[stage] / retained if retained else 0.0
        stats.mean_error_rate_by_stage[stage] = float(np.mean(rates[stage])) if stage in rates else 0.0

    finished = [r for r in reports if r.attacker_key_accuracy is not None]
    if finished:
        stats.attacker_key_accuracy = float(np.mean([r.attacker_key_accuracy for r in finished]))
        stats.attacker_info_gain = float(np.mean([r.attacker_info_gain for r in finished]))
    return stats


def _run_trial(experiment: ExperimentConfig, trial: int) -> RunReport:
    rng = trial_rng(experiment.protocol.seed, trial)
    return run_protocol(experiment.protocol, experiment.attack, experiment.channel, rng, trial)


def run_campaign(experiment: ExperimentConfig) -> List[RunReport]:
    """All trials of an experiment, ordered by trial index whatever the pool completion order."""
    if experiment.workers == 1:
        reports = [_run_trial(experiment, t) for t in range(experiment.trials)]
    else:
        reports = []
        with ProcessPoolExecutor(max_workers=experiment.workers) as ex:
            futures = {ex.submit(_run_trial, experiment, t): t for t in range(experiment.trials)}
            for f in as_completed(futures):
                reports.append(f.result())
        reports.sort(key=lambda r: r.trial)
    aborted = sum(r.aborted for r in reports)
    logger.info(f"[[Campaign]]: {experiment.attack.kind}: {aborted}/{len(reports)} runs aborted.")
    return reports


def _run_attack(
    cfg: ProtocolConfig,
    attack: AttackStrategy,
    rng: Optional[np.random.Generator],
    trials: int,
    channel: Optional[ChannelModel],
) -> List[RunReport]:
    channel = channel or ChannelModel()
    if rng is None:
        return run_campaign(ExperimentConfig(protocol=cfg, attack=attack, channel=channel, trials=trials))
    return [run_protocol(cfg, attack, channel, rng, t) for t in range(trials)]


def run_intercept_resend(
    cfg: ProtocolConfig,
    rng: Optional[np.random.Generator] = None,
    *,
    link: int = 1,
    trials: int = 1,
    channel: Optional[ChannelModel] = None,
) -> DetectionStats:
    attack = AttackStrategy(kind="intercept_resend", link=link)
    return summarize(_run_attack(cfg, attack, rng, trials, channel))


def run_single_photon_fake(
    cfg: ProtocolConfig,
    rng: Optional[np.random.Generator] = None,
    *,
    attacker_index: Optional[int] = None,
    trials: int = 1,
    channel: Optional[ChannelModel] = None,
) -> DetectionStats:
    attack = AttackStrategy(kind="single_photon_fake", attacker_index=attacker_index or cfg.m)
    return summarize(_run_attack(cfg, attack, rng, trials, channel))


def run_entangled_fake(
    cfg: ProtocolConfig,
    alpha,
    beta,
    rng: Optional[np.random.Generator] = None,
    *,
    attacker_index: Optional[int] = None,
    trials: int = 1,
    channel: Optional[ChannelModel] = None,
) -> DetectionStats:
    """
    Dishonest Alice i0 replaces every signal with half of |0>|alpha> + |1>|beta>.
    The default i0 = m-1 leaves one honest encoder after her.
    """
    make_pair(alpha, beta)
    attack = AttackStrategy(
        kind="entangled_fake",
        attacker_index=attacker_index or cfg.m - 1,
        alpha=[complex(a) for a in np.ravel(alpha)],
        beta=[complex(b) for b in np.ravel(beta)],
    )
    return summarize(_run_attack(cfg, attack, rng, trials, channel))


def expected_detection(cfg: ProtocolConfig, link: int, tampered: int) -> float:
    """
    Chance that at least one of `tampered` multi-photon signals is sampled by
    the next check. The Bobs sample whole blocks, so on the last link the
    exponent is the fewest blocks the tampered photons can occupy.
    """
    if link < cfg.m:
        return 1 - (1 - cfg.check_fraction_hop) ** tampered
    return 1 - (1 - cfg.check_fraction_bob) ** -(-tampered // cfg.n)


def run_invisible_or_trojan(
    cfg: ProtocolConfig,
    rng: Optional[np.random.Generator] = None,
    *,
    kind: str = "trojan_multiphoton",
    link: int = 1,
    fraction: float = 1.0,
    trials: int = 1,
    channel: Optional[ChannelModel] = None,
) -> DetectionStats:
    attack = AttackStrategy(kind=kind, link=link, tamper_fraction=fraction)
    reports = _run_attack(cfg, attack, rng, trials, channel)
    expected = None
    if kind == "trojan_multiphoton" and reports:
        expected = float(np.mean([expected_detection(cfg, link, r.tampered_photons) for r in reports]))
    return summarize(reports, expected)


def run_attack_campaign(experiment: ExperimentConfig) -> ExperimentReport:
    reports = run_campaign(experiment)
    expected = None
    attack = experiment.attack
    if attack.kind == "trojan_multiphoton" and reports:
        expected = float(np.mean([expected_detection(experiment.protocol, attack.link, r.tampered_photons) for r in reports]))
    return ExperimentReport(config=experiment, reports=reports, summary=summarize(reports, expected))


# --- Encoding discrimination ---
def _pauli_frame(chi) -> List:
    """Orthonormalised rotation-0 states, one per pauli class that survives Gram-Schmidt."""
    frame = []
    for pauli in range(3):
        v = chi[pauli].amplitudes.copy()
        for _, e in frame:
            v = v - np.vdot(e, v) * e
        norm = np.linalg.norm(v)
        if norm > FRAME_TOL:
            frame.append((pauli, v / norm))
    return frame


def run_encoding_discrimination(alpha, beta, trials: int, rng: np.random.Generator) -> DiscriminationReport:
    """
    An honest Alice applies one of the nine operations, uniformly chosen, to the
    first particle of |0>|alpha> + |1>|beta>; the attacker measures in the
    orthonormalised frame of the three rotation-0 states and names a pauli class.
    Outcomes outside the frame are inconclusive and count as failures.
    """
    psi = make_pair(alpha, beta)
    params = params_from_pair(alpha, beta)
    chi = [apply_op(op, psi) for op in ALL_OPCODES]
    frame = _pauli_frame(chi)

    hits = 0
    for k in rng.integers(len(ALL_OPCODES), size=trials):
        state = chi[k].amplitudes
        probs = [abs(np.vdot(e, state)) ** 2 for _, e in frame]
        probs.append(max(0.0, 1 - sum(probs)))
        outcome = rng.choice(len(probs), p=np.asarray(probs) / sum(probs))
        if outcome < len(frame) and frame[outcome][0] == ALL_OPCODES[k].pauli:
            hits += 1

    success = hits / trials if trials else 0.0
    logger.info(f"[[Discrimination]]: success rate {success:.4f} over {trials} trials.")
    return DiscriminationReport(
        alpha=[complex(a) for a in np.ravel(alpha)],
        beta=[complex(b) for b in np.ravel(beta)],
        trials=trials,
        success_rate=success,
        p2_bound=p2_bound(params),
    )


# --- Efficiency ---
def expected_efficiency(cfg: ProtocolConfig, usable: float) -> Optional[float]:
    """
    Raw key bits per photon a Bob receives, to first order in the check fractions.

    A block survives when all n positions hold signals that gave a usable
    bit, and neither the Bob check nor the final check picked it.
    """
    survive = 1 - cfg.check_fraction_hop
    signals = cfg.n * cfg.N * survive ** (cfg.m - 1)
    decoys = sum(d * survive ** (cfg.m - i) for i, d in enumerate(cfg.decoys, start=2))
    if signals + decoys == 0:
        return None
    share = signals / (signals + decoys)
    return (share * usable) ** cfg.n * (1 - cfg.check_fraction_bob) * (1 - cfg.check_fraction_final)


def run_efficiency(experiment: ExperimentConfig) -> EfficiencyReport:
    """Runs the experiment once per memory mode and reports the usable fractions side by side."""
    rows = []
    for mode, usable in (("quantum_memory", 1.0), ("measure_immediately", 1 / 3)):
        protocol = experiment.protocol.model_copy(update={"memory_mode": mode})
        reports = run_campaign(experiment.model_copy(update={"protocol": protocol}))
        fractions = [r.usable_fraction for r in reports if r.usable_fraction is not None]
        efficiencies = [r.efficiency for r in reports if r.efficiency is not None]
        rows.append(EfficiencyRow(
            memory_mode=mode,
            trials=len(reports),
            mean_usable_fraction=float(np.mean(fractions)) if fractions else None,
            mean_efficiency=float(np.mean(efficiencies)) if efficiencies else None,
            expected_efficiency=expected_efficiency(protocol, usable),
        ))
    return EfficiencyReport(config=experiment, modes=rows)
