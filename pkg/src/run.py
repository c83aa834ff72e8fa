# src/run.py
import argparse
import csv
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.analysis.bounds import bounds_report
from src.attacks.campaigns import run_attack_campaign, run_efficiency, run_encoding_discrimination
from src.config.schema import ExperimentConfig
from src.config.settings import DEFAULT_REFINEMENT, DEFAULT_RESOLUTION, DEFAULT_SEED
from src.utils.errors import QSSError
from src.utils.logging_config import setup_logging
from src.utils.rng import make_rng

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ABORT = 2
EXIT_USAGE = 64

_EPR = ["0.7071067811865476", "0"], ["0", "0.7071067811865476"]


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse with the usage-error exit code of the simulator."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="qss6", description="Six-state multi-party quantum secret sharing simulator.")
    parser.add_argument("--log-level", default=None, help="Logging level (default: QSS6_LOG_LEVEL or INFO).")
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_flags(p):
        p.add_argument("--config", help="JSON file with an ExperimentConfig.")
        p.add_argument("--seed", type=int, help="Master seed (fallback: QSS6_SEED).")
        p.add_argument("--trials", type=int)
        p.add_argument("--m", type=int, help="Number of Alices.")
        p.add_argument("--n", type=int, help="Number of Bobs.")
        p.add_argument("--block-size", type=int, dest="block_size", help="N, key bits per Bob.")
        p.add_argument("--threshold", type=float, help="Abort threshold on check error rates.")
        p.add_argument("--memory-mode", choices=["quantum_memory", "measure_immediately"], dest="memory_mode")
        p.add_argument("--channel", choices=["identity", "depolarizing", "lossy"])
        p.add_argument("--noise", type=float, help="Channel probability p.")
        p.add_argument("--workers", type=int)
        p.add_argument("--output", help="Write the JSON report here instead of stdout.")

    run = sub.add_parser("run", help="Run protocol trials, optionally under attack.")
    experiment_flags(run)
    run.add_argument(
        "--attack",
        choices=["none", "intercept_resend", "single_photon_fake", "entangled_fake", "invisible_probe", "trojan_multiphoton"],
    )
    run.add_argument("--attacker-index", type=int, dest="attacker_index")
    run.add_argument("--link", type=int)
    run.add_argument("--strict", action="store_true", help="Exit 2 when any trial aborts.")
    run.add_argument("--csv", help="Also write a per-trial CSV summary.")

    eff = sub.add_parser("efficiency", help="Compare usable key fractions of both memory modes.")
    experiment_flags(eff)

    bounds = sub.add_parser("bounds", help="Minimise the overlap sums and report P1, P2.")
    bounds.add_argument("--objective", choices=["s1", "s2", "both"], default="both")
    bounds.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    bounds.add_argument("--refinement", type=int, default=DEFAULT_REFINEMENT)
    bounds.add_argument("--output")

    disc = sub.add_parser("discriminate", help="Pauli-class discrimination by an intercepting fake-signal attacker.")
    disc.add_argument("--alpha", nargs=2, default=_EPR[0], metavar=("A0", "A1"), help="Complex components, e.g. 0.5+0.5j.")
    disc.add_argument("--beta", nargs=2, default=_EPR[1], metavar=("B0", "B1"))
    disc.add_argument("--trials", type=int, default=10000)
    disc.add_argument("--seed", type=int, default=DEFAULT_SEED)
    disc.add_argument("--output")
    return parser


def load_experiment(args) -> ExperimentConfig:
    """Config file first, then every flag that was given on the command line."""
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            data = json.load(f)
    protocol = data.setdefault("protocol", {})
    attack = data.setdefault("attack", {})
    channel = data.setdefault("channel", {})

    overrides = [
        (protocol, "seed", args.seed),
        (protocol, "m", args.m),
        (protocol, "n", args.n),
        (protocol, "N", args.block_size),
        (protocol, "error_threshold", args.threshold),
        (protocol, "memory_mode", args.memory_mode),
        (channel, "kind", args.channel),
        (channel, "p", args.noise),
        (data, "trials", args.trials),
        (data, "workers", args.workers),
        (data, "output_path", args.output),
        (attack, "kind", getattr(args, "attack", None)),
        (attack, "attacker_index", getattr(args, "attacker_index", None)),
        (attack, "link", getattr(args, "link", None)),
    ]
    for target, key, value in overrides:
        if value is not None:
            target[key] = value
    # the EPR pair is the default fake signal
    if attack.get("kind") == "entangled_fake":
        attack.setdefault("alpha", [complex(v) for v in _EPR[0]])
        attack.setdefault("beta", [complex(v) for v in _EPR[1]])
    return ExperimentConfig.model_validate(data)


def emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"Report written to {path}")
    else:
        sys.stdout.write(text + "\n")


def write_csv(report, path: str) -> None:
    fields = ["trial", "aborted", "abort_stage", "bob_check_error_rate", "final_check_error_rate",
              "key_length", "usable_fraction", "efficiency", "attacker_key_accuracy"]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for r in report.reports:
            writer.writerow(r.model_dump(include=set(fields)))


def cmd_run(args) -> int:
    experiment = load_experiment(args)
    report = run_attack_campaign(experiment)
    emit(report.model_dump_json(indent=2), experiment.output_path)
    if args.csv:
        write_csv(report, args.csv)
    if args.strict and report.summary.abort_count:
        logger.warning(f"{report.summary.abort_count} of {report.summary.trials} trials aborted.")
        return EXIT_ABORT
    return EXIT_OK


def cmd_efficiency(args) -> int:
    experiment = load_experiment(args)
    report = run_efficiency(experiment)
    emit(report.model_dump_json(indent=2), experiment.output_path)
    return EXIT_OK


def cmd_bounds(args) -> int:
    objectives: List[str] = ["s1", "s2"] if args.objective == "both" else [args.objective]
    reports = [bounds_report(which, args.resolution, args.refinement) for which in objectives]
    for r in reports:
        bound = f"P1={r.p1:.4f}" if r.objective == "s1" else f"P2={r.p2:.4f}"
        print(f"{r.objective} minimum {r.minimum:.6f} at {r.argmin}: {bound}", file=sys.stderr)
    emit(json.dumps([r.model_dump(mode="json") for r in reports], indent=2), args.output)
    return EXIT_OK


def cmd_discriminate(args) -> int:
    try:
        alpha = [complex(v) for v in args.alpha]
        beta = [complex(v) for v in args.beta]
    except ValueError as e:
        raise UsageError(f"alpha/beta components must be complex numbers: {e}")
    report = run_encoding_discrimination(alpha, beta, args.trials, make_rng(args.seed))
    emit(report.model_dump_json(indent=2), args.output)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "efficiency": cmd_efficiency,
    "bounds": cmd_bounds,
    "discriminate": cmd_discriminate,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, QSSError, UsageError, OSError, json.JSONDecodeError) as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
