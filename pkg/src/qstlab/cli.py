"""
Command-line interface.

Every command takes ``--seed`` (default from QSTLAB_SEED) and writes a
``<output>.manifest.json`` beside each file it produces. Exit codes: 0
success, 2 certification failure, 3 input or parse error, 4 protocol or
configuration failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from . import __version__
from .config import configure_logging, get_settings
from .exceptions import (
    CertificationError,
    ProtocolConfigError,
    TopologyError,
)
from .services.experiment_service import CommandOutcome, ExperimentService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CERTIFICATION = 2
EXIT_INPUT = 3
EXIT_PROTOCOL = 4


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got {text!r}") from e


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Expected comma-separated numbers, got {text!r}") from e


def _int_range(text: str) -> List[int]:
    """'2:5' -> [2, 3, 4, 5]; a single integer is a one-element range."""
    try:
        if ":" in text:
            low, high = (int(part) for part in text.split(":", 1))
        else:
            low = high = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Expected LOW:HIGH, got {text!r}") from e
    if low < 1 or high < low:
        raise argparse.ArgumentTypeError(f"Empty or invalid range {text!r}")
    return list(range(low, high + 1))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Seed for all randomness")
    common.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Log level (default from QSTLAB_LOG_LEVEL)",
    )

    parser = argparse.ArgumentParser(
        prog="qstlab",
        description="Private quantum channels from small-bias Pauli key sets, "
        "and the m-party sequential transmission built on them.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-keys", parents=[common], help="Sample certified key sets")
    gen.add_argument("--n", type=int, required=True, help="Qubit count")
    gen.add_argument("--epsilon", type=float, required=True, help="Security parameter")
    gen.add_argument("--hops", type=int, default=None, help="Write one set per hop (m - 1)")
    gen.add_argument("--out", type=Path, default=Path("keys.json"), help="Key-set file")
    gen.add_argument("--max-retries", type=int, default=50)
    gen.add_argument(
        "--key-count", type=int, default=None, help="Override the 2^n_DN set size"
    )
    gen.set_defaults(handler=_cmd_gen_keys)

    scan = commands.add_parser("bias-scan", parents=[common], help="Bias at every string")
    scan.add_argument("keys", type=Path, help="Key-set file")
    scan.add_argument("--out", type=Path, required=True)
    scan.add_argument("--format", choices=["csv", "json"], default="csv")
    scan.add_argument("--epsilon", type=float, default=None, help="Verdict threshold eps")
    scan.set_defaults(handler=_cmd_bias_scan)

    run = commands.add_parser("run", parents=[common], help="Run the m-party protocol")
    run.add_argument("--m", type=int, required=True, help="Party count")
    run.add_argument("--n", type=int, required=True, help="Qubit count")
    run.add_argument("--epsilon", type=float, required=True)
    run.add_argument("--keys", type=Path, nargs="*", default=[], help="m - 1 key-set files")
    run.add_argument("--state", default="zero", help="zero, random or a state JSON file")
    run.add_argument("--transcript-out", type=Path, default=Path("transcript.json"))
    run.add_argument("--record-states", action="store_true", help="Keep hop ciphertexts")
    run.add_argument("--taps", type=_int_list, default=[], help="Tapped hops, e.g. 1,2")
    run.add_argument(
        "--break-keys", action="store_true", help="Flip one bit of the last party's key"
    )
    run.add_argument("--trials", type=int, default=200)
    run.add_argument("--max-retries", type=int, default=50)
    run.set_defaults(handler=_cmd_run)

    sweep = commands.add_parser("sweep", parents=[common], help="Key size and security table")
    sweep.add_argument("--n-range", type=_int_range, required=True, help="LOW:HIGH")
    sweep.add_argument("--epsilons", type=_float_list, required=True, help="e.g. 0.5,1.0")
    sweep.add_argument(
        "--m",
        type=int,
        default=2,
        help="Party count; only sets the per_hop_threshold column",
    )
    sweep.add_argument("--trials", type=int, default=100)
    sweep.add_argument("--out", type=Path, required=True)
    sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    sweep.add_argument("--max-retries", type=int, default=50)
    sweep.set_defaults(handler=_cmd_sweep)

    verify = commands.add_parser("verify", parents=[common], help="Check an eps-randomizer")
    verify.add_argument("keys", type=Path, nargs="+", help="Key-set files, composed in order")
    verify.add_argument("--epsilon", type=float, required=True)
    verify.add_argument("--trials", type=int, default=500)
    verify.add_argument("--out", type=Path, default=Path("verify.json"))
    verify.set_defaults(handler=_cmd_verify)

    replay = commands.add_parser("replay", parents=[common], help="Re-run from a manifest")
    replay.add_argument("manifest", type=Path)
    replay.set_defaults(handler=_cmd_replay)

    return parser


# Handlers ---------------------------------------------------------------------

Handler = Callable[[ExperimentService, argparse.Namespace], CommandOutcome]


def _cmd_gen_keys(service: ExperimentService, args: argparse.Namespace) -> CommandOutcome:
    return service.gen_keys(
        args.n,
        args.epsilon,
        args.out,
        args.seed,
        hops=args.hops,
        max_retries=args.max_retries,
        key_count=args.key_count,
    )


def _cmd_bias_scan(service: ExperimentService, args: argparse.Namespace) -> CommandOutcome:
    return service.bias_scan(args.keys, args.out, args.format, args.epsilon)


def _cmd_run(service: ExperimentService, args: argparse.Namespace) -> CommandOutcome:
    return service.run(
        args.m,
        args.n,
        args.epsilon,
        args.seed,
        args.transcript_out,
        keys_paths=args.keys,
        state_source=args.state,
        record_states=args.record_states,
        taps=args.taps,
        break_keys=args.break_keys,
        trials=args.trials,
        max_retries=args.max_retries,
    )


def _cmd_sweep(service: ExperimentService, args: argparse.Namespace) -> CommandOutcome:
    return service.sweep(
        args.n_range,
        args.epsilons,
        args.m,
        args.trials,
        args.seed,
        args.out,
        args.format,
        args.max_retries,
    )


def _cmd_verify(service: ExperimentService, args: argparse.Namespace) -> CommandOutcome:
    return service.verify(args.keys, args.epsilon, args.trials, args.seed, args.out)


def _cmd_replay(service: ExperimentService, args: argparse.Namespace) -> CommandOutcome:
    return service.replay(args.manifest, main)


def _check_caps(service: ExperimentService, args: argparse.Namespace) -> None:
    if args.command == "run":
        service.check_caps(args.n)
    elif args.command == "gen-keys":
        service.check_caps(args.n, dense=False)


def _flags(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    skipped = {"handler", "log_level"}
    return {
        name: None if value is None else str(value)
        for name, value in sorted(vars(args).items())
        if name not in skipped
    }


def _canonical_argv(argv: Sequence[str], seed: int) -> List[str]:
    """Recorded argv with the seed made explicit."""
    canonical = list(argv)
    if not any(arg == "--seed" or arg.startswith("--seed=") for arg in canonical):
        canonical += ["--seed", str(seed)]
    return canonical


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    raw = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(raw)
    except SystemExit as e:
        # usage errors share the input-error code
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    settings = get_settings()
    configure_logging(args.log_level)
    if args.seed is None:
        args.seed = settings.default_seed

    service = ExperimentService(settings)
    handler: Handler = args.handler
    try:
        _check_caps(service, args)
        outcome = handler(service, args)
    except CertificationError as e:
        logger.error(str(e))
        print(
            f"certification failed: best beta_max={e.best_beta_max:.6g} "
            f"> threshold {e.threshold:.6g} after {e.attempts} attempts",
            file=sys.stderr,
        )
        return EXIT_CERTIFICATION
    except (ProtocolConfigError, TopologyError) as e:
        logger.error(str(e))
        print(f"protocol error: {e}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ValueError as e:
        logger.error(str(e))
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT

    for message in outcome.messages:
        print(message)
    if outcome.outputs:
        service.record(
            args.command, _canonical_argv(raw, args.seed), _flags(args), args.seed, outcome
        )
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
