"""Command-line interface.

Subcommands: entropy, equivalence, grw, bohm (scenario runners),
decompose (print the macrostructure as JSON), validate (config check only).
Exit codes: 0 success, 2 config error, 3 numerical-invariant violation.
Errors print as one JSON object on stderr.
"""

import argparse
import json
import sys

from .config import load_config
from .coarse import decomposition_summary
from .errors import ConfigError, QsmError
from .experiments import RUNNERS, jdumps


def _error_json(exc: Exception) -> str:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, ConfigError) and exc.field:
        payload["error"]["field"] = exc.field
    return json.dumps(payload)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsmlab",
        description="Desk-scale quantum statistical mechanics experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("entropy", "macro-weight / Boltzmann entropy time series"),
        ("equivalence", "sample-mixture vs normalized-projector convergence"),
        ("grw", "collapse-center equivalence of the two process versions"),
        ("bohm", "guided-trajectory equivariance for both guidance laws"),
        ("decompose", "print the macro decomposition as JSON"),
        ("validate", "validate a scenario config and exit"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="scenario config JSON")
        cmd.add_argument("--seed", type=int, default=None, help="override master_seed")
        cmd.add_argument("--out", default=None, help="override output directory")
        cmd.add_argument("--threads", type=int, default=1, help="worker threads")
    return parser


def cli_main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed, out_override=args.out)
    except ConfigError as exc:
        print(_error_json(exc), file=sys.stderr)
        return 2

    if args.command == "validate":
        print(json.dumps({"ok": True, "experiment": cfg.experiment,
                          "config_hash": cfg.config_hash()}))
        return 0

    try:
        if args.command == "decompose":
            from .experiments import _lattice_setup
            setup = _lattice_setup(cfg)
            print(jdumps(decomposition_summary(setup.decomposition)), end="")
            return 0
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config declares experiment {cfg.experiment!r}, subcommand is {args.command!r}",
                field="experiment")
        record = RUNNERS[args.command](cfg, out_dir=args.out, threads=args.threads)
        print(json.dumps({
            "ok": True,
            "experiment": record.experiment,
            "out_dir": str(record.out_dir),
            "config_hash": record.config_hash,
            "deterministic_hash": record.deterministic_hash,
        }))
        return 0
    except ConfigError as exc:
        print(_error_json(exc), file=sys.stderr)
        return 2
    except QsmError as exc:
        print(_error_json(exc), file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
