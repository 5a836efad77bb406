from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from maserthermo import __version__
from maserthermo.config import PARAM_KEYS, Tolerances, load_config
from maserthermo.core.params import BENCHMARK_PARAMS, EngineParams
from maserthermo.errors import ConfigError, MaserError, ParameterError
from maserthermo.sweep.records import PointRecord, eval_point
from maserthermo.sweep.runner import SweepAxis, SweepConfig, run_sweep
from maserthermo.sweep.verify import verify_all
from maserthermo.sweep.violation import DEFAULT_BUDGET, DEFAULT_SEED, SEARCH_DIMENSIONS, SearchConfig, find_violation
from maserthermo.utils.logging import configure_logging

log = logging.getLogger("cli")

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(message)


def _key_value(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = (part.strip() for part in text.split("=", 1))
    return name, value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML (.yaml/.yml) or flat key = value config file")
    for key in PARAM_KEYS:
        common.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float, default=None)
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default: {DEFAULT_SEED})")
    common.add_argument("--out", default=None, help="output CSV path")
    common.add_argument("--verify", action="store_true", default=None, help="cross-check against numeric oracles")
    common.add_argument("--sweep", action="append", default=None, metavar="NAME:MIN:MAX:COUNT[:log]")
    common.add_argument("--tolerance", action="append", type=_key_value, default=[], metavar="NAME=VALUE")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--log-level", default=None, help="overrides LOG_LEVEL")

    parser = _Parser(prog="maserthermo", description="Three-level maser heat engine thermodynamics")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("point", parents=[common], help="evaluate a single parameter set")
    sub.add_parser("sweep", parents=[common], help="sweep up to two parameters into a CSV")
    fv = sub.add_parser("find-violation", parents=[common], help="search for sigma_full_naive < 0")
    fv.add_argument("--budget", type=int, default=None, help=f"samples (default: {DEFAULT_BUDGET})")
    fv.add_argument("--fix", action="append", type=_key_value, default=[], metavar="DIM=VALUE",
                    help=f"pin a search dimension ({', '.join(SEARCH_DIMENSIONS)})")
    fv.add_argument("--tie-occupations", action="store_true", help="search with n_l = n_u")
    sub.add_parser("verify", parents=[common], help="run every invariant check and report")
    return parser


def resolve_settings(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then flags."""
    settings: dict = BENCHMARK_PARAMS.as_dict()
    settings.update({"seed": DEFAULT_SEED, "out": None, "verify": False, "sweep": [], "workers": 1,
                     "tolerances": {}, "budget": DEFAULT_BUDGET})
    if args.config:
        file_cfg = load_config(args.config)
        tolerances = file_cfg.pop("tolerances", None) or {}
        sweep = file_cfg.pop("sweep", None)
        unknown = set(file_cfg) - set(settings)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        settings.update({k: v for k, v in file_cfg.items() if v is not None})
        settings["tolerances"].update(tolerances)
        if sweep:
            settings["sweep"] = [sweep] if isinstance(sweep, str) else list(sweep)
    for key in PARAM_KEYS + ("seed", "out", "verify", "workers", "budget"):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if args.sweep:
        settings["sweep"] = list(args.sweep)
    settings["tolerances"].update(dict(args.tolerance))
    return settings


def _params(settings: dict) -> EngineParams:
    return EngineParams.from_mapping(settings)


def _print_record(record: PointRecord) -> None:
    for key, value in record.as_row().items():
        text = "" if value is None else repr(value)
        print(f"{key} = {text}")


def _cmd_point(settings: dict, tolerances: Tolerances) -> int:
    record = eval_point(_params(settings), verify=bool(settings["verify"]), tolerances=tolerances)
    _print_record(record)
    return EXIT_INVARIANT if record.invariant_failures else EXIT_OK


def _cmd_sweep(settings: dict, tolerances: Tolerances) -> int:
    config = SweepConfig(
        base=_params(settings),
        axes=tuple(SweepAxis.parse(s) for s in settings["sweep"]),
        out=Path(settings["out"]) if settings["out"] else None,
        seed=int(settings["seed"]),
        tolerances=tolerances,
        verify=bool(settings["verify"]),
        workers=int(settings["workers"]),
    )
    _, summary = run_sweep(config)
    print(summary.line())
    return EXIT_INVARIANT if summary.invariant_failures else EXIT_OK


def _cmd_find_violation(settings: dict, tolerances: Tolerances, args: argparse.Namespace) -> int:
    fixed = {}
    for name, value in args.fix:
        try:
            fixed[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--fix {name}: {exc}") from exc
    config = SearchConfig(
        base=_params(settings),
        fixed=fixed,
        tie_occupations=args.tie_occupations,
        budget=int(settings["budget"]),
        seed=int(settings["seed"]),
        tolerances=tolerances,
    )
    result = find_violation(config)
    if not result.found:
        print(f"not-found samples_tried={result.samples_tried}")
        return EXIT_INVARIANT
    print(f"# seed = {result.seed}")
    print(f"# samples_tried = {result.samples_tried}")
    _print_record(result.record)
    return EXIT_OK


def _cmd_verify(settings: dict, tolerances: Tolerances) -> int:
    report = verify_all(_params(settings), tolerances)
    print(report.render())
    return report.exit_status


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level)
        settings = resolve_settings(args)
        tolerances = Tolerances.from_mapping(settings["tolerances"])
        if args.command == "point":
            return _cmd_point(settings, tolerances)
        if args.command == "sweep":
            return _cmd_sweep(settings, tolerances)
        if args.command == "find-violation":
            return _cmd_find_violation(settings, tolerances, args)
        return _cmd_verify(settings, tolerances)
    except (ConfigError, ParameterError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MaserError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INVARIANT


def main_entry() -> None:
    raise SystemExit(main())
