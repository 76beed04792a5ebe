import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from app.chains.reproduce import cmd_reproduce
from app.chains.templates import FIGURE_IDS
from app.errors import ConfigError, FitError, OutputError, SimulationError
from app.tools.commands import cmd_fit, cmd_run, cmd_scan
from app.tools.config import load_config
from app.tools.types import FitInput, RunConfig

logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3
EXIT_FIT = 4
EXIT_IO = 5

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _window(text: str) -> list[float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    return values


def _add_common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda value: argparse.SUPPRESS) if suppress else (lambda value: value)
    parser.add_argument("--seed", type=int, default=default(None), help="Master seed (overrides the config)")
    parser.add_argument("--out", type=Path, default=default(None), help="Output directory [env: TLS_RELAX_OUT]")
    parser.add_argument("--threads", type=int, default=default(None), help="Worker threads [env: TLS_RELAX_THREADS]")
    parser.add_argument("--log-level", default=default(None), help="Logging level [env: LOG_LEVEL]")
    parser.add_argument("--plot", action="store_true", default=default(False), help="Also write SVG plots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tls-relax",
        description="Qubit relaxation in a one-dimensional many-body TLS chain.",
    )
    _add_common(parser, suppress=False)
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one trajectory ensemble")
    run.add_argument("config", type=Path, help="Run configuration file")

    fit = commands.add_parser("fit", help="Fit A exp(-t/T) + C to an emitted CSV")
    fit.add_argument("csv", type=Path)
    fit.add_argument("--observable", choices=["n_q", "coherence"], default="n_q")
    fit.add_argument("--offset", default="free", help="'free' or 'fixed=<value>'")
    fit.add_argument("--window", type=_window, default=None, help="lo,hi time window")
    fit.add_argument("--unit-mhz", type=float, default=1.0, help="Energy unit for the microsecond conversion")

    scan = commands.add_parser("scan", help="Decay times and their power law over J_q_tau")
    scan.add_argument("config", type=Path, help="Base run configuration file")
    scan.add_argument("--J", dest="J_list", type=_float_list, required=True, help="Comma separated couplings")

    reproduce = commands.add_parser("reproduce", help="Reproduce one published figure")
    reproduce.add_argument("figure_id", choices=FIGURE_IDS)

    for sub in (run, fit, scan, reproduce):
        _add_common(sub, suppress=True)
    return parser


def configure_logging(level: Optional[str]) -> None:
    level = (level or os.environ.get("LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _workers(args: argparse.Namespace) -> Optional[int]:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("TLS_RELAX_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"TLS_RELAX_THREADS must be an integer, got {env!r}")
    return None


def _out_dir(args: argparse.Namespace) -> Optional[Path]:
    if args.out is not None:
        return args.out
    env = os.environ.get("TLS_RELAX_OUT")
    return Path(env) if env else None


def _with_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.plot:
        overrides["plot"] = True
    out_dir = _out_dir(args)
    if out_dir is not None:
        overrides["output_dir"] = str(out_dir)
    return config.model_copy(update=overrides)


def dispatch(args: argparse.Namespace) -> int:
    workers = _workers(args)

    if args.command == "run":
        config = _with_overrides(load_config(args.config), args)
        result = cmd_run(config, workers=workers)
        ensemble_csv = result.paths["ensemble_n_q"]
        print(f"wrote {len(result.paths)} files, ensemble mean in {ensemble_csv}")
        return EXIT_OK

    if args.command == "fit":
        report = cmd_fit(
            FitInput(
                csv_path=args.csv,
                observable=args.observable,
                offset_mode=args.offset,
                window=args.window,
                unit_MHz=args.unit_mhz,
            )
        )
        print(report.text, end="")
        return EXIT_OK if report.result.converged else EXIT_FIT

    if args.command == "scan":
        config = _with_overrides(load_config(args.config), args)
        report = cmd_scan(config, args.J_list, workers=workers)
        print(report.text, end="")
        return EXIT_OK

    if args.command == "reproduce":
        result = cmd_reproduce(args.figure_id, args.seed, _out_dir(args), workers, args.plot)
        print(result.text, end="")
        return EXIT_OK

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return dispatch(args)
    except (ConfigError, ValidationError) as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except FitError as exc:
        logger.error("fit error: %s", exc)
        return EXIT_FIT
    except OutputError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    except SimulationError as exc:
        logger.error("simulation error: %s", exc)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
