"""Command-line entry point: ``python -m rmexit <verb> ...``.

Exit status: 0 success, 1 usage or bad input, 2 a check failed, 3 a size cap was hit.
"""

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .errors import CodeSpecError, ConfigError, RmExitError, SizeError
from .orchestrator import run_code_info, run_exit, run_sweep, run_symmetry, run_threshold, run_verify
from .schemas import RunConfig, RunResult
from .settings import configure_logging, get_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_SIZE = 3

_KEY_ALIASES = {"code": "codes", "delta": "deltas", "eps-grid": "eps_grid"}


class UsageParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config_file(path: Path) -> Dict[str, Any]:
    """Parse a ``key=value`` run file; ``codes`` split on whitespace or ';', ``deltas`` on ','."""
    values: Dict[str, Any] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {path}: {exc}") from exc

    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _KEY_ALIASES.get(key, key.replace("-", "_"))
        if key not in RunConfig.model_fields:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key == "codes":
            values[key] = [item for item in re.split(r"[;\s]+", value) if item]
        elif key == "deltas":
            values[key] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            values[key] = value
    return values


def _flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    mapping = {
        "code": "codes",
        "eps_grid": "eps_grid",
        "trials": "trials",
        "seed": "seed",
        "delta": "deltas",
        "out": "out",
        "workers": "workers",
        "focus": "focus",
        "c": "c",
        "quads": "quads",
    }
    for attr, field in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[field] = value
    for flag in ("exact", "block"):
        if getattr(args, flag, False):
            overrides[flag] = True
    return overrides


def build_config(args: argparse.Namespace) -> RunConfig:
    """Config file values, then CLI flags on top; workers fall back to RMEXIT_WORKERS."""
    values: Dict[str, Any] = {"workers": get_settings().workers}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    values.update(_flag_overrides(args))
    return RunConfig(**values)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--code", action="append", help="rm:n,r | hadamard:n:k1,k2 | generator file; repeatable")
    parser.add_argument("--config", type=Path, help="key=value run file; flags override it")
    parser.add_argument("--eps-grid", dest="eps_grid", help="lo:hi:steps inside [0, 1]")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--delta", type=float, action="append")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--exact", action="store_true", help="exact enumeration (N ≤ 16)")
    parser.add_argument("--focus", help="'average' or a 0-based bit index")
    parser.add_argument("--block", action="store_true", help="also emit the block-MAP error curve")
    parser.add_argument("--c", type=float, help="sharp-threshold constant (default 1.0, arbitrary)")
    parser.add_argument("--quads", type=int, help="random quadruples for two-transitivity checks")


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(prog="rmexit", description="Reed–Muller EXIT functions over the erasure channel")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", dest="log_level")
    verbs = parser.add_subparsers(dest="verb", required=True)

    info = verbs.add_parser("code-info", help="print N, K, d and the rate")
    info.add_argument("--code", required=True)

    for verb, help_text in (
        ("exit", "EXIT curves as CSV"),
        ("verify", "exact verification suite (N ≤ 16)"),
        ("threshold", "crossings and transition widths"),
        ("sweep", "curves, threshold table, fitted c and an SVG overlay"),
    ):
        _add_run_flags(verbs.add_parser(verb, help=help_text))

    symmetry = verbs.add_parser("symmetry", help="affine symmetry checks")
    symmetry_verbs = symmetry.add_subparsers(dest="action", required=True)
    _add_run_flags(symmetry_verbs.add_parser("verify", help="two-transitivity and Ω_i invariance"))
    return parser


def _report(result: RunResult) -> int:
    for entry in result.action_log:
        print(entry)
    for failure in result.failures:
        print(f"FAILED {failure}", file=sys.stderr)
    print(f"Wrote {len(result.files)} files to {result.out_dir}")
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


_RUNNERS = {
    "exit": run_exit,
    "verify": run_verify,
    "threshold": run_threshold,
    "sweep": run_sweep,
    "symmetry": run_symmetry,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        if args.verb == "code-info":
            info = run_code_info(args.code)
            d = "unknown" if info.d is None else f"{info.d} ({info.d_method})"
            print(f"{info.label}: N={info.N} K={info.K} d={d} R={info.rate}")
            return EXIT_OK
        return _report(_RUNNERS[args.verb](build_config(args)))
    except SizeError as exc:
        logger.error("%s", exc)
        return EXIT_SIZE
    except (ValidationError, ValueError, ConfigError, CodeSpecError) as exc:
        logger.error("Invalid input: %s", exc)
        return EXIT_USAGE
    except RmExitError as exc:
        logger.error("%s", exc)
        return EXIT_CHECK_FAILED
