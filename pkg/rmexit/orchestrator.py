"""Run pipelines behind the CLI verbs.

Every run writes into ``config.out`` and finishes with ``manifest.json``, which
lists each emitted file with its sha256 and the run's action log.
"""

import hashlib
import json
import logging
import re
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from . import __version__
from .channel_decoder import dominance_violations
from .codes import LinearCode, min_distance_bruteforce, parse_code_spec
from .errors import ArgumentError, CodeSpecError, RmExitError, ThresholdError
from .exit_analysis import (
    MonteCarloRun,
    average_exit_exact,
    block_error_exact,
    check_exit_monotone,
    check_profile_monotone,
    curve_to_csv,
    exact_curve,
    exit_exact,
    omega_decoder_mismatches,
    run_monte_carlo,
    verify_area_theorem,
)
from .plots import plot_exit_curves
from .schemas import (
    CheckResult,
    CodeInfo,
    ExitCurve,
    ExitPoint,
    ExitPolynomial,
    ManifestEntry,
    RunConfig,
    RunManifest,
    RunResult,
    ThresholdReport,
    VerifyReport,
)
from .symmetry import verify_exit_equality, verify_symmetry
from .threshold import estimate_crossings, fit_constant_c

logger = logging.getLogger(__name__)

BRUTEFORCE_MAX_K = 20
MONOTONE_SAMPLES = 200
ORACLE_SAMPLES = 256


def slug(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", label.lower()).strip("_")


def to_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


class RunWriter:
    """Writes run files and keeps their digests for the manifest."""

    def __init__(self, out_dir: str) -> None:
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.entries: List[ManifestEntry] = []
        self.action_log: List[str] = []
        self.started = time.perf_counter()

    def log(self, message: str) -> None:
        logger.info(message)
        self.action_log.append(message)

    def _record(self, path: Path) -> None:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        self.entries.append(ManifestEntry(path=path.name, sha256=digest))
        self.log(f"Writer: {path.name}")

    def write_text(self, name: str, text: str) -> Path:
        path = self.out_dir / name
        path.write_text(text, encoding="utf-8")
        self._record(path)
        return path

    def write_json(self, name: str, payload: Any) -> Path:
        return self.write_text(name, to_json(payload))

    def write_svg(self, name: str, curves: List[ExitCurve]) -> Path:
        path = plot_exit_curves(curves, self.out_dir / name)
        self._record(path)
        return path

    def finish(self, config: RunConfig, failures: Optional[List[str]] = None, passed: bool = True) -> RunResult:
        manifest = RunManifest(
            config=config.echo(),
            version=__version__,
            wall_time_s=round(time.perf_counter() - self.started, 3),
            files=self.entries,
            action_log=self.action_log,
        )
        (self.out_dir / "manifest.json").write_text(to_json(manifest.model_dump(mode="json")), encoding="utf-8")
        return RunResult(
            out_dir=str(self.out_dir),
            files=self.entries,
            action_log=self.action_log,
            failures=failures or [],
            passed=passed,
        )


def _codes(config: RunConfig) -> List[LinearCode]:
    if not config.codes:
        raise ArgumentError("At least one --code is required")
    return [parse_code_spec(spec) for spec in config.codes]


def run_code_info(spec: str) -> CodeInfo:
    code = parse_code_spec(spec)
    if code.K <= BRUTEFORCE_MAX_K:
        d, method = min_distance_bruteforce(code), "bruteforce"
    elif code.params is not None:
        d, method = code.params.d, "formula"
    else:
        d, method = None, "unavailable"
    return CodeInfo(label=code.label, N=code.N, K=code.K, d=d, d_method=method, rate=str(code.rate))


def _exact_polynomial(code: LinearCode, focus: str) -> ExitPolynomial:
    if focus == "average":
        return average_exit_exact(code, use_symmetry=True)
    return exit_exact(code, int(focus))


def _block_curve_exact(code: LinearCode, grid: List[float]) -> ExitCurve:
    points = [
        ExitPoint(epsilon=eps, h=float(block_error_exact(code, Fraction(eps))), half_width=0.0, trials=0)
        for eps in grid
    ]
    return ExitCurve(label=code.label, focus="block", N=code.N, rate=str(code.rate), points=points)


def _measure(
    code: LinearCode, config: RunConfig, writer: RunWriter
) -> Tuple[ExitCurve, Optional[ExitPolynomial], Optional[MonteCarloRun]]:
    """EXIT curve of one code on the config grid, exact or sampled."""
    grid = config.grid()
    if config.exact:
        poly = _exact_polynomial(code, config.focus)
        writer.log(f"Exact: {code.label} weights {list(poly.weights)}")
        return exact_curve(poly, grid, code.rate), poly, None

    run = run_monte_carlo(code, config.focus, config.trials, config.seed, config.workers, block=config.block)
    writer.log(f"MonteCarlo: {code.label} {run.trials} trials")
    return run.curve(grid), None, run


def run_exit(config: RunConfig) -> RunResult:
    writer = RunWriter(config.out)
    for code in _codes(config):
        name = slug(code.label)
        curve, poly, run = _measure(code, config, writer)
        writer.write_text(f"{name}_exit.csv", curve_to_csv(curve))
        if poly is not None:
            writer.write_json(f"{name}_exit.json", poly.to_payload())
        if config.block:
            block = run.block_curve(config.grid()) if run is not None else _block_curve_exact(code, config.grid())
            writer.write_text(f"{name}_block.csv", curve_to_csv(block))
    return writer.finish(config)


def _omega_checks(code: LinearCode, seed: int) -> List[CheckResult]:
    checks, violations = dominance_violations(code, MONOTONE_SAMPLES, seed)
    rng = np.random.default_rng(seed)
    size = 1 << (code.N - 1)
    masks = range(size) if size <= ORACLE_SAMPLES else rng.choice(size, ORACLE_SAMPLES, replace=False).tolist()
    i = int(rng.integers(code.N))
    mismatches = omega_decoder_mismatches(code, i, masks)
    return [
        CheckResult(
            name="omega_monotone",
            passed=violations == 0,
            expected="0 violations",
            actual=f"{violations} violations in {checks} checks",
        ),
        CheckResult(
            name="omega_decoder_agreement",
            passed=mismatches == 0,
            expected="0 mismatches",
            actual=f"{mismatches} mismatches",
            detail=f"focus bit {i}",
        ),
    ]


def verify_code(code: LinearCode, config: RunConfig) -> VerifyReport:
    """Exact suite: area theorem, EXIT equality, monotonicity and, for RM codes, symmetry."""
    report = verify_area_theorem(code)
    average = average_exit_exact(code)

    equal = verify_exit_equality(code)
    report.checks.append(CheckResult(name="exit_equality", passed=equal, detail="h_i identical for all i"))
    report.checks.append(CheckResult(name="exit_monotone", passed=check_exit_monotone(average)))
    report.checks.extend(_omega_checks(code, config.seed))

    profile_ok = check_profile_monotone(average)
    report.checks.append(
        CheckResult(
            name="normalized_profile_monotone",
            passed=True,
            actual=str(profile_ok),
            detail=None if profile_ok else "warning only",
        )
    )
    if code.params is not None:
        report.checks.extend(verify_symmetry(code.params, config.quads, config.seed).checks)
    return report


def run_verify(config: RunConfig) -> RunResult:
    writer = RunWriter(config.out)
    failures = []
    for code in _codes(config):
        report = verify_code(code, config)
        writer.write_json(f"{slug(code.label)}_verify.json", report.model_dump(mode="json"))
        writer.log(f"Verify: {code.label} {'pass' if report.passed else 'FAIL'}")
        failures.extend(f"{code.label}: {check.name}" for check in report.failed)
    return writer.finish(config, failures=failures, passed=not failures)


def run_symmetry(config: RunConfig) -> RunResult:
    writer = RunWriter(config.out)
    failures = []
    for code in _codes(config):
        if code.params is None:
            raise CodeSpecError(f"Symmetry checks need an RM code, got {code.label}")
        report = verify_symmetry(code.params, config.quads, config.seed)
        writer.write_json(f"{slug(code.label)}_symmetry.json", report.model_dump(mode="json"))
        writer.log(f"Symmetry: {code.label} {'pass' if report.passed else 'FAIL'}")
        failures.extend(f"{code.label}: {check.name}" for check in report.failed)
    return writer.finish(config, failures=failures, passed=not failures)


def _reports(
    code: LinearCode,
    config: RunConfig,
    poly: Optional[ExitPolynomial],
    run: Optional[MonteCarloRun],
) -> List[ThresholdReport]:
    source = poly if poly is not None else run
    return [
        estimate_crossings(source, delta, rate=code.rate, grid=config.grid(), c=config.c)
        for delta in config.deltas
    ]


def _dump_reports(reports: List[ThresholdReport]) -> List[Dict[str, Any]]:
    return [report.model_dump(mode="json") for report in reports]


def run_threshold(config: RunConfig) -> RunResult:
    writer = RunWriter(config.out)
    reports: List[ThresholdReport] = []
    for code in _codes(config):
        _, poly, run = _measure(code, config, writer)
        reports.extend(_reports(code, config, poly, run))
        writer.log(f"Threshold: {code.label} crossings at δ={config.deltas}")
    writer.write_json("thresholds.json", _dump_reports(reports))
    return writer.finish(config)


def _fits(reports: List[ThresholdReport], deltas: List[float], writer: RunWriter) -> List[Dict[str, Any]]:
    fits = []
    for delta in deltas:
        usable = [r for r in reports if r.delta == delta and r.width is not None and r.N >= 3]
        try:
            fit = fit_constant_c(usable)
        except ThresholdError as exc:
            writer.log(f"Fit: skipped δ={delta} ({exc})")
            continue
        writer.log(f"Fit: c={fit.c:.6g} at δ={delta}")
        fits.append(fit.model_dump(mode="json"))
    return fits


def run_sweep(config: RunConfig) -> RunResult:
    """Curves, threshold reports, fitted c and an overlay plot for a list of codes.

    A code that fails is logged and skipped; the others still run.
    """
    if not config.codes:
        raise ArgumentError("A sweep needs at least one --code")
    writer = RunWriter(config.out)
    curves: List[ExitCurve] = []
    reports: List[ThresholdReport] = []
    failures: List[str] = []

    for spec in config.codes:
        try:
            code = parse_code_spec(spec)
            curve, poly, run = _measure(code, config, writer)
            code_reports = _reports(code, config, poly, run)
        except RmExitError as exc:
            logger.exception("Sweep member %s failed", spec)
            writer.log(f"Sweep: {spec} failed ({exc})")
            failures.append(f"{spec}: {exc}")
            continue
        writer.write_text(f"{slug(code.label)}_exit.csv", curve_to_csv(curve))
        curves.append(curve)
        reports.extend(code_reports)

    writer.write_json("thresholds.json", _dump_reports(reports))
    writer.write_json("fit.json", _fits(reports, config.deltas, writer))
    if curves:
        writer.write_svg("exit_curves.svg", curves)
    return writer.finish(config, failures=failures, passed=bool(curves))
