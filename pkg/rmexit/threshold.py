"""Threshold location, transition width and the sharp-threshold bounds.

Logarithms are natural; the base is absorbed into the constant c, which is
always an explicit input (default 1.0, an arbitrary choice).
"""

import logging
from fractions import Fraction
from math import log
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import bisect
from sklearn.isotonic import isotonic_regression

from .errors import ArgumentError, ThresholdError
from .exit_analysis import MonteCarloRun, area_exact, check_exit_monotone
from .schemas import BoundParams, CheckResult, ConstantFit, ExitCurve, ExitPolynomial, ThresholdReport

logger = logging.getLogger(__name__)

Source = Union[ExitCurve, ExitPolynomial, MonteCarloRun]
DEFAULT_GRID = tuple(float(x) for x in np.linspace(0.0, 1.0, 33))
REFINE_POINTS = 8
XTOL = 1e-12


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 0.5:
        raise ArgumentError(f"δ must lie in (0, 1/2), got {delta}")


def monotone_fit(curve: ExitCurve) -> np.ndarray:
    """Nondecreasing least-squares fit of ĥ, weighted by trial counts."""
    weights = curve.trial_counts
    if not np.any(weights > 0):
        weights = np.ones_like(weights)
    return isotonic_regression(
        curve.values,
        sample_weight=weights,
        y_min=0.0,
        y_max=1.0,
        increasing=True,
    )


def _bracket(values: np.ndarray, level: float) -> Optional[int]:
    """Index of the first value ≥ level, or None."""
    hits = np.flatnonzero(values >= level)
    return int(hits[0]) if hits.size else None


def _interp_crossing(grid: np.ndarray, values: np.ndarray, level: float) -> Optional[float]:
    k = _bracket(values, level)
    if k is None:
        return None
    if k == 0:
        return float(grid[0])
    x0, x1 = grid[k - 1], grid[k]
    y0, y1 = values[k - 1], values[k]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def refine_grid(
    grid: Sequence[float],
    values: Sequence[float],
    levels: Sequence[float],
    points: int = REFINE_POINTS,
) -> List[float]:
    """``grid`` plus ``points`` evenly spaced interior points in each bracketing interval."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    extra = []
    for level in levels:
        k = _bracket(values, level)
        if k is None or k == 0:
            continue
        extra.append(np.linspace(grid[k - 1], grid[k], points + 2)[1:-1])
    merged = np.unique(np.concatenate([grid, *extra])) if extra else grid
    return [float(x) for x in merged]


def _exact_crossing(p: ExitPolynomial, level: float) -> Optional[float]:
    def gap(eps: float) -> float:
        return float(p.evaluate(eps)) - level

    if gap(0.0) >= 0.0:
        return 0.0
    top = gap(1.0)
    if top < 0.0:
        return None
    if top == 0.0:
        return 1.0
    return float(bisect(gap, 0.0, 1.0, xtol=XTOL))


def _report(
    label: str,
    delta: float,
    N: int,
    rate: Fraction,
    crossings: Sequence[Optional[float]],
    c: float,
) -> ThresholdReport:
    lower, mid, upper = crossings
    width = upper - lower if lower is not None and upper is not None else None
    gap_bound = None
    if N >= 3 and 0 < rate < 1:
        gap_bound = capacity_gap_bound(BoundParams(c=c, delta=delta, N=N, R=float(rate)))
    return ThresholdReport(
        label=label,
        delta=delta,
        N=N,
        rate=str(rate),
        capacity=float(1 - rate),
        eps_lower=lower,
        eps_mid=mid,
        eps_upper=upper,
        width=width,
        gap_bound=gap_bound,
    )


def estimate_crossings(
    source: Source,
    delta: float,
    rate: Optional[Fraction] = None,
    grid: Optional[Sequence[float]] = None,
    c: float = 1.0,
) -> ThresholdReport:
    """Where h crosses δ, 1/2 and 1−δ.

    Exact polynomials are inverted by bisection and must be monotone. Sampled
    curves get an isotonic fit then linear interpolation; a MonteCarloRun is
    additionally re-evaluated on a grid refined around each crossing. A level
    the curve never reaches is reported as None.
    """
    _check_delta(delta)
    levels = (delta, 0.5, 1.0 - delta)

    if isinstance(source, ExitPolynomial):
        if not check_exit_monotone(source):
            raise ThresholdError(f"EXIT polynomial of {source.label} is not monotone on [0, 1]")
        rate = area_exact(source) if rate is None else Fraction(rate)
        crossings = [_exact_crossing(source, level) for level in levels]
        return _report(source.label, delta, source.N, rate, crossings, c)

    if isinstance(source, MonteCarloRun):
        coarse = source.curve(DEFAULT_GRID if grid is None else grid)
        refined = refine_grid(coarse.epsilons, monotone_fit(coarse), levels)
        curve = source.curve(refined)
    else:
        curve = source

    if len(curve.points) < 2:
        raise ThresholdError(f"Curve for {curve.label} needs at least two points")
    fitted = monotone_fit(curve)
    crossings = [_interp_crossing(curve.epsilons, fitted, level) for level in levels]
    rate = Fraction(curve.rate) if rate is None else Fraction(rate)
    logger.debug("Crossings for %s at δ=%s: %s", curve.label, delta, crossings)
    return _report(curve.label, delta, curve.N, rate, crossings, c)


def fk_width_bound(N: int, delta: float, c: float = 1.0) -> float:
    """c·ln(1/(2δ))/ln N; δ = 1/2 gives 0."""
    if not 0.0 < delta <= 0.5:
        raise ArgumentError(f"δ must lie in (0, 1/2], got {delta}")
    if c <= 0:
        raise ArgumentError(f"c must be positive, got {c}")
    if N < 2:
        raise ArgumentError(f"N must be at least 2, got {N}")
    return c * log(1.0 / (2.0 * delta)) / log(N)


def capacity_gap_bound(p: BoundParams) -> float:
    """Lower bound on ε_lower: 1 − R − δ − δ_n − c·ln(1/(2δ))/ln(N−1)."""
    return 1.0 - p.R - p.delta - p.delta_n - p.c * log(1.0 / (2.0 * p.delta)) / log(p.N - 1)


def check_capacity_bound(report: ThresholdReport, params: BoundParams) -> CheckResult:
    bound = capacity_gap_bound(params)
    if report.eps_lower is None:
        return CheckResult(name="capacity_gap", passed=False, expected=f">= {bound:.6g}", detail="no δ crossing")
    return CheckResult(
        name="capacity_gap",
        passed=report.eps_lower >= bound,
        expected=f">= {bound:.6g}",
        actual=f"{report.eps_lower:.6g}",
    )


def _width_regressor(N: int, delta: float) -> float:
    if N < 3:
        raise ThresholdError(f"Fitting c needs N ≥ 3, got N={N}")
    return log(1.0 / (2.0 * delta)) / log(N - 1)


def fit_constant_c(reports: Sequence[ThresholdReport]) -> ConstantFit:
    """Least-squares c in width ≈ c·ln(1/(2δ))/ln(N−1), fitted through the origin."""
    if len(reports) < 2:
        raise ThresholdError(f"Fitting c needs at least 2 reports, got {len(reports)}")
    deltas = {r.delta for r in reports}
    if len(deltas) != 1:
        raise ThresholdError(f"Reports mix several δ values: {sorted(deltas)}")
    if len({r.N for r in reports}) != len(reports):
        raise ThresholdError("Reports must come from distinct block lengths")
    missing = [r.label for r in reports if r.width is None]
    if missing:
        raise ThresholdError(f"No measured width for {', '.join(missing)}")

    delta = deltas.pop()
    xs = np.array([_width_regressor(r.N, delta) for r in reports])
    widths = np.array([r.width for r in reports], dtype=float)
    solution, *_ = np.linalg.lstsq(xs[:, None], widths, rcond=None)
    c = float(solution[0])
    residuals = widths - c * xs
    logger.info("Fitted c=%.6g from %d reports at δ=%s", c, len(reports), delta)
    return ConstantFit(
        c=c,
        delta=delta,
        xs=[float(x) for x in xs],
        widths=[float(w) for w in widths],
        residuals=[float(r) for r in residuals],
        labels=[r.label for r in reports],
    )
