"""Exact and Monte Carlo EXIT functions, Area Theorem checks.

Exact computations enumerate {0,1}^(N−1) (or {0,1}^N) as integer bit masks and are
capped at ``Settings.exact_max_n``. Monte Carlo runs store each trial's critical
erasure probability, so a single set of trials evaluates any ε grid.
"""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import comb, sqrt
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel_decoder import block_threshold, bit_threshold, omega_membership, trial_uniforms
from .codes import LinearCode, codeword_masks
from .errors import ArgumentError, SizeError
from .gf2core import BitVector
from .schemas import CheckResult, ExitCurve, ExitPoint, ExitPolynomial, VerifyReport
from .settings import get_settings

logger = logging.getLogger(__name__)

Focus = Union[int, str]
PARTIAL_AREA_POINTS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


def _check_exact(code: LinearCode) -> None:
    cap = get_settings().exact_max_n
    if code.N > cap:
        raise SizeError(
            f"{code.label} has N={code.N} > {cap}; exact EXIT enumeration is capped, "
            "use exit_monte_carlo instead"
        )


def _check_bit(code: LinearCode, i: int) -> None:
    if not 0 <= i < code.N:
        raise ArgumentError(f"Bit index {i} out of range for N={code.N}")


def popcounts(bits: int) -> np.ndarray:
    idx = np.arange(1 << bits, dtype=np.int64)
    counts = np.zeros(1 << bits, dtype=np.int64)
    for b in range(bits):
        counts += (idx >> b) & 1
    return counts


def reduce_masks(masks: np.ndarray, i: int) -> np.ndarray:
    """Drop bit i from each mask, shifting higher bits down."""
    low = masks & ((1 << i) - 1)
    high = (masks >> (i + 1)) << i
    return low | high


def _up_closure(table: np.ndarray, bits: int) -> None:
    for b in range(bits):
        view = table.reshape(-1, 2, 1 << b)
        view[:, 1, :] |= view[:, 0, :]


def _subset_sums(values: np.ndarray, bits: int) -> None:
    for b in range(bits):
        view = values.reshape(-1, 2, 1 << b)
        view[:, 1, :] += view[:, 0, :]


def omega_table(code: LinearCode, i: int) -> np.ndarray:
    """Indicator of Ω_i over all reduced patterns ω, indexed by bit mask.

    Ω_i is the up-set generated by c_{~i} for codewords c with c_i = 1.
    """
    _check_exact(code)
    _check_bit(code, i)
    masks = codeword_masks(code)
    hits = masks[((masks >> i) & 1) == 1]
    bits = code.N - 1
    table = np.zeros(1 << bits, dtype=bool)
    table[reduce_masks(hits, i)] = True
    _up_closure(table, bits)
    return table


def omega_decoder_mismatches(code: LinearCode, i: int, masks: Optional[Iterable[int]] = None) -> int:
    """Reduced patterns where the codeword-built Ω_i table and the span decoder disagree."""
    table = omega_table(code, i)
    if masks is None:
        masks = range(table.size)
    mismatches = 0
    for mask in masks:
        omega = BitVector.from_int(code.N - 1, int(mask))
        if bool(table[mask]) != omega_membership(code, i, omega):
            mismatches += 1
    return mismatches


def exit_exact(code: LinearCode, i: int) -> ExitPolynomial:
    table = omega_table(code, i)
    weights = np.bincount(popcounts(code.N - 1)[table], minlength=code.N)
    return ExitPolynomial(
        N=code.N,
        focus=i,
        weights=tuple(int(a) for a in weights),
        label=code.label,
    )


def average_exit_exact(code: LinearCode, use_symmetry: bool = False) -> ExitPolynomial:
    """Average EXIT polynomial; with ``use_symmetry`` a two-transitive code uses h_0."""
    _check_exact(code)
    if use_symmetry and code.two_transitive:
        first = exit_exact(code, 0)
        return ExitPolynomial(N=code.N, focus=None, weights=first.weights, label=code.label)

    totals = [0] * code.N
    for i in range(code.N):
        for w, a in enumerate(exit_exact(code, i).weights):
            totals[w] += a
    return ExitPolynomial(
        N=code.N,
        focus=None,
        weights=tuple(totals),
        denominator=code.N,
        label=code.label,
    )


def area_exact(p: ExitPolynomial) -> Fraction:
    return p.area()


def partial_area_exact(p: ExitPolynomial, eps: Union[int, str, Fraction]) -> Fraction:
    """∫_0^ε h(x) dx as an exact rational."""
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ArgumentError(f"ε must lie in [0, 1], got {eps}")
    m = p.N - 1
    total = Fraction(0)
    for w, a in enumerate(p.weights):
        if not a:
            continue
        rest = m - w
        term = sum(
            Fraction(comb(rest, k) * (-1) ** k) * eps ** (w + k + 1) / (w + k + 1)
            for k in range(rest + 1)
        )
        total += a * term
    return total / p.denominator


def erasure_dimension_profile(code: LinearCode) -> Tuple[List[int], List[int]]:
    """Per erasure weight w: (Σ_E dim{c : supp c ⊆ E}, #{E : block-MAP fails}).

    dim{c : supp c ⊆ E} = K − rank(G restricted to the non-erased columns).
    """
    _check_exact(code)
    bits = code.N
    counts = np.zeros(1 << bits, dtype=np.int64)
    counts[codeword_masks(code)] += 1
    _subset_sums(counts, bits)
    dims = np.round(np.log2(counts)).astype(np.int64)
    weights = popcounts(bits)

    entropy = np.zeros(bits + 1, dtype=np.int64)
    np.add.at(entropy, weights, dims)
    failures = np.bincount(weights[dims > 0], minlength=bits + 1)
    return [int(x) for x in entropy], [int(x) for x in failures]


def _binomial_measure(profile: Sequence[int], N: int, eps: Fraction) -> Fraction:
    return sum(
        (Fraction(s) * eps**w * (1 - eps) ** (N - w) for w, s in enumerate(profile) if s),
        Fraction(0),
    )


def conditional_entropy_exact(code: LinearCode, eps: Union[int, str, Fraction]) -> Fraction:
    """H(X|Y) in bits for a uniform codeword sent over BEC(ε)."""
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ArgumentError(f"ε must lie in [0, 1], got {eps}")
    entropy, _ = erasure_dimension_profile(code)
    return _binomial_measure(entropy, code.N, eps)


def block_error_exact(code: LinearCode, eps: Union[int, str, Fraction]) -> Fraction:
    """Block-MAP failure probability over BEC(ε)."""
    eps = Fraction(eps)
    _, failures = erasure_dimension_profile(code)
    return _binomial_measure(failures, code.N, eps)


def check_profile_monotone(p: ExitPolynomial) -> bool:
    """A_w / C(N−1, w) nondecreasing in w; logged as a warning when it fails."""
    profile = p.normalized_profile()
    ok = all(b >= a for a, b in zip(profile, profile[1:]))
    if not ok:
        logger.warning("Normalized weight profile of %s (focus %s) is not monotone", p.label, p.focus)
    return ok


def check_exit_monotone(p: ExitPolynomial, points: int = 1000) -> bool:
    values = p.evaluate_grid(np.linspace(0.0, 1.0, points))
    return bool(np.all(np.diff(values) >= -1e-12))


def verify_area_theorem(code: LinearCode) -> VerifyReport:
    report = VerifyReport(label=code.label)
    average = average_exit_exact(code)
    area = area_exact(average)
    report.checks.append(
        CheckResult(
            name="area_theorem",
            passed=area == code.rate,
            expected=str(code.rate),
            actual=str(area),
        )
    )
    for eps in PARTIAL_AREA_POINTS:
        lhs = code.N * partial_area_exact(average, eps)
        rhs = conditional_entropy_exact(code, eps)
        report.checks.append(
            CheckResult(
                name=f"partial_area@{eps}",
                passed=lhs == rhs,
                expected=str(rhs),
                actual=str(lhs),
                detail="N * integral of h from 0 to eps versus H(X|Y)",
            )
        )
    logger.info("Area Theorem on %s: %s", code.label, "pass" if report.passed else "FAIL")
    return report


def _threshold_chunk(
    code: LinearCode,
    positions: Sequence[int],
    seed: int,
    start: int,
    stop: int,
    block: bool,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    bit = np.empty((stop - start, len(positions)), dtype=float)
    blk = np.empty(stop - start, dtype=float) if block else None
    for row, trial in enumerate(range(start, stop)):
        uniforms = trial_uniforms(code.N, seed, trial)
        for col, i in enumerate(positions):
            bit[row, col] = bit_threshold(code, i, uniforms)
        if blk is not None:
            blk[row] = block_threshold(code, uniforms)
    return bit, blk


def _fraction_below(thresholds: np.ndarray, grid: Sequence[float]) -> np.ndarray:
    """Fraction of thresholds τ with τ < ε, for each ε of the grid."""
    ordered = np.sort(thresholds.reshape(-1))
    below = np.searchsorted(ordered, np.asarray(grid, dtype=float), side="left")
    return below / ordered.size


def _chunks(trials: int, workers: int) -> List[Tuple[int, int]]:
    bounds = np.linspace(0, trials, min(workers, trials) + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


class MonteCarloRun:
    """Per-trial critical erasure probabilities for one code and focus."""

    def __init__(
        self,
        code: LinearCode,
        focus: str,
        seed: int,
        thresholds: np.ndarray,
        block_thresholds: Optional[np.ndarray] = None,
    ) -> None:
        self.code = code
        self.focus = focus
        self.seed = seed
        self.thresholds = thresholds
        self.block_thresholds = block_thresholds

    @property
    def trials(self) -> int:
        return int(self.thresholds.shape[0])

    def failure_rates(self, grid: Sequence[float]) -> np.ndarray:
        return _fraction_below(self.thresholds, grid)

    def _to_curve(self, grid: Sequence[float], rates: np.ndarray, focus: str) -> ExitCurve:
        z = get_settings().z
        points = [
            ExitPoint(
                epsilon=float(eps),
                h=float(h),
                half_width=z * sqrt(h * (1.0 - h) / self.trials),
                trials=self.trials,
            )
            for eps, h in zip(grid, rates)
        ]
        return ExitCurve(
            label=self.code.label,
            focus=focus,
            N=self.code.N,
            rate=str(self.code.rate),
            seed=self.seed,
            points=points,
        )

    def curve(self, grid: Sequence[float]) -> ExitCurve:
        return self._to_curve(grid, self.failure_rates(grid), self.focus)

    def block_curve(self, grid: Sequence[float]) -> ExitCurve:
        if self.block_thresholds is None:
            raise ArgumentError("This run did not record block-MAP thresholds")
        return self._to_curve(grid, _fraction_below(self.block_thresholds, grid), "block")


def _focus_positions(code: LinearCode, focus: Focus) -> Tuple[List[int], str]:
    if focus == "average":
        if code.two_transitive:
            return [0], "average"
        return list(range(code.N)), "average"
    i = int(focus)
    _check_bit(code, i)
    return [i], str(i)


def run_monte_carlo(
    code: LinearCode,
    focus: Focus,
    trials: int,
    seed: int,
    workers: int = 1,
    block: bool = False,
) -> MonteCarloRun:
    if trials < 1:
        raise ArgumentError(f"trials must be at least 1, got {trials}")
    positions, focus_label = _focus_positions(code, focus)
    chunks = _chunks(trials, workers)
    logger.info(
        "Monte Carlo %s focus=%s trials=%d seed=%d workers=%d",
        code.label, focus_label, trials, seed, workers,
    )

    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_threshold_chunk, code, positions, seed, start, stop, block)
                for start, stop in chunks
            ]
            results = [future.result() for future in futures]
    else:
        results = [_threshold_chunk(code, positions, seed, start, stop, block) for start, stop in chunks]

    thresholds = np.concatenate([bit for bit, _ in results])
    block_thresholds = np.concatenate([blk for _, blk in results]) if block else None
    return MonteCarloRun(code, focus_label, seed, thresholds, block_thresholds)


def exit_monte_carlo(
    code: LinearCode,
    focus: Focus,
    grid: Sequence[float],
    trials: int,
    seed: int,
    workers: int = 1,
) -> ExitCurve:
    return run_monte_carlo(code, focus, trials, seed, workers).curve(grid)


def exact_curve(p: ExitPolynomial, grid: Sequence[float], rate: Fraction) -> ExitCurve:
    """Exact EXIT values on a grid in ExitCurve form (zero half-width, zero trials)."""
    values = p.evaluate_grid(grid)
    return ExitCurve(
        label=p.label,
        focus="average" if p.focus is None else str(p.focus),
        N=p.N,
        rate=str(rate),
        points=[
            ExitPoint(epsilon=float(eps), h=min(max(float(h), 0.0), 1.0), half_width=0.0, trials=0)
            for eps, h in zip(grid, values)
        ],
    )


def curve_to_csv(curve: ExitCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epsilon", "h", "half_width", "trials"])
    for point in curve.points:
        writer.writerow(
            [f"{point.epsilon:.17g}", f"{point.h:.17g}", f"{point.half_width:.17g}", point.trials]
        )
    return buf.getvalue()
