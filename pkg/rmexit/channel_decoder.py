"""Erasure sampling, bit-MAP and block-MAP decoding over the BEC.

The all-zero codeword is assumed transmitted: over the erasure channel a decoding
failure depends only on the erasure pattern. Bit i fails under the extrinsic
decoder (observation y without y_i) iff column i of the generator is not in the
span of the columns at non-erased positions j != i.
"""

import logging
from enum import Enum
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel

from .codes import LinearCode
from .errors import ArgumentError
from .gf2core import BitVector, ColumnSpanOracle

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1

# Sentinels for per-trial thresholds: failure iff ε > τ.
NEVER_FAILS = 2.0
ALWAYS_FAILS = -1.0


class BitStatus(str, Enum):
    KNOWN = "known"
    RECOVERED = "recovered"
    FAILED = "failed"


class ErasurePattern:
    """Erased positions of a length-N word, with an optional focus bit."""

    __slots__ = ("erased", "focus")

    def __init__(self, erased: BitVector, focus: Optional[int] = None) -> None:
        if focus is not None and not 0 <= focus < erased.length:
            raise ArgumentError(f"Focus bit {focus} out of range for N={erased.length}")
        self.erased = erased
        self.focus = focus

    @classmethod
    def from_indices(cls, N: int, indices: Iterable[int], focus: Optional[int] = None) -> "ErasurePattern":
        return cls(BitVector.from_indices(N, indices), focus)

    @classmethod
    def from_reduced(cls, omega: BitVector, focus: int, focus_erased: bool = False) -> "ErasurePattern":
        """Rebuild a full pattern from the (N−1)-view ω around ``focus``."""
        N = omega.length + 1
        if not 0 <= focus < N:
            raise ArgumentError(f"Focus bit {focus} out of range for N={N}")
        dense = np.insert(omega.to_dense(), focus, 1 if focus_erased else 0)
        return cls(BitVector.from_dense(dense), focus)

    @property
    def N(self) -> int:
        return self.erased.length

    def weight(self) -> int:
        return self.erased.weight()

    def is_erased(self, k: int) -> bool:
        return bool(self.erased.get(k))

    def reduced(self, focus: Optional[int] = None) -> BitVector:
        """The ω view: the pattern with position ``focus`` removed."""
        focus = self.focus if focus is None else focus
        if focus is None:
            raise ArgumentError("A focus bit is required for the reduced view")
        if not 0 <= focus < self.N:
            raise ArgumentError(f"Focus bit {focus} out of range for N={self.N}")
        return BitVector.from_dense(np.delete(self.erased.to_dense(), focus))

    def non_erased(self, exclude: Optional[int] = None) -> List[int]:
        dense = self.erased.to_dense()
        return [j for j in np.flatnonzero(dense == 0).tolist() if j != exclude]


class DecodeReport(BaseModel):
    status: List[BitStatus]
    extrinsic: List[BitStatus]
    block_success: bool

    @property
    def failed_positions(self) -> List[int]:
        return [k for k, s in enumerate(self.status) if s is BitStatus.FAILED]


def trial_uniforms(N: int, seed: int, trial: int) -> np.ndarray:
    """Uniform draws for one trial from a Philox stream keyed by (seed, trial)."""
    key = np.array([seed & _MASK64, trial & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key)).random(N)


def sample_erasures(N: int, eps: float, seed: int, trial: int) -> ErasurePattern:
    if not 0.0 <= eps <= 1.0:
        raise ArgumentError(f"Erasure probability must lie in [0, 1], got {eps}")
    erased = trial_uniforms(N, seed, trial) < eps
    return ErasurePattern(BitVector.from_dense(erased))


def _reduced_to_positions(omega: BitVector, i: int) -> List[int]:
    """Original positions j != i that the ω view marks as not erased."""
    return [k if k < i else k + 1 for k in np.flatnonzero(omega.to_dense() == 0).tolist()]


def omega_membership(code: LinearCode, i: int, omega: Union[BitVector, ErasurePattern]) -> bool:
    """True iff ω ∈ Ω_i, i.e. some codeword with c_i = 1 has c_{~i} ≺ ω."""
    if not 0 <= i < code.N:
        raise ArgumentError(f"Bit index {i} out of range for N={code.N}")
    if isinstance(omega, ErasurePattern):
        omega = omega.reduced(i)
    if omega.length != code.N - 1:
        raise ArgumentError(f"ω must have length {code.N - 1}, got {omega.length}")
    oracle = ColumnSpanOracle(code.generator, _reduced_to_positions(omega, i))
    return not oracle.contains(i)


def bit_map_decode(code: LinearCode, pattern: ErasurePattern) -> DecodeReport:
    if pattern.N != code.N:
        raise ArgumentError(f"Pattern length {pattern.N} does not match N={code.N}")
    unerased = pattern.non_erased()
    shared = ColumnSpanOracle(code.generator, unerased)

    status: List[BitStatus] = []
    extrinsic: List[BitStatus] = []
    for i in range(code.N):
        if pattern.is_erased(i):
            failed = not shared.contains(i)
        else:
            oracle = ColumnSpanOracle(code.generator, [j for j in unerased if j != i])
            failed = not oracle.contains(i)
        verdict = BitStatus.FAILED if failed else BitStatus.RECOVERED
        extrinsic.append(verdict)
        status.append(verdict if pattern.is_erased(i) else BitStatus.KNOWN)

    block_success = BitStatus.FAILED not in status
    return DecodeReport(status=status, extrinsic=extrinsic, block_success=block_success)


def block_map_decode(code: LinearCode, pattern: ErasurePattern) -> bool:
    if pattern.N != code.N:
        raise ArgumentError(f"Pattern length {pattern.N} does not match N={code.N}")
    return ColumnSpanOracle(code.generator, pattern.non_erased()).full_rank


def bit_threshold(code: LinearCode, i: int, uniforms: np.ndarray) -> float:
    """Critical ε of one trial for bit i: the extrinsic decoder fails iff ε > τ.

    Position j is erased iff u_j < ε, so lowering ε un-erases positions in
    decreasing order of u. τ is the u of the column whose arrival first puts
    column i in the span.
    """
    oracle = ColumnSpanOracle(code.generator)
    if oracle.contains(i):
        return NEVER_FAILS
    for j in np.argsort(-uniforms, kind="stable").tolist():
        if j == i:
            continue
        if oracle.extend(j) and oracle.contains(i):
            return float(uniforms[j])
    return ALWAYS_FAILS


def block_threshold(code: LinearCode, uniforms: np.ndarray) -> float:
    """Critical ε of one trial for block-MAP decoding: failure iff ε > τ."""
    oracle = ColumnSpanOracle(code.generator)
    if oracle.full_rank:
        return NEVER_FAILS
    for j in np.argsort(-uniforms, kind="stable").tolist():
        if oracle.extend(j) and oracle.full_rank:
            return float(uniforms[j])
    return ALWAYS_FAILS


def erasure_thresholds(code: LinearCode, positions: Iterable[int], seed: int, trial: int) -> np.ndarray:
    uniforms = trial_uniforms(code.N, seed, trial)
    return np.array([bit_threshold(code, i, uniforms) for i in positions], dtype=float)


def dominance_violations(code: LinearCode, samples: int, seed: int, max_draws: Optional[int] = None) -> Tuple[int, int]:
    """Random checks that ω ∈ Ω_i and ω ≺ ω′ imply ω′ ∈ Ω_i.

    Draws (i, ω) until ``samples`` draws land in Ω_i, each giving one check against a
    random ω′ ⪰ ω. Returns (checks made, violations); fewer than ``samples`` checks
    only when ``max_draws`` (default 100 × samples) runs out first.
    """
    rng = np.random.default_rng(seed)
    m = code.N - 1
    budget = 100 * samples if max_draws is None else max_draws
    checks = violations = draws = 0
    while checks < samples and draws < budget:
        draws += 1
        i = int(rng.integers(code.N))
        p = rng.uniform(0.2, 0.9)
        omega = rng.random(m) < p
        if not omega_membership(code, i, BitVector.from_dense(omega)):
            continue
        wider = omega | (rng.random(m) < 0.5)
        checks += 1
        if not omega_membership(code, i, BitVector.from_dense(wider)):
            violations += 1
            logger.warning("Dominance violated on %s bit %d", code.label, i)
    if checks < samples:
        logger.info("Dominance on %s: %d of %d checks after %d draws", code.label, checks, samples, draws)
    return checks, violations
