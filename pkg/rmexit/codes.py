"""Reed–Muller and general binary linear codes.

Codeword position k (0-based) is the point of GF(2)^n whose coordinates are the
bits of k, least-significant bit first. Generators are built from rows of the
Kronecker power of (1 0; 1 1), in ascending row order.
"""

import logging
import re
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Iterator, List, Optional, Sequence

import numpy as np

from .errors import ArgumentError, CodeSpecError, SizeError
from .gf2core import BitMatrix, BitVector, hadamard_rows, rank
from .schemas import CodeSequence, RmParams, SequenceMember
from .settings import get_settings

logger = logging.getLogger(__name__)

_RM_SPEC = re.compile(r"^rm:(\d+),(\d+)$")
_HADAMARD_SPEC = re.compile(r"^hadamard:(\d+):(\d+(?:,\d+)*)$")


class LinearCode:
    """A binary linear code given by a full-row-rank generator matrix."""

    def __init__(
        self,
        generator: BitMatrix,
        label: str,
        two_transitive: bool = False,
        params: Optional[RmParams] = None,
    ) -> None:
        if rank(generator) != generator.rows:
            raise CodeSpecError(f"Generator for {label} is not full row rank")
        self.generator = generator
        self.label = label
        self.two_transitive = two_transitive
        self.params = params
        self._row_ints: Optional[List[int]] = None

    @property
    def N(self) -> int:
        return self.generator.cols

    @property
    def K(self) -> int:
        return self.generator.rows

    @property
    def rate(self) -> Fraction:
        return Fraction(self.K, self.N)

    @property
    def row_ints(self) -> List[int]:
        """Generator rows as Python ints, bit j = position j."""
        if self._row_ints is None:
            self._row_ints = [self.generator.row(k).to_int() for k in range(self.K)]
        return self._row_ints

    def encode(self, message: Sequence[int]) -> BitVector:
        bits = np.asarray(message, dtype=np.int64)
        if bits.shape != (self.K,):
            raise ArgumentError(f"Message must have {self.K} bits, got shape {bits.shape}")
        word = (bits @ self.generator.to_dense().astype(np.int64)) % 2
        return BitVector.from_dense(word)

    def contains(self, word: BitVector) -> bool:
        if word.length != self.N:
            raise ArgumentError(f"Word length {word.length} does not match N={self.N}")
        return rank(self.generator.vstack(BitMatrix.from_rows([word]))) == self.K

    def __repr__(self) -> str:
        return f"LinearCode({self.label}, N={self.N}, K={self.K})"


def rate(p: RmParams) -> Fraction:
    return Fraction(p.K, p.N)


@lru_cache(maxsize=64)
def rm_generator(p: RmParams) -> LinearCode:
    cap = get_settings().max_hadamard_n
    if p.n > cap:
        raise SizeError(f"RM({p.n},{p.r}) exceeds the configured maximum n={cap}")
    rows = [k for k in range(p.N) if bin(k).count("1") >= p.n - p.r]
    logger.debug("Building %s from %d Hadamard rows", p.label, len(rows))
    return LinearCode(hadamard_rows(p.n, rows), p.label, two_transitive=True, params=p)


def hadamard_subcode(n: int, rows: Sequence[int]) -> LinearCode:
    """Code generated by an arbitrary subset of Hadamard rows."""
    cap = get_settings().max_hadamard_n
    if n > cap:
        raise SizeError(f"Hadamard subcode n={n} exceeds the configured maximum {cap}")
    chosen = sorted(set(rows))
    if not chosen:
        raise CodeSpecError("A Hadamard subcode needs at least one row")
    for k in chosen:
        if not 0 <= k < (1 << n):
            raise CodeSpecError(f"Hadamard row {k} out of range for n={n}")
    label = f"H{n}[{','.join(map(str, chosen))}]"
    return LinearCode(hadamard_rows(n, chosen), label)


def monomial_generator(n: int, r: int) -> BitMatrix:
    """Evaluations of all monomials of degree ≤ r on GF(2)^n."""
    points = np.arange(1 << n, dtype=np.int64)
    rows = []
    for degree in range(r + 1):
        for subset in combinations(range(n), degree):
            mask = sum(1 << l for l in subset)
            rows.append((points & mask) == mask)
    return BitMatrix.from_dense(np.array(rows, dtype=np.uint8))


def _check_enumerable(code: LinearCode) -> None:
    cap = get_settings().enum_max_k
    if code.K > cap:
        raise SizeError(f"{code.label} has K={code.K} > {cap}; codeword enumeration is infeasible")


def enumerate_codewords(code: LinearCode) -> Iterator[BitVector]:
    """All 2^K codewords in Gray-code order, starting from the zero word."""
    _check_enumerable(code)
    return _gray_walk(code)


def _gray_walk(code: LinearCode) -> Iterator[BitVector]:
    rows = code.row_ints
    word = 0
    yield BitVector.from_int(code.N, word)
    for t in range(1, 1 << code.K):
        word ^= rows[(t & -t).bit_length() - 1]
        yield BitVector.from_int(code.N, word)


def codeword_masks(code: LinearCode) -> np.ndarray:
    """All codewords as int64 bit masks (requires N ≤ 62)."""
    _check_enumerable(code)
    if code.N > 62:
        raise SizeError(f"{code.label} has N={code.N}; bit-mask enumeration needs N ≤ 62")
    masks = np.zeros(1, dtype=np.int64)
    for row in code.row_ints:
        masks = np.concatenate([masks, masks ^ np.int64(row)])
    return masks


def min_distance_bruteforce(code: LinearCode) -> int:
    _check_enumerable(code)
    if code.K == 0:
        raise ArgumentError(f"{code.label} has no nonzero codewords")
    rows = code.row_ints
    word = 0
    best = code.N
    for t in range(1, 1 << code.K):
        word ^= rows[(t & -t).bit_length() - 1]
        best = min(best, bin(word).count("1"))
    return best


def sequence_for_rate(target: Fraction, n_list: Sequence[int]) -> CodeSequence:
    target = Fraction(target)
    if not 0 < target < 1:
        raise ArgumentError(f"Target rate must lie in (0, 1), got {target}")
    members = []
    for n in n_list:
        r = next(r for r in range(n + 1) if rate(RmParams(n=n, r=r)) >= target)
        params = RmParams(n=n, r=r)
        r_n = rate(params)
        members.append(SequenceMember(params=params, rate=r_n, gap=max(r_n - target, Fraction(0))))
    return CodeSequence(target_rate=target, members=members)


def load_generator_file(path: Path) -> LinearCode:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CodeSpecError(f"Cannot read generator file {path}: {exc}") from exc

    rows: List[List[int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"}:
            raise CodeSpecError(f"{path}:{lineno}: rows may only contain 0 and 1")
        rows.append([int(ch) for ch in line])
    if not rows:
        raise CodeSpecError(f"{path} contains no generator rows")
    if len({len(row) for row in rows}) != 1:
        raise CodeSpecError(f"{path}: rows have different lengths")
    return LinearCode(BitMatrix.from_dense(rows), path.stem)


def parse_code_spec(spec: str) -> LinearCode:
    """Build a code from ``rm:n,r``, ``hadamard:n:k1,k2,...`` or a generator file path."""
    spec = spec.strip()
    match = _RM_SPEC.match(spec)
    if match:
        n, r = int(match.group(1)), int(match.group(2))
        if r > n:
            raise CodeSpecError(f"Bad code spec {spec!r}: order r={r} exceeds n={n}")
        return rm_generator(RmParams(n=n, r=r))

    match = _HADAMARD_SPEC.match(spec)
    if match:
        rows = [int(k) for k in match.group(2).split(",")]
        return hadamard_subcode(int(match.group(1)), rows)

    path = Path(spec)
    if path.is_file():
        return load_generator_file(path)
    raise CodeSpecError(f"Unrecognised code spec {spec!r}; use rm:n,r, hadamard:n:rows or a file path")


def weight_distribution(code: LinearCode) -> List[int]:
    """Number of codewords of each weight 0..N."""
    counts = [0] * (code.N + 1)
    for word in enumerate_codewords(code):
        counts[word.weight()] += 1
    return counts
