"""Bit-packed GF(2) vectors and matrices.

Bits are packed little-endian into 64-bit words: bit ``j`` of a row lives in word
``j // 64`` at position ``j % 64``. Pad bits past the last column are kept at zero
after every mutation so word-level popcounts and comparisons stay exact.
"""

import logging
from typing import Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ArgumentError, SizeError
from .settings import get_settings

logger = logging.getLogger(__name__)

WORD_BITS = 64
# dense bits materialized at once while building Hadamard rows
HADAMARD_CHUNK_BITS = 1 << 22
_ONE = np.uint64(1)


def _word_count(bits: int) -> int:
    return (bits + WORD_BITS - 1) // WORD_BITS


def _pad_mask(bits: int) -> Optional[np.uint64]:
    tail = bits % WORD_BITS
    if tail == 0:
        return None
    return np.uint64((1 << tail) - 1)


def _pack_rows(dense: np.ndarray) -> np.ndarray:
    dense = np.asarray(dense, dtype=np.uint8) & 1
    rows, cols = dense.shape
    words = _word_count(cols)
    packed = np.packbits(dense, axis=1, bitorder="little")
    buf = np.zeros((rows, words * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    return buf.view("<u8").astype(np.uint64)


def _unpack_rows(data: np.ndarray, cols: int) -> np.ndarray:
    rows, words = data.shape
    raw = data.astype("<u8").view(np.uint8).reshape(rows, words * 8)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :cols]


class BitVector:
    """A fixed-length bit-packed GF(2) vector."""

    __slots__ = ("length", "data")

    def __init__(self, length: int, data: Optional[np.ndarray] = None) -> None:
        if length < 0:
            raise ArgumentError(f"Vector length must be non-negative, got {length}")
        words = _word_count(length)
        if data is None:
            data = np.zeros(words, dtype=np.uint64)
        data = np.array(data, dtype=np.uint64).reshape(-1)
        if data.shape != (words,):
            raise ArgumentError(f"Expected {words} words for length {length}, got {data.shape}")
        self.length = length
        self.data = data
        self._clear_padding()

    def _clear_padding(self) -> None:
        mask = _pad_mask(self.length)
        if mask is not None:
            self.data[-1] &= mask

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length)

    @classmethod
    def from_dense(cls, bits: Sequence[int]) -> "BitVector":
        dense = np.asarray(bits, dtype=np.uint8).reshape(1, -1)
        return cls(dense.shape[1], _pack_rows(dense)[0])

    @classmethod
    def from_indices(cls, length: int, indices: Iterable[int]) -> "BitVector":
        dense = np.zeros(length, dtype=np.uint8)
        for k in indices:
            if not 0 <= k < length:
                raise ArgumentError(f"Index {k} out of range for length {length}")
            dense[k] = 1
        return cls.from_dense(dense)

    @classmethod
    def from_int(cls, length: int, value: int) -> "BitVector":
        if value < 0 or value >> length:
            raise ArgumentError(f"Value {value} does not fit in {length} bits")
        words = [(value >> (WORD_BITS * w)) & ((1 << WORD_BITS) - 1) for w in range(_word_count(length))]
        return cls(length, np.array(words, dtype=np.uint64))

    def to_dense(self) -> np.ndarray:
        return _unpack_rows(self.data.reshape(1, -1), self.length)[0]

    def to_int(self) -> int:
        value = 0
        for w, word in enumerate(self.data.tolist()):
            value |= int(word) << (WORD_BITS * w)
        return value

    def get(self, k: int) -> int:
        if not 0 <= k < self.length:
            raise ArgumentError(f"Index {k} out of range for length {self.length}")
        return int((self.data[k // WORD_BITS] >> np.uint64(k % WORD_BITS)) & _ONE)

    def with_bit(self, k: int, value: int) -> "BitVector":
        if not 0 <= k < self.length:
            raise ArgumentError(f"Index {k} out of range for length {self.length}")
        data = self.data.copy()
        bit = _ONE << np.uint64(k % WORD_BITS)
        if value & 1:
            data[k // WORD_BITS] |= bit
        else:
            data[k // WORD_BITS] &= ~bit
        return BitVector(self.length, data)

    def weight(self) -> int:
        return int(np.unpackbits(self.data.astype("<u8").view(np.uint8)).sum())

    def support(self) -> List[int]:
        return np.flatnonzero(self.to_dense()).tolist()

    def dominated_by(self, other: "BitVector") -> bool:
        """True when ``self ≺ other``: every 1 of self is also a 1 of other."""
        self._check_length(other)
        return not np.any(self.data & ~other.data)

    def _check_length(self, other: "BitVector") -> None:
        if other.length != self.length:
            raise ArgumentError(f"Length mismatch: {self.length} vs {other.length}")

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check_length(other)
        return BitVector(self.length, self.data ^ other.data)

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check_length(other)
        return BitVector(self.length, self.data & other.data)

    def __or__(self, other: "BitVector") -> "BitVector":
        self._check_length(other)
        return BitVector(self.length, self.data | other.data)

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.length, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector({''.join(map(str, self.to_dense().tolist()))})"


class BitMatrix:
    """A row-major bit-packed GF(2) matrix."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Optional[np.ndarray] = None) -> None:
        if rows < 0 or cols < 0:
            raise ArgumentError(f"Matrix dimensions must be non-negative, got {rows}x{cols}")
        words = _word_count(cols)
        if data is None:
            data = np.zeros((rows, words), dtype=np.uint64)
        data = np.array(data, dtype=np.uint64).reshape(rows, words)
        self.rows = rows
        self.cols = cols
        self.data = data
        self._clear_padding()

    def _clear_padding(self) -> None:
        mask = _pad_mask(self.cols)
        if mask is not None and self.rows:
            self.data[:, -1] &= mask

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, size: int) -> "BitMatrix":
        return cls.from_dense(np.eye(size, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]]) -> "BitMatrix":
        arr = np.asarray(dense, dtype=np.uint8)
        if arr.ndim != 2:
            raise ArgumentError(f"Expected a 2-D array, got shape {arr.shape}")
        return cls(arr.shape[0], arr.shape[1], _pack_rows(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector]) -> "BitMatrix":
        if not rows:
            raise ArgumentError("Cannot infer column count from zero rows")
        cols = rows[0].length
        for row in rows:
            if row.length != cols:
                raise ArgumentError("All rows must have the same length")
        return cls(len(rows), cols, np.stack([row.data for row in rows]))

    def to_dense(self) -> np.ndarray:
        return _unpack_rows(self.data, self.cols)

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.data.copy())

    def _check_cell(self, r: int, c: int) -> None:
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise ArgumentError(f"Cell ({r}, {c}) out of range for {self.rows}x{self.cols}")

    def get(self, r: int, c: int) -> int:
        self._check_cell(r, c)
        return int((self.data[r, c // WORD_BITS] >> np.uint64(c % WORD_BITS)) & _ONE)

    def set(self, r: int, c: int, value: int) -> None:
        self._check_cell(r, c)
        bit = _ONE << np.uint64(c % WORD_BITS)
        if value & 1:
            self.data[r, c // WORD_BITS] |= bit
        else:
            self.data[r, c // WORD_BITS] &= ~bit

    def row(self, r: int) -> BitVector:
        if not 0 <= r < self.rows:
            raise ArgumentError(f"Row {r} out of range for {self.rows} rows")
        return BitVector(self.cols, self.data[r].copy())

    def column(self, c: int) -> BitVector:
        if not 0 <= c < self.cols:
            raise ArgumentError(f"Column {c} out of range for {self.cols} columns")
        return BitVector.from_dense(column_bits(self.data, c))

    def row_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=1)

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def select_columns(self, cols: Sequence[int]) -> "BitMatrix":
        cols = list(cols)
        for c in cols:
            if not 0 <= c < self.cols:
                raise ArgumentError(f"Column {c} out of range for {self.cols} columns")
        return BitMatrix.from_dense(self.to_dense()[:, cols].reshape(self.rows, len(cols)))

    def permute_columns(self, image: Sequence[int]) -> "BitMatrix":
        """New matrix whose column ``k`` is this matrix's column ``image[k]``."""
        if len(image) != self.cols:
            raise ArgumentError(f"Permutation of size {len(image)} does not fit {self.cols} columns")
        return self.select_columns(image)

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if other.cols != self.cols:
            raise ArgumentError(f"Column mismatch: {self.cols} vs {other.cols}")
        return BitMatrix(self.rows + other.rows, self.cols, np.vstack([self.data, other.data]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def column_bits(data: np.ndarray, c: int, start: int = 0) -> np.ndarray:
    """0/1 entries of column ``c`` for rows ``start:`` of a packed row array."""
    return (data[start:, c // WORD_BITS] >> np.uint64(c % WORD_BITS)) & _ONE


def _pivot_on(data: np.ndarray, c: int, rank: int, full: bool) -> bool:
    """Eliminate on column ``c`` using row ``rank`` as pivot; False when no pivot exists."""
    rows = data.shape[0]
    if rank >= rows:
        return False
    below = np.flatnonzero(column_bits(data, c, rank))
    if below.size == 0:
        return False
    p = rank + int(below[0])
    if p != rank:
        data[[rank, p]] = data[[p, rank]]
    start = 0 if full else rank + 1
    targets = start + np.flatnonzero(column_bits(data, c, start))
    targets = targets[targets != rank]
    if targets.size:
        data[targets] ^= data[rank]
    return True


def _eliminate(data: np.ndarray, columns: Iterable[int], full: bool) -> List[int]:
    pivots: List[int] = []
    for c in columns:
        if len(pivots) == data.shape[0]:
            break
        if _pivot_on(data, c, len(pivots), full):
            pivots.append(c)
    return pivots


class RowReduction(NamedTuple):
    reduced: BitMatrix
    pivot_cols: List[int]
    rank: int


def row_reduce(matrix: BitMatrix) -> RowReduction:
    data = matrix.data.copy()
    pivots = _eliminate(data, range(matrix.cols), full=True)
    return RowReduction(BitMatrix(matrix.rows, matrix.cols, data), pivots, len(pivots))


def rank(matrix: BitMatrix) -> int:
    data = matrix.data.copy()
    return len(_eliminate(data, range(matrix.cols), full=False))


def matmul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.cols != b.rows:
        raise ArgumentError(f"Cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    product = a.to_dense().astype(np.int64) @ b.to_dense().astype(np.int64)
    return BitMatrix.from_dense(product % 2)


def inverse(matrix: BitMatrix) -> BitMatrix:
    if matrix.rows != matrix.cols:
        raise ArgumentError(f"Only square matrices are invertible, got {matrix.rows}x{matrix.cols}")
    size = matrix.rows
    augmented = np.hstack([matrix.to_dense(), np.eye(size, dtype=np.uint8)])
    reduced, pivots, _ = row_reduce(BitMatrix.from_dense(augmented))
    if pivots[:size] != list(range(size)) or len(pivots) < size:
        raise ArgumentError("Matrix is singular over GF(2)")
    return BitMatrix.from_dense(reduced.to_dense()[:, size:])


class ColumnSpanOracle:
    """Answers "is column t in the span of the selected columns" for many targets.

    Row operations are applied to a private copy of the whole matrix while pivoting
    only on selected columns. Afterwards every selected column is supported on the
    first ``rank`` rows, so a target is in their span iff its transformed column is
    zero on the remaining rows. Columns can be added one at a time with ``extend``.
    """

    def __init__(self, matrix: BitMatrix, selected: Iterable[int] = ()) -> None:
        self.matrix = matrix
        self._data = matrix.data.copy()
        self._selected = set()
        self.pivots: List[int] = []
        for c in selected:
            self.extend(c)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def full_rank(self) -> bool:
        return self.rank == self.matrix.rows

    def _check_column(self, c: int) -> None:
        if not 0 <= c < self.matrix.cols:
            raise ArgumentError(f"Column {c} out of range for {self.matrix.cols} columns")

    def extend(self, c: int) -> bool:
        """Add column ``c`` to the selection; True when it raised the rank."""
        self._check_column(c)
        if c in self._selected:
            return False
        self._selected.add(c)
        if _pivot_on(self._data, c, self.rank, full=False):
            self.pivots.append(c)
            return True
        return False

    def contains(self, target: int) -> bool:
        self._check_column(target)
        if target in self._selected:
            raise ArgumentError(f"Target column {target} is part of the selection")
        return not column_bits(self._data, target, self.rank).any()


def in_column_span(matrix: BitMatrix, selected_cols: Iterable[int], target_col: int) -> bool:
    selected = list(selected_cols)
    if target_col in selected:
        raise ArgumentError(f"Target column {target_col} is part of the selection")
    return ColumnSpanOracle(matrix, selected).contains(target_col)


def hadamard_rows(n: int, rows: Sequence[int]) -> BitMatrix:
    """Selected rows of the n-fold Kronecker power of (1 0; 1 1).

    Entry (k, j) is 1 iff the binary expansion of j is contained in that of k, so row
    k has weight 2**popcount(k).
    """
    size = 1 << n
    ks = np.asarray(list(rows), dtype=np.int64)
    if ks.size and (ks.min() < 0 or ks.max() >= size):
        raise ArgumentError(f"Hadamard row index out of range for n={n}")
    js = np.arange(size, dtype=np.int64)
    matrix = BitMatrix.zeros(ks.size, size)
    step = max(1, HADAMARD_CHUNK_BITS // size)
    for start in range(0, ks.size, step):
        block = ks[start : start + step]
        dense = (js[None, :] & ~block[:, None]) == 0
        matrix.data[start : start + block.size] = _pack_rows(dense)
    return matrix


def hadamard_power(n: int, max_n: Optional[int] = None) -> BitMatrix:
    if n < 0:
        raise ArgumentError(f"n must be non-negative, got {n}")
    cap = get_settings().max_hadamard_n if max_n is None else max_n
    if n > cap:
        raise SizeError(f"Hadamard power n={n} exceeds the configured maximum {cap}")
    logger.debug("Building Hadamard power n=%s", n)
    return hadamard_rows(n, range(1 << n))
