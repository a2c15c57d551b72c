"""Affine permutations of GF(2)^n and the symmetries they induce on Ω_i."""

import logging
from collections import deque
from typing import Iterable, List, Optional, Sequence, Set

import numpy as np

from .codes import LinearCode, rm_generator
from .errors import ArgumentError, SizeError, SymmetryError
from .exit_analysis import exit_exact, omega_table
from .gf2core import BitMatrix, BitVector, inverse, matmul, rank
from .schemas import CheckResult, RmParams, VerifyReport

logger = logging.getLogger(__name__)


class Permutation:
    """A bijection of {0, ..., size−1}; ``image[k]`` is where k goes."""

    __slots__ = ("image",)

    def __init__(self, image: Sequence[int]) -> None:
        image = tuple(int(k) for k in image)
        if sorted(image) != list(range(len(image))):
            raise SymmetryError(f"Not a permutation of {len(image)} points: {image}")
        self.image = image

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(range(size))

    @property
    def size(self) -> int:
        return len(self.image)

    def __call__(self, k: int) -> int:
        return self.image[k]

    def compose(self, other: "Permutation") -> "Permutation":
        """self ∘ other: first apply ``other``, then ``self``."""
        if other.size != self.size:
            raise ArgumentError(f"Size mismatch: {self.size} vs {other.size}")
        return Permutation([self.image[k] for k in other.image])

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for k, v in enumerate(self.image):
            inv[v] = k
        return Permutation(inv)

    def apply_to_word(self, word: BitVector) -> BitVector:
        """The word y with y_k = x_{π(k)}."""
        if word.length != self.size:
            raise ArgumentError(f"Word length {word.length} does not match size {self.size}")
        return BitVector.from_dense(word.to_dense()[list(self.image)])

    def apply_to_masks(self, masks: np.ndarray) -> np.ndarray:
        """Bit-mask form of ``apply_to_word``, vectorized over many words."""
        masks = np.asarray(masks, dtype=np.int64)
        out = np.zeros_like(masks)
        for k, v in enumerate(self.image):
            out |= ((masks >> v) & 1) << k
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.image == other.image

    def __hash__(self) -> int:
        return hash(self.image)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"Permutation({list(self.image)})"


class AffinePermutation:
    """The map x ↦ Ax + b on GF(2)^n, acting on codeword positions."""

    __slots__ = ("matrix", "offset", "_columns", "_offset_int")

    def __init__(self, matrix: BitMatrix, offset: BitVector) -> None:
        n = matrix.rows
        if matrix.cols != n:
            raise SymmetryError(f"Affine matrix must be square, got {matrix.rows}x{matrix.cols}")
        if offset.length != n:
            raise SymmetryError(f"Offset length {offset.length} does not match n={n}")
        if rank(matrix) != n:
            raise SymmetryError("Affine matrix is singular over GF(2)")
        self.matrix = matrix
        self.offset = offset
        self._columns = [matrix.column(l).to_int() for l in range(n)]
        self._offset_int = offset.to_int()

    @classmethod
    def identity(cls, n: int) -> "AffinePermutation":
        return cls(BitMatrix.identity(n), BitVector.zeros(n))

    @classmethod
    def from_dense(cls, matrix: Sequence[Sequence[int]], offset: Sequence[int]) -> "AffinePermutation":
        return cls(BitMatrix.from_dense(matrix), BitVector.from_dense(offset))

    @property
    def n(self) -> int:
        return self.matrix.rows

    def linear_part(self, k: int) -> int:
        y = 0
        for l, column in enumerate(self._columns):
            if (k >> l) & 1:
                y ^= column
        return y

    def apply_point(self, k: int) -> int:
        return self.linear_part(k) ^ self._offset_int

    def to_coordinate_permutation(self) -> Permutation:
        ks = np.arange(1 << self.n, dtype=np.int64)
        image = np.full(ks.shape, self._offset_int, dtype=np.int64)
        for l, column in enumerate(self._columns):
            image ^= np.where((ks >> l) & 1, column, 0)
        return Permutation(image.tolist())

    def compose(self, other: "AffinePermutation") -> "AffinePermutation":
        """self ∘ other: x ↦ A(A'x + b') + b."""
        matrix = matmul(self.matrix, other.matrix)
        offset = BitVector.from_int(self.n, self.apply_point(other._offset_int))
        return AffinePermutation(matrix, offset)

    def inverse(self) -> "AffinePermutation":
        inv = inverse(self.matrix)
        partial = AffinePermutation(inv, BitVector.zeros(self.n))
        offset = BitVector.from_int(self.n, partial.apply_point(self._offset_int))
        return AffinePermutation(inv, offset)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AffinePermutation):
            return NotImplemented
        return self.matrix == other.matrix and self.offset == other.offset

    def __hash__(self) -> int:
        return hash((self.matrix, self.offset))

    def __repr__(self) -> str:
        return f"AffinePermutation(n={self.n}, A={self.matrix.to_dense().tolist()}, b={self.offset})"


def to_coordinate_permutation(ap: AffinePermutation) -> Permutation:
    return ap.to_coordinate_permutation()


def _extend_to_basis(first: int, n: int) -> List[int]:
    """``first`` followed by standard basis vectors that keep the set independent."""
    basis = [first]
    for l in range(n):
        if len(basis) == n:
            break
        candidate = basis + [1 << l]
        dense = [[(v >> m) & 1 for m in range(n)] for v in candidate]
        if rank(BitMatrix.from_dense(dense)) == len(candidate):
            basis = candidate
    return basis


def _columns_matrix(vectors: Sequence[int], n: int) -> BitMatrix:
    return BitMatrix.from_dense([[(v >> m) & 1 for v in vectors] for m in range(n)])


def two_transitive_witness(n: int, a: int, b: int, c: int, d: int) -> AffinePermutation:
    """An affine map sending position a to c and b to d."""
    if n < 1:
        raise ArgumentError("Two-transitivity needs n ≥ 1")
    size = 1 << n
    for k in (a, b, c, d):
        if not 0 <= k < size:
            raise ArgumentError(f"Position {k} out of range for N={size}")
    if a == b or c == d:
        raise ArgumentError(f"Need a != b and c != d, got ({a}, {b}) -> ({c}, {d})")

    source = _columns_matrix(_extend_to_basis(a ^ b, n), n)
    target = _columns_matrix(_extend_to_basis(c ^ d, n), n)
    linear = AffinePermutation(matmul(target, inverse(source)), BitVector.zeros(n))
    offset = BitVector.from_int(n, c ^ linear.apply_point(a))
    return AffinePermutation(linear.matrix, offset)


def random_affine(n: int, rng: np.random.Generator, fixing: Optional[int] = None) -> AffinePermutation:
    """A uniformly random invertible affine map, optionally fixing one position."""
    while True:
        dense = rng.integers(0, 2, size=(n, n))
        matrix = BitMatrix.from_dense(dense)
        if rank(matrix) == n:
            break
    linear = AffinePermutation(matrix, BitVector.zeros(n))
    if fixing is None:
        offset = BitVector.from_dense(rng.integers(0, 2, size=n))
    else:
        offset = BitVector.from_int(n, fixing ^ linear.apply_point(fixing))
    return AffinePermutation(matrix, offset)


def verify_code_closure(code: LinearCode, perm: Permutation) -> bool:
    """True iff permuting codeword positions by ``perm`` maps the code onto itself."""
    if perm.size != code.N:
        raise ArgumentError(f"Permutation size {perm.size} does not match N={code.N}")
    permuted = code.generator.permute_columns(perm.image)
    return rank(code.generator.vstack(permuted)) == code.K


def induced_reduced_permutation(perm: Permutation, i: int, j: int) -> Permutation:
    """π̂(k) = S_j(π(S_i(k))): π with position i spliced out of the domain and j of the range."""
    if not (0 <= i < perm.size and 0 <= j < perm.size):
        raise ArgumentError(f"Positions ({i}, {j}) out of range for size {perm.size}")
    if perm(i) != j:
        raise ArgumentError(f"Permutation sends {i} to {perm(i)}, not {j}")
    image = []
    for k in range(perm.size - 1):
        m = perm(k if k < i else k + 1)
        image.append(m if m < j else m - 1)
    return Permutation(image)


def apply_to_pattern(perm_hat: Permutation, omega: BitVector) -> BitVector:
    return perm_hat.apply_to_word(omega)


def check_omega_symmetry(code: LinearCode, i: int, automorphisms: Iterable[Permutation]) -> List[bool]:
    """For each automorphism fixing i: does π̂ map Ω_i exactly onto itself."""
    table = omega_table(code, i)
    masks = np.arange(table.size, dtype=np.int64)
    results = []
    for perm in automorphisms:
        perm_hat = induced_reduced_permutation(perm, i, i)
        results.append(bool(np.array_equal(table[perm_hat.apply_to_masks(masks)], table)))
    return results


def stabilizer_generators(n: int, i: int, rng: Optional[np.random.Generator] = None, extra: int = 0) -> List[Permutation]:
    """Reduced permutations π̂ from affine maps fixing position i."""
    size = 1 << n
    anchor = 0 if i != 0 else 1
    generators = []
    for target in range(size):
        if target == i:
            continue
        witness = two_transitive_witness(n, i, anchor, i, target)
        generators.append(induced_reduced_permutation(witness.to_coordinate_permutation(), i, i))
    if rng is not None:
        for _ in range(extra):
            perm = random_affine(n, rng, fixing=i).to_coordinate_permutation()
            generators.append(induced_reduced_permutation(perm, i, i))
    return generators


def stabilizer_orbit(generators: Sequence[Permutation], start: int = 0) -> Set[int]:
    """Orbit of ``start`` under the group generated by ``generators``."""
    seen = {start}
    queue = deque([start])
    while queue:
        k = queue.popleft()
        for g in generators:
            m = g(k)
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return seen


def verify_exit_equality(code: LinearCode) -> bool:
    first = exit_exact(code, 0).weights
    return all(exit_exact(code, i).weights == first for i in range(1, code.N))


def verify_two_transitivity(params: RmParams, quads: int, seed: int) -> VerifyReport:
    """Random (a,b)->(c,d) witnesses, checked on positions and on RM(n, r) for every r."""
    code = rm_generator(params)
    report = VerifyReport(label=code.label)
    if params.n < 1:
        report.checks.append(CheckResult(name="two_transitive_witnesses", passed=True, detail="N=1: no pairs"))
        return report

    rng = np.random.default_rng(seed)
    family = [rm_generator(RmParams(n=params.n, r=r)) for r in range(params.n + 1)]
    misses = 0
    for _ in range(quads):
        a, b = rng.choice(params.N, size=2, replace=False).tolist()
        c, d = rng.choice(params.N, size=2, replace=False).tolist()
        perm = two_transitive_witness(params.n, a, b, c, d).to_coordinate_permutation()
        if perm(a) != c or perm(b) != d or not all(verify_code_closure(member, perm) for member in family):
            misses += 1
            logger.warning("Witness failed for (%d,%d)->(%d,%d) on %s", a, b, c, d, code.label)
    report.checks.append(
        CheckResult(
            name="two_transitive_witnesses",
            passed=misses == 0,
            expected="0 failures",
            actual=f"{misses} failures in {quads} quadruples",
        )
    )
    return report


def verify_symmetry(params: RmParams, quads: int, seed: int, automorphisms: int = 50) -> VerifyReport:
    """Witness checks plus, for small N, Ω_i invariance and stabilizer transitivity."""
    report = verify_two_transitivity(params, quads, seed)
    code = rm_generator(params)
    if params.n < 1:
        return report
    rng = np.random.default_rng(seed + 1)
    i = int(rng.integers(params.N))
    autos = [random_affine(params.n, rng, fixing=i).to_coordinate_permutation() for _ in range(automorphisms)]
    try:
        results = check_omega_symmetry(code, i, autos)
    except SizeError as exc:
        logger.info("Skipping Ω symmetry for %s: %s", code.label, exc)
    else:
        report.checks.append(
            CheckResult(
                name="omega_symmetric",
                passed=all(results),
                expected=f"{automorphisms} invariant maps",
                actual=f"{sum(results)} invariant maps",
                detail=f"focus bit {i}",
            )
        )

    orbit = stabilizer_orbit(stabilizer_generators(params.n, i))
    report.checks.append(
        CheckResult(
            name="stabilizer_transitive",
            passed=len(orbit) == params.N - 1,
            expected=str(params.N - 1),
            actual=str(len(orbit)),
        )
    )
    return report
