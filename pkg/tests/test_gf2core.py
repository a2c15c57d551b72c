from itertools import product

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from rmexit import gf2core
from rmexit.errors import ArgumentError, SizeError
from rmexit.gf2core import (
    BitMatrix,
    BitVector,
    ColumnSpanOracle,
    hadamard_power,
    hadamard_rows,
    in_column_span,
    inverse,
    matmul,
    rank,
    row_reduce,
)


def naive_rank(dense: np.ndarray) -> int:
    m = (np.array(dense, dtype=np.uint8) & 1).copy()
    r = 0
    for c in range(m.shape[1]):
        rows = [i for i in range(r, m.shape[0]) if m[i, c]]
        if not rows:
            continue
        m[[r, rows[0]]] = m[[rows[0], r]]
        for i in range(m.shape[0]):
            if i != r and m[i, c]:
                m[i] ^= m[r]
        r += 1
    return r


def naive_span(dense: np.ndarray, selected, target) -> bool:
    goal = dense[:, target] & 1
    for coeffs in product((0, 1), repeat=len(selected)):
        combo = np.zeros(dense.shape[0], dtype=np.uint8)
        for a, c in zip(coeffs, selected):
            if a:
                combo ^= dense[:, c]
        if np.array_equal(combo, goal):
            return True
    return False


class TestBitVector:
    def test_padding_stays_zero(self):
        v = BitVector.from_dense([1] * 70)
        assert v.weight() == 70
        assert int(v.data[1]) == (1 << 6) - 1

    def test_weight_matches_naive_count(self):
        rng = np.random.default_rng(1)
        for length in (1, 63, 64, 65, 200):
            dense = rng.integers(0, 2, size=length)
            assert BitVector.from_dense(dense).weight() == int(dense.sum())

    def test_int_and_indices_agree(self):
        v = BitVector.from_indices(10, [0, 3, 9])
        assert v.to_int() == 1 + 8 + 512
        assert v == BitVector.from_int(10, v.to_int())
        assert v.support() == [0, 3, 9]

    def test_domination(self):
        small = BitVector.from_indices(8, [1, 2])
        big = BitVector.from_indices(8, [1, 2, 5])
        assert small.dominated_by(big)
        assert not big.dominated_by(small)

    def test_with_bit_and_xor(self):
        v = BitVector.zeros(5).with_bit(2, 1)
        assert v.get(2) == 1
        assert (v ^ v).weight() == 0
        assert v.with_bit(2, 0) == BitVector.zeros(5)

    def test_out_of_range(self):
        with pytest.raises(ArgumentError):
            BitVector.zeros(4).get(4)
        with pytest.raises(ArgumentError):
            BitVector.from_int(3, 8)


class TestHadamard:
    def test_small_powers(self):
        assert_array_equal(hadamard_power(0).to_dense(), [[1]])
        assert_array_equal(hadamard_power(1).to_dense(), [[1, 0], [1, 1]])
        assert_array_equal(
            hadamard_power(2).to_dense(),
            [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 1, 1]],
        )

    def test_matches_kronecker_product(self):
        base = np.array([[1, 0], [1, 1]], dtype=np.uint8)
        expected = np.array([[1]], dtype=np.uint8)
        for n in range(1, 6):
            expected = np.kron(expected, base)
            assert_array_equal(hadamard_power(n).to_dense(), expected)

    @pytest.mark.parametrize("n", range(11))
    def test_row_weights_are_powers_of_popcount(self, n):
        weights = hadamard_power(n).row_weights()
        expected = [1 << bin(k).count("1") for k in range(1 << n)]
        assert_array_equal(weights, expected)

    def test_lower_triangular_unit_diagonal(self):
        dense = hadamard_power(4).to_dense()
        assert_array_equal(np.triu(dense, 1), 0)
        assert_array_equal(np.diag(dense), 1)

    def test_selected_rows(self):
        full = hadamard_power(3).to_dense()
        assert_array_equal(hadamard_rows(3, [3, 5, 6, 7]).to_dense(), full[[3, 5, 6, 7]])

    @pytest.mark.parametrize("chunk_bits", [1, 16, 100])
    def test_chunked_build_matches_single_block(self, monkeypatch, chunk_bits):
        rows = [k for k in range(1 << 6) if bin(k).count("1") >= 3]
        whole = hadamard_rows(6, rows)
        monkeypatch.setattr(gf2core, "HADAMARD_CHUNK_BITS", chunk_bits)
        chunked = hadamard_rows(6, rows)
        assert chunked == whole
        assert_array_equal(chunked.row_weights(), [1 << bin(k).count("1") for k in rows])

    def test_large_order_rows_stay_packed(self):
        rows = [k for k in range(1 << 14) if bin(k).count("1") >= 12]
        matrix = hadamard_rows(14, rows)
        assert matrix.data.nbytes == len(rows) * (1 << 14) // 8
        assert_array_equal(matrix.row_weights(), [1 << bin(k).count("1") for k in rows])

    def test_size_cap(self):
        with pytest.raises(SizeError):
            hadamard_power(5, max_n=4)


class TestRowReduction:
    def test_identity(self):
        reduced, pivots, r = row_reduce(BitMatrix.identity(4))
        assert r == 4
        assert pivots == [0, 1, 2, 3]
        assert reduced == BitMatrix.identity(4)

    def test_zero_matrix(self):
        _, pivots, r = row_reduce(BitMatrix.zeros(3, 5))
        assert r == 0
        assert pivots == []

    def test_rm31_generator_has_rank_four(self, rm31):
        assert row_reduce(rm31.generator).rank == 4

    def test_idempotent_and_row_space_preserving(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = BitMatrix.from_dense(rng.integers(0, 2, size=(9, 70)))
            reduced = row_reduce(m).reduced
            assert row_reduce(reduced).reduced == reduced
            assert rank(m.vstack(reduced)) == rank(m) == rank(reduced)

    def test_reduced_echelon_form(self):
        rng = np.random.default_rng(3)
        m = BitMatrix.from_dense(rng.integers(0, 2, size=(6, 12)))
        reduced, pivots, r = row_reduce(m)
        dense = reduced.to_dense()
        for row, c in enumerate(pivots):
            assert dense[row, c] == 1
            assert dense[:, c].sum() == 1
        assert_array_equal(dense[r:], 0)

    def test_rank_of_transpose(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            rows, cols = rng.integers(1, 65, size=2)
            dense = rng.integers(0, 2, size=(rows, cols))
            m = BitMatrix.from_dense(dense)
            assert rank(m) == rank(m.transpose()) == naive_rank(dense)


class TestColumnSpan:
    def test_identity_columns_are_independent(self):
        eye = BitMatrix.identity(5)
        assert not in_column_span(eye, [1, 2, 3, 4], 0)

    def test_empty_span_contains_zero_column(self):
        m = BitMatrix.from_dense([[1, 0], [1, 0]])
        assert in_column_span(m, [], 1)

    def test_rm31_single_erasure_is_recoverable(self, rm31):
        assert in_column_span(rm31.generator, range(1, 8), 0)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            dense = rng.integers(0, 2, size=(6, 14)).astype(np.uint8)
            m = BitMatrix.from_dense(dense)
            target = int(rng.integers(14))
            others = [c for c in range(14) if c != target]
            size = int(rng.integers(0, 13))
            selected = sorted(rng.choice(others, size=size, replace=False).tolist())
            assert in_column_span(m, selected, target) == naive_span(dense, selected, target)

    def test_target_in_selection_is_rejected(self):
        with pytest.raises(ArgumentError):
            in_column_span(BitMatrix.identity(3), [0, 1], 1)

    def test_index_out_of_range(self):
        with pytest.raises(ArgumentError):
            in_column_span(BitMatrix.identity(3), [0, 7], 1)

    def test_oracle_extend_reports_rank_growth(self):
        m = BitMatrix.from_dense([[1, 1, 0], [0, 0, 1]])
        oracle = ColumnSpanOracle(m)
        assert oracle.extend(0)
        assert not oracle.extend(1)
        assert not oracle.full_rank
        assert oracle.extend(2)
        assert oracle.full_rank
        assert oracle.rank == 2


class TestInverse:
    def test_inverse_of_random_invertible(self):
        rng = np.random.default_rng(2)
        found = 0
        while found < 10:
            m = BitMatrix.from_dense(rng.integers(0, 2, size=(5, 5)))
            if rank(m) < 5:
                continue
            found += 1
            assert matmul(m, inverse(m)) == BitMatrix.identity(5)

    def test_singular_matrix(self):
        with pytest.raises(ArgumentError):
            inverse(BitMatrix.from_dense([[1, 1], [1, 1]]))
