from fractions import Fraction

import pytest

from rmexit.codes import (
    enumerate_codewords,
    hadamard_subcode,
    load_generator_file,
    min_distance_bruteforce,
    monomial_generator,
    parse_code_spec,
    rate,
    rm_generator,
    sequence_for_rate,
    weight_distribution,
)
from rmexit.errors import CodeSpecError, SizeError
from rmexit.gf2core import BitVector, rank
from rmexit.schemas import RmParams
from rmexit.settings import Settings

ENUMERABLE_RM = [(n, r) for n in range(6) for r in range(n + 1) if RmParams(n=n, r=r).K <= Settings().enum_max_k]


class TestRmGenerator:
    @pytest.mark.parametrize(
        "n, r, N, K, rate",
        [
            (3, 1, 8, 4, Fraction(1, 2)),
            (1, 1, 2, 2, Fraction(1)),
            (4, 2, 16, 11, Fraction(11, 16)),
            (9, 4, 512, 256, Fraction(1, 2)),
        ],
    )
    def test_parameters(self, n, r, N, K, rate):
        code = rm_generator(RmParams(n=n, r=r))
        assert (code.N, code.K, code.rate) == (N, K, rate)
        assert code.two_transitive

    def test_rows_have_weight_at_least_min_distance(self):
        for n in range(1, 6):
            for r in range(n + 1):
                code = rm_generator(RmParams(n=n, r=r))
                assert code.generator.row_weights().min() >= 1 << (n - r)

    def test_same_code_as_monomial_basis(self):
        for n in range(1, 6):
            for r in range(n + 1):
                code = rm_generator(RmParams(n=n, r=r))
                monomials = monomial_generator(n, r)
                assert monomials.rows == code.K
                assert rank(code.generator.vstack(monomials)) == code.K

    @pytest.mark.parametrize("n", range(1, 11))
    def test_rate_strictly_increases_with_order(self, n):
        rates = [rate(RmParams(n=n, r=r)) for r in range(n + 1)]
        assert all(a < b for a, b in zip(rates, rates[1:]))
        assert rates[-1] == 1

    def test_order_above_n_is_rejected(self):
        with pytest.raises(ValueError):
            RmParams(n=2, r=3)

    def test_size_cap(self, env_settings):
        env_settings.setenv("RMEXIT_MAX_HADAMARD_N", "4")
        with pytest.raises(SizeError):
            rm_generator(RmParams(n=5, r=1))


class TestDistance:
    @pytest.mark.parametrize("n, r", ENUMERABLE_RM)
    def test_bruteforce_matches_formula(self, n, r):
        code = rm_generator(RmParams(n=n, r=r))
        assert min_distance_bruteforce(code) == 1 << (n - r) == RmParams(n=n, r=r).d

    def test_enumerable_orders_reach_n5(self):
        assert [r for n, r in ENUMERABLE_RM if n == 5] == [0, 1, 2]

    def test_weight_distribution_of_rm31(self, rm31):
        assert weight_distribution(rm31) == [1, 0, 0, 0, 14, 0, 0, 0, 1]

    def test_enumeration_cap(self, env_settings):
        env_settings.setenv("RMEXIT_ENUM_MAX_K", "10")
        code = rm_generator(RmParams(n=4, r=2))
        with pytest.raises(SizeError):
            enumerate_codewords(code)


class TestLinearCode:
    def test_enumeration_is_complete(self, rm31):
        words = list(enumerate_codewords(rm31))
        assert len(words) == 16
        assert len(set(words)) == 16
        assert all(rm31.contains(w) for w in words)

    def test_encode(self, rm31):
        assert rm31.encode([1, 0, 0, 0]) == rm31.generator.row(0)
        word = rm31.encode([1, 1, 0, 1])
        assert rm31.contains(word)

    def test_single_bit_is_not_a_codeword(self, rm31):
        assert not rm31.contains(BitVector.from_indices(8, [0]))

    def test_hadamard_subcode(self):
        code = hadamard_subcode(3, [7, 3, 5, 6])
        assert code.label == "H3[3,5,6,7]"
        assert code.K == 4
        assert rank(code.generator.vstack(rm_generator(RmParams(n=3, r=1)).generator)) == 4

    def test_hadamard_row_out_of_range(self):
        with pytest.raises(CodeSpecError):
            hadamard_subcode(2, [4])


class TestCodeSpecs:
    def test_rm_spec(self):
        assert parse_code_spec("rm:3,1").label == "RM(3,1)"

    def test_hadamard_spec(self):
        assert parse_code_spec("hadamard:2:1,3").K == 2

    def test_generator_file(self, toy_generator_file):
        code = parse_code_spec(str(toy_generator_file))
        assert code.label == "toy"
        assert (code.N, code.K) == (3, 2)

    def test_rank_deficient_file(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("1100\n1100\n")
        with pytest.raises(CodeSpecError):
            load_generator_file(path)

    def test_ragged_file(self, tmp_path):
        path = tmp_path / "ragged.txt"
        path.write_text("110\n1\n")
        with pytest.raises(CodeSpecError):
            load_generator_file(path)

    @pytest.mark.parametrize("spec", ["rm:2,3", "rm:x", "bch:15,7", "/no/such/file"])
    def test_bad_specs(self, spec):
        with pytest.raises(CodeSpecError):
            parse_code_spec(spec)


def test_rate_half_sequence():
    sequence = sequence_for_rate(Fraction(1, 2), [3, 5, 7, 9])
    assert [m.params.r for m in sequence.members] == [1, 2, 3, 4]
    assert all(m.gap == 0 for m in sequence.members)


def test_sequence_rounds_rate_up():
    member = sequence_for_rate(Fraction(1, 3), [4]).members[0]
    assert member.params.r == 2
    assert member.rate == Fraction(11, 16)
    assert member.gap == Fraction(17, 48)
