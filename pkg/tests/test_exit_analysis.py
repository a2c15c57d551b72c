from fractions import Fraction
from itertools import product
from math import comb

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rmexit.channel_decoder import ErasurePattern, bit_map_decode, block_map_decode, sample_erasures
from rmexit.codes import rm_generator
from rmexit.errors import SizeError
from rmexit.exit_analysis import (
    area_exact,
    average_exit_exact,
    block_error_exact,
    check_exit_monotone,
    check_profile_monotone,
    conditional_entropy_exact,
    curve_to_csv,
    exact_curve,
    exit_exact,
    exit_monte_carlo,
    omega_decoder_mismatches,
    partial_area_exact,
    run_monte_carlo,
    verify_area_theorem,
)
from rmexit.schemas import ExitPolynomial, RmParams
from rmexit.symmetry import verify_exit_equality

SMALL_RM = [(n, r) for n in range(5) for r in range(n + 1)]


def rm(n, r):
    return rm_generator(RmParams(n=n, r=r))


class TestExactExit:
    def test_rm31_weights(self, rm31):
        p = exit_exact(rm31, 0)
        assert p.weights == (0, 0, 0, 7, 28, 21, 7, 1)
        assert area_exact(p) == Fraction(1, 2)

    @pytest.mark.parametrize("n, r", SMALL_RM)
    def test_area_equals_rate(self, n, r):
        code = rm(n, r)
        assert area_exact(average_exit_exact(code)) == Fraction(code.K, code.N)

    def test_rm42_area(self, rm42):
        assert area_exact(average_exit_exact(rm42)) == Fraction(11, 16)

    @pytest.mark.parametrize("n, r", SMALL_RM)
    def test_exit_independent_of_bit(self, n, r):
        assert verify_exit_equality(rm(n, r))

    def test_symmetric_average_matches_full_average(self, rm42):
        fast = average_exit_exact(rm42, use_symmetry=True)
        slow = average_exit_exact(rm42)
        grid = [Fraction(k, 7) for k in range(8)]
        assert [fast.evaluate(x) for x in grid] == [slow.evaluate(x) for x in grid]

    @pytest.mark.parametrize("n", range(5))
    def test_repetition_closed_form(self, n):
        m = (1 << n) - 1
        assert exit_exact(rm(n, 0), 0).weights == tuple([0] * m + [1])

    @pytest.mark.parametrize("n", range(1, 5))
    def test_parity_check_closed_form(self, n):
        m = (1 << n) - 1
        assert exit_exact(rm(n, n - 1), 0).weights == tuple([0] + [comb(m, w) for w in range(1, m + 1)])

    @pytest.mark.parametrize("n", range(5))
    def test_full_space_closed_form(self, n):
        m = (1 << n) - 1
        p = exit_exact(rm(n, n), 0)
        assert p.weights == tuple(comb(m, w) for w in range(m + 1))
        assert p.evaluate(Fraction(1, 3)) == 1

    def test_asymmetric_code(self, toy_code):
        assert exit_exact(toy_code, 0).weights == (0, 1, 1)
        assert exit_exact(toy_code, 2).weights == (1, 2, 1)
        assert not verify_exit_equality(toy_code)
        assert area_exact(average_exit_exact(toy_code)) == Fraction(2, 3)

    def test_size_cap(self):
        with pytest.raises(SizeError):
            exit_exact(rm(5, 2), 0)

    def test_table_agrees_with_decoder(self, rm42):
        rng = np.random.default_rng(0)
        masks = rng.choice(1 << 15, size=300, replace=False).tolist()
        assert omega_decoder_mismatches(rm42, 3, masks) == 0

    def test_table_agrees_with_decoder_on_every_pattern_n8(self, rm31):
        assert [omega_decoder_mismatches(rm31, i) for i in range(8)] == [0] * 8

    @pytest.mark.slow
    def test_table_agrees_with_decoder_on_every_pattern_n16(self, rm42):
        assert [omega_decoder_mismatches(rm42, i) for i in range(16)] == [0] * 16


class TestAreaTheorem:
    @pytest.mark.parametrize("n, r", [(3, 1), (4, 2)])
    def test_partial_areas_match_conditional_entropy(self, n, r):
        code = rm(n, r)
        average = average_exit_exact(code)
        for eps in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            assert code.N * partial_area_exact(average, eps) == conditional_entropy_exact(code, eps)
        assert verify_area_theorem(code).passed

    def test_entropy_endpoints(self, rm42):
        assert conditional_entropy_exact(rm42, 0) == 0
        assert conditional_entropy_exact(rm42, 1) == 11

    def test_partial_area_at_one_is_area(self, rm31):
        p = exit_exact(rm31, 0)
        assert partial_area_exact(p, 1) == area_exact(p)

    def test_block_error_matches_enumeration(self, rm31):
        eps = Fraction(2, 5)
        expected = Fraction(0)
        for bits in product((0, 1), repeat=8):
            pattern = ErasurePattern.from_indices(8, [k for k, b in enumerate(bits) if b])
            if not block_map_decode(rm31, pattern):
                w = sum(bits)
                expected += eps**w * (1 - eps) ** (8 - w)
        assert block_error_exact(rm31, eps) == expected
        assert block_error_exact(rm31, 0) == 0
        assert block_error_exact(rm31, 1) == 1


class TestProperties:
    @pytest.mark.parametrize("n, r", SMALL_RM)
    def test_exit_monotone(self, n, r):
        assert check_exit_monotone(exit_exact(rm(n, r), 0))

    def test_profile_check_returns_bool(self, rm42):
        assert check_profile_monotone(exit_exact(rm42, 0)) in (True, False)

    def test_non_monotone_profile_warns(self, caplog):
        p = ExitPolynomial(N=3, weights=(0, 2, 0), label="bump")
        assert not check_profile_monotone(p)
        assert "not monotone" in caplog.text

    @pytest.mark.parametrize("n, r", [(1, 0), (3, 1)])
    def test_self_dual_codes_cross_at_one_half(self, n, r):
        p = exit_exact(rm(n, r), 0)
        assert p.evaluate(Fraction(1, 2)) == Fraction(1, 2)
        x = Fraction(1, 3)
        assert p.evaluate(x) + p.evaluate(1 - x) == 1


class TestMonteCarlo:
    def test_matches_direct_sampling(self, rm42):
        grid = [0.2, 0.4, 0.6]
        curve = exit_monte_carlo(rm42, 5, grid, trials=40, seed=11)
        for point, eps in zip(curve.points, grid):
            failures = sum(
                bit_map_decode(rm42, sample_erasures(16, eps, seed=11, trial=t)).extrinsic[5].value == "failed"
                for t in range(40)
            )
            assert point.h == failures / 40

    def test_worker_count_does_not_change_thresholds(self, rm42):
        single = run_monte_carlo(rm42, "average", trials=60, seed=2, workers=1)
        pooled = run_monte_carlo(rm42, "average", trials=60, seed=2, workers=3)
        assert np.array_equal(single.thresholds, pooled.thresholds)

    def test_block_curve(self, rm31):
        run = run_monte_carlo(rm31, "average", trials=200, seed=1, block=True)
        block = run.block_curve([0.0, 1.0])
        assert [p.h for p in block.points] == [0.0, 1.0]

    def test_average_over_all_bits_for_asymmetric_code(self, toy_code):
        run = run_monte_carlo(toy_code, "average", trials=10, seed=0)
        assert run.thresholds.shape == (10, 3)

    def test_csv_format(self, rm31):
        curve = exact_curve(exit_exact(rm31, 0), [0.0, 0.5, 1.0], rm31.rate)
        lines = curve_to_csv(curve).splitlines()
        assert lines[0] == "epsilon,h,half_width,trials"
        assert lines[2] == "0.5,0.5,0,0"
        assert len(lines) == 4

    @pytest.mark.slow
    def test_calibration_against_exact(self, rm42):
        grid = np.linspace(0.1, 0.9, 9)
        exact = exit_exact(rm42, 0).evaluate_grid(grid)
        curve = exit_monte_carlo(rm42, "average", grid, trials=100_000, seed=2024, workers=4)
        assert_allclose(curve.values, exact, atol=0.01)


def test_polynomial_payload(rm42):
    average = average_exit_exact(rm42)
    payload = average.to_payload()
    assert payload["denominator"] == "16"
    assert payload["i"] is None
    assert ExitPolynomial.from_payload(payload).area() == Fraction(11, 16)
