import numpy as np
import pytest

from conftest import random_alpha
from service.measure_service import MeasureService, chord_weight, p1_weight
from service.sumrule_service import SumRuleService

measure_service = MeasureService()
sumrule_service = SumRuleService()

Z_HALF = 2.0 * np.log(0.75) - 1.0


def test_riesz_polynomial_of_shipped_weights():
    P = sumrule_service.build_P(chord_weight())
    np.testing.assert_allclose(P.coeffs, [0.0, -2.0])
    assert P.A0 == pytest.approx(4.0)
    P1 = sumrule_service.build_P(p1_weight())
    np.testing.assert_allclose(P1.coeffs, [0.0, -1.0])
    assert P1.A0 == pytest.approx(2.0)
    assert P1(0.0) == 0


def test_both_sides_for_single_coefficient(bs_half):
    assert sumrule_service.z_trace([0.5], chord_weight()) == pytest.approx(Z_HALF, abs=1e-10)
    assert sumrule_service.z_direct(bs_half) == pytest.approx(Z_HALF, abs=1e-8)


def test_lebesgue_sum_rule_is_zero(lebesgue):
    assert sumrule_service.z_direct(lebesgue) == pytest.approx(0.0, abs=1e-14)
    assert sumrule_service.z_trace([], chord_weight()) == 0.0


def test_sum_rule_for_random_finite_sequences(grid, rng):
    for _ in range(100):
        alpha = random_alpha(rng, int(rng.integers(1, 9)))
        for weight in (chord_weight(), p1_weight()):
            sigma = measure_service.make_bernstein_szego(alpha, grid, weight=weight)
            assert abs(sumrule_service.z_direct(sigma) - sumrule_service.z_trace(alpha, weight)) <= 1e-8


@pytest.mark.parametrize("weight", [chord_weight(), p1_weight()], ids=["chord", "p1"])
def test_sum_rule_with_a_root_near_the_circle(grid, weight):
    alpha = [-0.369 + 0.342j, -0.571 + 0.526j, -0.359 - 0.009j, 0.791 + 0.083j, -0.696 + 0.028j,
             0.472 - 0.085j, -0.142 + 0.625j]
    sigma = measure_service.make_bernstein_szego(alpha, grid, weight=weight)
    assert sigma.scan_M > grid.M
    scan = sigma.entropy_scan()
    assert scan.converged
    assert abs(sumrule_service.z_direct(sigma) - sumrule_service.z_trace(alpha, weight)) <= 1e-8


def test_diagonal_terms_sum_to_trace_side(rng):
    alpha = random_alpha(rng, 4)
    total = np.sum(sumrule_service.diagonal_terms(alpha, chord_weight()))
    assert total == pytest.approx(sumrule_service.z_trace(alpha, chord_weight()), abs=1e-12)


def test_f_sequence_reaches_target_at_N(bs_half):
    sequence = sumrule_service.f_origin_sequence(bs_half, 10)
    assert sequence.log_f[0] == 0.0
    np.testing.assert_allclose(sequence.log_f[1:], sequence.target, atol=1e-10)
    assert sequence.monotone
    assert sequence.semicontinuity_ok


def test_f_sequence_is_constant_for_lebesgue(lebesgue):
    sequence = sumrule_service.f_origin_sequence(lebesgue, 5)
    np.testing.assert_allclose(sequence.log_f, 0.0, atol=1e-15)


def test_descent_can_fail_at_finite_n(grid):
    sigma = measure_service.make_bernstein_szego([0.9, 0.1], grid)
    sequence = sumrule_service.f_origin_sequence(sigma, 4)
    assert not sequence.monotone
    assert sequence.max_increase > 0


def test_report_fields(bs_half):
    report = sumrule_service.sum_rule_report(bs_half, n_max=3)
    assert report.discrepancy <= 1e-8
    assert report.a0 == pytest.approx(4.0)
    assert report.c1 == pytest.approx(0.99 / 4.0, rel=1e-6)
    assert len(report.f_sequence) == 4


def test_entropy_is_finite_off_the_szego_class(ps_family):
    assert not ps_family.is_szego
    assert np.isfinite(sumrule_service.z_direct(ps_family))
    sequence = sumrule_service.f_origin_sequence(ps_family, 6)
    assert sequence.log_f[0] == 0.0
    assert sequence.target is not None
