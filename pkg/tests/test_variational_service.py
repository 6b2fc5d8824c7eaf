import numpy as np
import pytest

from service.measure_service import chord_weight, p1_weight
from service.variational_service import OuterPoly, SandwichReport, VariationalService
from utils.exceptions import ContractError, DomainError

variational_service = VariationalService()


@pytest.fixture(scope="module")
def p0(grid):
    return variational_service.normalize_weight(p1_weight(), grid)


def test_normalization_of_chord_weight(grid):
    normalized = variational_service.normalize_weight(chord_weight(), grid)
    assert normalized.C0 == pytest.approx(0.5)
    assert normalized.fourier.coefficient(1) == pytest.approx(-0.5)


def test_outer_poly_validation():
    with pytest.raises(DomainError):
        OuterPoly((0.5,))
    with pytest.raises(ContractError):
        OuterPoly((2.0,), scale=0.0)
    g = OuterPoly((2.0,))
    np.testing.assert_allclose(g.coefficients(), [1.0, -0.5])
    assert g.evaluate(0.0) == pytest.approx(1.0)


def test_lambda_of_linear_factor(p0, grid):
    g = OuterPoly((2.0,))
    assert variational_service.lambda_series(g, p0) == pytest.approx(np.exp(0.25), rel=1e-12)
    assert variational_service.lambda_eval(g, p0, grid) == pytest.approx(np.exp(0.25), rel=1e-10)


def test_lambda_series_matches_quadrature(p0, grid, rng):
    for g in variational_service.random_outer_polys(rng, count=10, max_degree=4):
        quadrature = variational_service.lambda_eval(g, p0, grid)
        assert variational_service.lambda_series(g, p0) == pytest.approx(quadrature, rel=1e-8)


def test_bounds_for_lebesgue(lebesgue, p0):
    assert variational_service.lower_bound(lebesgue, p0) == pytest.approx(2.0 / np.e, rel=1e-8)
    assert variational_service.upper_bound(lebesgue, p0) == pytest.approx(1.0, abs=1e-14)


def test_candidates_are_reproducible():
    first = variational_service.random_outer_polys(np.random.default_rng(7), count=5)
    second = variational_service.random_outer_polys(np.random.default_rng(7), count=5)
    for a, b in zip(first, second):
        assert a.roots == b.roots and a.scale == b.scale
        assert all(abs(z) > 1 for z in a.roots)


def test_sandwich_for_bernstein_szego(bs_half, p0, rng):
    candidates = variational_service.random_outer_polys(rng, count=30)
    report = variational_service.sandwich_check(bs_half, p0, candidates, n_max=4)
    assert report.lower <= report.upper
    assert np.all(report.candidate_values >= report.lower * (1.0 - 1e-9))
    assert report.witness_values[2] == pytest.approx(report.upper, rel=1e-10)
    assert report.witness_ok


def test_classical_distance(bs_half, lebesgue):
    assert variational_service.classical_distance(bs_half, 0) == pytest.approx(1.0)
    for n in (1, 2, 6):
        assert variational_service.classical_distance(bs_half, n) == pytest.approx(0.75, rel=1e-10)
    assert variational_service.classical_distance(lebesgue, 3) == pytest.approx(1.0)
    with pytest.raises(ContractError):
        variational_service.classical_distance(lebesgue, -1)


def test_distance_table(bs_half):
    table = variational_service.distance_table(bs_half, [0, 1, 4])
    assert list(table.columns) == ["n", "distance", "rho_product", "szego_limit"]
    np.testing.assert_allclose(table["distance"], table["rho_product"], rtol=1e-10)
    np.testing.assert_allclose(table["szego_limit"], 0.75, rtol=1e-10)


def test_nu_phase(p0):
    s = np.linspace(0.0, 2.0 * np.pi, 9)
    np.testing.assert_allclose(variational_service.nu_phase(p0, s), s - np.sin(s), atol=1e-14)
    assert variational_service.nu_phase(p0, 2.0 * np.pi) == pytest.approx(2.0 * np.pi)
    with pytest.raises(ContractError):
        variational_service.nu_phase(p0, -0.1)


def test_witness_chain_trends_down_off_the_szego_class(ps_family, rng):
    p0 = variational_service.normalize_weight(ps_family.weight, ps_family.grid)
    candidates = variational_service.random_outer_polys(rng, count=20)
    report = variational_service.sandwich_check(ps_family, p0, candidates, n_max=40)
    assert not report.exact
    assert report.witness_trend <= 0.0
    assert report.witness_ok


def _report(witnesses, exact):
    return SandwichReport(lower=0.5, upper=1.0, candidate_values=np.array([2.0]),
                          witness_values=np.asarray(witnesses, dtype=float), best_value=1.0, best_label="x",
                          min_slack=0.0, exact=exact)


def test_witness_verdicts():
    falling = np.linspace(1.2, 1.01, 30)
    assert _report(falling, exact=False).witness_ok
    # an absolute slack of 1e-3 would reject this chain
    assert not _report(falling, exact=True).witness_ok
    rising = np.concatenate((falling[:15], np.full(15, 1.19)))
    assert not _report(rising, exact=False).witness_ok
    assert np.isnan(_report(falling[:5], exact=False).witness_trend)
    assert not _report(np.full(30, 0.4), exact=False).witness_ok
