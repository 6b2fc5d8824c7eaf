import numpy as np
import pytest

from service.measure_service import Atom, MeasureService, WeightPoly, chord_weight, p1_weight, two_point_weight
from service.szego_service import SzegoService
from tools.circle_core import make_grid
from utils.exceptions import ClassViolationError, ConfigurationError, ContractError, DomainError, PoleError

measure_service = MeasureService()
szego_service = SzegoService()


def test_weight_zeros_must_be_unimodular():
    with pytest.raises(DomainError):
        WeightPoly((0.5 + 0.5j,), (1,))
    with pytest.raises(ContractError):
        WeightPoly((1 + 0j,), (0,))


def test_q_agrees_with_p_on_the_circle(small_grid):
    for weight in (chord_weight(), p1_weight(), two_point_weight()):
        t = small_grid.nodes
        np.testing.assert_allclose(measure_service.q_eval(weight, t), measure_service.weight_eval(weight, t),
                                   atol=1e-12)
    with pytest.raises(PoleError):
        measure_service.q_eval(chord_weight(), 0.0)


def test_shipped_weights():
    assert chord_weight().evaluate(np.array([-1.0 + 0j]))[0] == pytest.approx(4.0)
    assert p1_weight().evaluate(np.array([-1.0 + 0j]))[0] == pytest.approx(2.0)
    assert p1_weight().is_p1 and not chord_weight().is_p1
    assert chord_weight().laurent_coeffs().coefficient(1) == pytest.approx(-1.0)
    assert two_point_weight().n_prime == 2


def test_atom_masses_must_stay_below_one(small_grid):
    with pytest.raises(ClassViolationError):
        measure_service.make_lebesgue(small_grid, atoms=[Atom.from_angle(0.0, 0.6), Atom.from_angle(1.0, 0.4)])


def test_total_mass_with_atoms(bs_small_atom):
    assert bs_small_atom.total_mass() == pytest.approx(1.0, abs=1e-12)
    assert bs_small_atom.singular_mass == pytest.approx(0.2)
    assert bs_small_atom.exact_alpha is None


def test_lebesgue_moments(lebesgue):
    np.testing.assert_allclose(measure_service.moments(lebesgue, 3), [1.0, 0.0, 0.0, 0.0], atol=1e-14)


def test_moment_order_limited_by_grid(small_grid):
    with pytest.raises(ConfigurationError):
        measure_service.moments(measure_service.make_lebesgue(small_grid), 600)


def test_bernstein_szego_coefficients_are_exact(bs_half):
    np.testing.assert_allclose(bs_half.verblunsky(3).alpha, [0.5, 0.0, 0.0])
    assert bs_half.is_szego and bs_half.is_poly_szego


def test_scan_starts_past_the_nearest_root(small_grid):
    # Φ*₁ = 1 - 0.99z has its root at 1/0.99; 40/log(1/0.99) is just below 4096
    sigma = measure_service.make_bernstein_szego([0.99], small_grid)
    assert sigma.scan_M == 4096
    assert measure_service.make_bernstein_szego([0.5], small_grid).scan_M == small_grid.M


def test_ps_family_sits_between_the_classes(ps_family):
    assert not ps_family.is_szego
    assert ps_family.is_poly_szego
    assert ps_family.total_mass() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("beta, szego", [(0.5, True), (1.5, False), (2.5, False)])
def test_chordal_ps_family_thresholds(grid, beta, szego):
    sigma = measure_service.make_ps_family(chord_weight(), beta, grid=grid)
    assert sigma.is_szego is szego
    assert sigma.is_poly_szego


@pytest.mark.parametrize("beta", [3.0, 3.5])
def test_ps_family_outside_the_class(grid, beta):
    with pytest.raises(ClassViolationError):
        measure_service.make_ps_family(chord_weight(), beta, grid=grid)


def test_table_measure_is_renormalized(small_grid):
    sigma = measure_service.make_table_measure([0.0, np.pi], [2.0, 2.0], chord_weight(), grid=small_grid)
    np.testing.assert_allclose(measure_service.moments(sigma, 2), [1.0, 0.0, 0.0], atol=1e-13)


def test_class_report(bs_half, ps_family):
    report = measure_service.class_report(bs_half)
    assert report.szego and report.poly_szego and report.erdos
    report = measure_service.class_report(ps_family)
    assert report.poly_szego and not report.szego


def test_extracted_coefficients_of_a_bernstein_szego_measure_with_atom(bs_small_atom):
    alpha = bs_small_atom.verblunsky(20)
    assert len(alpha) == 20
    assert np.all(np.abs(alpha.alpha) < 1.0)
    assert alpha.residual < 1e-8
    np.testing.assert_array_equal(bs_small_atom.verblunsky(5).alpha, alpha.alpha[:5])


def test_extraction_depth_limited_by_grid(small_grid):
    sigma = measure_service.make_ps_family(chord_weight(), 1.5, grid=small_grid)
    with pytest.raises(ConfigurationError):
        sigma.verblunsky(small_grid.M // 2)


def test_extracted_polynomials_stay_orthonormal(grid):
    sigma = measure_service.make_ps_family(chord_weight(), 1.5, [Atom.from_angle(np.pi, 0.2)], grid)
    alpha = sigma.verblunsky(200)
    phi_grid, _ = szego_service.recurse_values(alpha, 200, grid.nodes)
    phi_atoms, _ = szego_service.recurse_values(alpha, 200, sigma.atom_locations)
    density = sigma.density_samples() / grid.M
    for n in (100, 150, 200):
        a = alpha.A[n]
        norm2 = (np.sum(density * np.abs(phi_grid[n] / a) ** 2)
                 + np.sum(sigma.atom_masses * np.abs(phi_atoms[n] / a) ** 2))
        assert abs(norm2 - 1.0) <= 1e-10
