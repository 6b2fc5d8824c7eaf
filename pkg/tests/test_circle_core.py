import numpy as np
import pytest

from tools.circle_core import (TrigPoly, angular_distance, arc_mask, boundary_trace, fourier_coeffs, make_grid,
                               quad_mean, refinement_scan, schwarz_coefficients, schwarz_eval, schwarz_ring,
                               schwarz_series, weighted_log)
from utils.exceptions import ConfigurationError, ContractError, DomainError


def test_make_grid_rejects_bad_sizes():
    with pytest.raises(ConfigurationError):
        make_grid(1000)
    with pytest.raises(ConfigurationError):
        make_grid(1024, offset=1.0)


def test_grid_is_offset_by_half_a_step():
    grid = make_grid(8)
    assert grid.theta[0] == pytest.approx(np.pi / 8)
    assert np.allclose(np.abs(grid.nodes), 1.0)
    assert grid.refine().M == 16


def test_quad_mean_kills_nonzero_modes(small_grid):
    t = small_grid.nodes
    assert quad_mean(np.ones(small_grid.M), small_grid) == pytest.approx(1.0)
    for k in (1, 7, 511, -3):
        assert abs(quad_mean(t ** k, small_grid)) < 1e-13


def test_quad_mean_checks_shape(small_grid):
    with pytest.raises(ContractError):
        quad_mean(np.ones(10), small_grid)


def test_fourier_coeffs_of_chord_weight(small_grid):
    t = small_grid.nodes
    coeffs = fourier_coeffs(np.abs(t - 1.0) ** 2, 3, small_grid)
    assert coeffs.coefficient(0) == pytest.approx(2.0)
    assert coeffs.coefficient(1) == pytest.approx(-1.0)
    assert coeffs.coefficient(-1) == pytest.approx(-1.0)
    assert abs(coeffs.coefficient(2)) < 1e-13
    assert coeffs.is_real()


def test_schwarz_integral_of_cosine_is_z(small_grid):
    data = np.cos(small_grid.theta)
    z = 0.3 + 0.2j
    assert schwarz_eval(data, z, small_grid) == pytest.approx(z, abs=1e-12)
    coeffs = schwarz_coefficients(data, small_grid)
    assert coeffs[1] == pytest.approx(1.0, abs=1e-12)
    assert schwarz_series(coeffs, z) == pytest.approx(z, abs=1e-12)
    ring = schwarz_ring(data, small_grid, 0.5)
    np.testing.assert_allclose(ring, 0.5 * small_grid.nodes, atol=1e-12)


def test_boundary_trace_adds_conjugate_function(small_grid):
    trace = boundary_trace(np.cos(small_grid.theta), small_grid)
    np.testing.assert_allclose(trace, small_grid.nodes, atol=1e-12)


def test_schwarz_eval_refuses_points_on_the_circle(small_grid):
    with pytest.raises(DomainError):
        schwarz_eval(np.zeros(small_grid.M), 1.0 - 1e-10, small_grid)


def test_refinement_scan_verdicts():
    smooth = refinement_scan(lambda g: np.cos(g.theta) ** 2, 256)
    assert smooth.converged
    assert smooth.value == pytest.approx(0.5)
    divergent = refinement_scan(lambda g: 1.0 / np.abs(g.nodes - 1.0), 256)
    assert not divergent.converged
    assert divergent.ratio > 0.9


def test_refinement_scan_keeps_doubling_near_a_root():
    # log|1 - t/1.01|² has mean zero; the trapezoid error decays like 1.01^(-M)
    scan = refinement_scan(lambda g: np.log(np.abs(1.0 - g.nodes / 1.01) ** 2), 256)
    assert len(scan.levels) > 3
    assert scan.converged
    assert scan.value == pytest.approx(0.0, abs=1e-12)
    assert scan.levels == tuple(256 * 2 ** k for k in range(len(scan.levels)))


def test_refinement_scan_stops_at_the_node_cap():
    scan = refinement_scan(lambda g: 1.0 / np.abs(g.nodes - 1.0), 256, max_M=2048)
    assert scan.levels[-1] == 2048
    with pytest.raises(ConfigurationError):
        refinement_scan(lambda g: np.ones(g.M), 256, max_M=512)


def test_trig_poly_arc_integral():
    p1 = TrigPoly.from_mapping({0: 1.0, 1: -0.5, -1: -0.5})
    s = np.array([0.0, 1.3, np.pi, 2.0 * np.pi])
    np.testing.assert_allclose(p1.arc_integral(s).real, s - np.sin(s), atol=1e-14)
    assert p1(np.array([-1.0 + 0j]))[0] == pytest.approx(2.0)
    np.testing.assert_allclose(p1.analytic_part(), [1.0, -0.5])


def test_trig_poly_needs_odd_length():
    with pytest.raises(ContractError):
        TrigPoly(np.ones(4))


def test_angles_and_arcs():
    assert angular_distance(0.1, 2.0 * np.pi - 0.1) == pytest.approx(0.2)
    grid = make_grid(16)
    mask = arc_mask(grid, 0.0, np.pi)
    assert mask.sum() == 8
    wrapped = arc_mask(grid, 3.0 * np.pi / 2.0, np.pi / 2.0)
    assert wrapped.sum() == 8


def test_weighted_log_drops_exact_zeros():
    values = weighted_log(np.array([0.0, 2.0]), np.array([-np.inf, -1.5]))
    np.testing.assert_array_equal(values, [0.0, -3.0])
