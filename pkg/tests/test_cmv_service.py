import numpy as np
import pytest
from numpy.polynomial import polynomial as npoly

from conftest import random_alpha
from service.cmv_service import CMVService
from service.szego_service import SzegoService, VerblunskySeq
from utils.exceptions import ConfigurationError, ContractError

cmv_service = CMVService()
szego_service = SzegoService()


def test_characteristic_polynomial_is_phi(rng):
    for _ in range(50):
        alpha = random_alpha(rng, 12, bound=0.95)
        n = int(rng.integers(1, 13))
        assert cmv_service.char_poly_check(alpha, n) <= 1e-10


def test_characteristic_polynomial_size_limit():
    with pytest.raises(ConfigurationError):
        cmv_service.char_poly_check([0.1] * 13, 13)


def test_five_diagonal_and_unitary(rng):
    cmv = cmv_service.build_cmv(random_alpha(rng, 10), 10)
    rows, cols = np.indices(cmv.matrix.shape)
    assert np.all(cmv.matrix[np.abs(rows - cols) > 2] == 0)
    assert cmv.unitarity_defect() <= 1e-12
    assert cmv.bandwidth == 5


def test_free_cmv_has_no_diagonal():
    cmv = cmv_service.build_cmv([], 6)
    assert np.all(np.diag(cmv.matrix) == 0)
    with pytest.raises(ContractError):
        cmv_service.build_cmv([], 0)


def test_trace_moments_of_single_coefficient():
    t = cmv_service.trace_moments([0.5], 8)
    assert t[0].real == pytest.approx(0.5 * np.log(0.75), abs=1e-14)
    np.testing.assert_allclose(t[1:], 0.5 ** np.arange(1, 9), atol=1e-10)


def test_first_trace_moment_is_the_diagonal_sum():
    alpha = [0.5, 0.3]
    assert cmv_service.trace_moments(alpha, 1)[1] == pytest.approx(0.35, abs=1e-12)
    assert cmv_service.diagonal_trace_formula(alpha) == pytest.approx(0.35)


def test_trace_of_chord_polynomial():
    assert cmv_service.trace_P_diff([0.5], [0.0, -2.0]) == pytest.approx(-1.0, abs=1e-12)


def test_reversed_polynomial_from_determinant(rng):
    alpha = VerblunskySeq(random_alpha(rng, 5))
    z = 0.3 + 0.1j
    _, phi_star = szego_service.orthonormalize(szego_service.recurse(alpha, 5), alpha)
    assert cmv_service.reversed_from_determinant(alpha, 5, z) == pytest.approx(npoly.polyval(z, phi_star), abs=1e-10)


def test_text_dump_has_one_line_per_row():
    text = cmv_service.build_cmv([0.5], 4).to_text()
    assert len(text.strip().splitlines()) == 4
