import numpy as np
import pytest

from service.asymptotics_service import L2_COLUMNS, AsymptoticsService, SzegoSweep
from service.measure_service import Atom, MeasureService, chord_weight
from tools.circle_core import TrigPoly
from utils.exceptions import ContractError, DomainError

asymptotics_service = AsymptoticsService()
measure_service = MeasureService()

PROBES = [0.3, -0.2 + 0.4j, 0.5j]
COSINE = TrigPoly.from_mapping({-1: 0.5, 0: 1.0, 1: 0.5})


def test_pointwise_errors_vanish_for_bernstein_szego(bs_small):
    table = asymptotics_service.pointwise_table(bs_small, PROBES, [1, 2, 4])
    assert len(table) == 9
    assert table["xi_error"].max() <= 1e-10
    assert table["classical_error"].max() <= 1e-10


def test_classical_column_is_empty_off_the_szego_class(ps_family):
    table = asymptotics_service.pointwise_table(ps_family, PROBES, [2])
    assert table["classical_error"].isna().all()
    assert np.all(np.isfinite(table["xi_error"]))


def test_point_outside_disk(bs_small):
    with pytest.raises(DomainError):
        asymptotics_service.pointwise_table(bs_small, [1.2], [1])


def test_l2_error_and_mass_identity(bs_small):
    table = asymptotics_service.l2_table(bs_small, [1, 3])
    assert list(table.columns) == L2_COLUMNS
    np.testing.assert_allclose(table["direct"], 0.0, atol=1e-16)
    np.testing.assert_allclose(table["mass_formula"], 0.0, atol=1e-12)


def test_bound_statistic_for_lebesgue(lebesgue_small):
    scan = asymptotics_service.bound_scan(lebesgue_small, 0.1, 5)
    np.testing.assert_allclose(scan.table["statistic"], np.sqrt(0.1), rtol=1e-12)
    assert scan.growth == pytest.approx(0.0, abs=1e-12)
    assert scan.clean
    with pytest.raises(ContractError):
        asymptotics_service.bound_scan(lebesgue_small, 0.0, 5)
    with pytest.raises(DomainError):
        asymptotics_service.bound_scan(lebesgue_small, 0.1, 5, rings=(1.0,))


def test_arc_integrals(bs_small):
    result = asymptotics_service.arc_l2(bs_small, [(1.0, 2.0)], 2, eps=0.3)
    row = result.table.iloc[0]
    assert row["arc_measure"] == pytest.approx(1.0 / (2.0 * np.pi))
    assert row["error"] <= 1e-16
    assert row["mass"] == pytest.approx(row["arc_measure"], abs=2.0 / bs_small.grid.M)
    assert row["trace_mass"] == pytest.approx(row["mass"], abs=1e-12)
    assert 0 < result.complement_measure < 1


def test_arc_touching_weight_zero(bs_small):
    with pytest.raises(DomainError):
        asymptotics_service.arc_l2(bs_small, [(-0.5, 0.5)], 1, eps=0.1)
    with pytest.raises(DomainError):
        asymptotics_service.arc_l2(bs_small, [(0.05, 1.0)], 1, eps=0.1)


def test_rakhmanov_for_lebesgue(lebesgue_small):
    table = asymptotics_service.rakhmanov_check(lebesgue_small, [COSINE], [0, 3, 6])
    np.testing.assert_allclose(table["value"], table["lebesgue"], atol=1e-12)
    assert table["lebesgue"].iloc[0] == pytest.approx(1.0)


def test_singular_decay_starts_at_atom_mass(bs_small_atom, bs_small):
    decay = asymptotics_service.singular_decay(bs_small_atom, 10)
    assert decay[0] == pytest.approx(0.2)
    assert np.all(np.isfinite(decay)) and np.all(decay >= 0)
    np.testing.assert_array_equal(asymptotics_service.singular_decay(bs_small, 4), np.zeros(5))


def test_wave_symbol_for_bernstein_szego(bs_small):
    table = asymptotics_service.wave_symbol_check(bs_small, [1, 2], l=1)
    assert table["err_a"].max() <= 1e-10
    assert table["err_b"].max() <= 1e-12
    with pytest.raises(ContractError):
        asymptotics_service.wave_symbol_check(bs_small, [1], l=-3)


def test_sweep_range(bs_small):
    sweep = SzegoSweep(bs_small, 3)
    with pytest.raises(ContractError):
        sweep.log_phi_star(4)
    np.testing.assert_allclose(sweep.phi_star_abs2(2) * sweep.density, 1.0, rtol=1e-12)


def test_convergence_report_is_valid(bs_small):
    report = asymptotics_service.convergence_report(bs_small, [0.3], [1, 2], arcs=[(1.0, 2.0)], testfns=[COSINE])
    assert report.is_valid()
    assert set(report.arcs["n"]) == {1, 2}
    assert len(report.singular) == 3


def test_bound_statistic_is_uniform_off_the_szego_class(ps_family):
    scan = asymptotics_service.bound_scan(ps_family, 0.3, 200)
    assert len(scan.table) == 201
    assert np.all(np.diff(scan.table["running_max"]) >= 0)
    assert scan.growth < 0.05
    assert scan.clean


@pytest.fixture(scope="module")
def ps_family_atom(grid):
    return measure_service.make_ps_family(chord_weight(), 1.5, [Atom.from_angle(np.pi, 0.2)], grid)


@pytest.fixture(scope="module")
def deep_sweep(ps_family_atom):
    return SzegoSweep(ps_family_atom, 402)


def test_pointwise_error_decreases(ps_family_atom, deep_sweep):
    table = asymptotics_service.pointwise_table(ps_family_atom, [0.5], [10, 200], deep_sweep)
    errors = table.set_index("n")["xi_error"]
    assert errors[200] < errors[10]


def test_l2_error_decreases(ps_family_atom, deep_sweep):
    table = asymptotics_service.l2_table(ps_family_atom, [10, 200], deep_sweep).set_index("n")
    assert table.loc[200, "direct"] < table.loc[10, "direct"]


def test_singular_part_decreases(ps_family_atom, deep_sweep):
    decay = asymptotics_service.singular_decay(ps_family_atom, 200, deep_sweep)
    assert decay[0] == pytest.approx(0.2)
    assert decay[200] < decay[10]


def test_wave_symbol_errors_decrease(ps_family_atom, deep_sweep):
    table = asymptotics_service.wave_symbol_check(ps_family_atom, [10, 200], 1, deep_sweep).set_index("n")
    assert table.loc[200, "err_a"] < table.loc[10, "err_a"]
    assert table.loc[200, "err_b"] < table.loc[10, "err_b"]


def test_extracted_rakhmanov_normalization(ps_family_atom, deep_sweep):
    table = asymptotics_service.rakhmanov_check(ps_family_atom, [TrigPoly.from_mapping({0: 1.0})],
                                                [10, 100, 200], deep_sweep)
    np.testing.assert_allclose(table["value"], 1.0, atol=1e-8)
