"""
Tasks over the asymptotic diagnostics. Exact measures (known finite α) are
checked against their floors from n = N on; the others against the trend
between n = 10 and n_max.
"""
import logging
from typing import List

import numpy as np
import pandas as pd

from config import BOUND_GROWTH_MAX, BS_FLOOR, TREND_START
from models.models import ExperimentConfig
from service.asymptotics_service import AsymptoticsService, wave_depth
from tasks.base_task import BaseTask, TaskContext, TaskResult, degree_schedule
from tools.circle_core import TrigPoly
from utils.exceptions import ContractError

logger = logging.getLogger(__name__)

POINTWISE_FLOOR = 1e-10
L2_FLOOR = 1e-8
RAKHMANOV_FLOOR = 1e-10
NORMALIZATION_TOLERANCE = 1e-8
TREND_SLACK = 1e-14


def _trend(values_start: np.ndarray, values_end: np.ndarray) -> bool:
    return bool(np.all(values_end <= values_start + TREND_SLACK))


class AsymptoticTask(BaseTask):
    module = "asymptotics"

    def __init__(self):
        self.asymptotics_service = AsymptoticsService()


class PointwiseTask(AsymptoticTask):
    name = "pointwise"

    def compute(self, context: TaskContext) -> TaskResult:
        n_values = degree_schedule(context.n_max)
        table = self.asymptotics_service.pointwise_table(context.sigma, context.probes, n_values,
                                                         context.sweep(context.n_max))
        checks = []
        support = context.exact_support
        if support is not None:
            tail = table.loc[table["n"] >= support, "xi_error"]
            worst = float(tail.max()) if len(tail) else 0.0
            checks.append(self.check("exact_floor", worst <= POINTWISE_FLOOR, worst, POINTWISE_FLOOR,
                                     f"|xi_n(z) - 1| for n >= {support}"))
        elif context.n_max > TREND_START:
            start = table.loc[table["n"] == TREND_START, "xi_error"].to_numpy()
            end = table.loc[table["n"] == context.n_max, "xi_error"].to_numpy()
            checks.append(self.check("trend", _trend(start, end), float(np.max(end)), None,
                                     f"errors at n={context.n_max} against n={TREND_START}"))
        return TaskResult(table, checks)


class L2Task(AsymptoticTask):
    name = "l2"

    def compute(self, context: TaskContext) -> TaskResult:
        table = self.asymptotics_service.l2_table(context.sigma, degree_schedule(context.n_max),
                                                  context.sweep(context.n_max))
        checks = []
        support = context.exact_support
        if support is not None:
            tail = table[table["n"] >= support]
            worst = float(np.max(np.abs(tail[["direct", "mass_formula"]].to_numpy()), initial=0.0))
            checks.append(self.check("exact_floor", worst <= L2_FLOOR, worst, L2_FLOOR,
                                     f"both L2 errors for n >= {support}"))
        elif context.n_max > TREND_START:
            start = table.loc[table["n"] == TREND_START, "direct"].to_numpy()
            end = table.loc[table["n"] == context.n_max, "direct"].to_numpy()
            checks.append(self.check("trend", _trend(start, end), float(end[0]), None,
                                     f"L2 error at n={context.n_max} against n={TREND_START}"))
        return TaskResult(table, checks)


class ArcsTask(AsymptoticTask):
    name = "arcs"

    def compute(self, context: TaskContext) -> TaskResult:
        config = context.config
        sweep = context.sweep(context.n_max)
        frames: List[pd.DataFrame] = []
        complements = []
        for n in degree_schedule(context.n_max):
            result = self.asymptotics_service.arc_l2(context.sigma, config.arcs, n, config.eps, sweep)
            frames.append(result.table.assign(n=n))
            complements.append((n, result.complement_mass, result.complement_measure))
        table = pd.concat(frames, ignore_index=True)
        table = table[["n"] + [c for c in table.columns if c != "n"]]

        checks = []
        support = context.exact_support
        if support is not None:
            worst = float(table.loc[table["n"] >= support, "error"].max())
            checks.append(self.check("exact_floor", worst <= L2_FLOOR, worst, L2_FLOOR,
                                     f"arc errors for n >= {support}"))
        elif context.n_max > TREND_START:
            start = table.loc[table["n"] == TREND_START, "error"].to_numpy()
            end = table.loc[table["n"] == context.n_max, "error"].to_numpy()
            checks.append(self.check("trend", _trend(start, end), float(np.max(end)), None,
                                     f"arc errors at n={context.n_max} against n={TREND_START}"))
        return TaskResult(table, checks, {"complement": complements})


class BoundTask(AsymptoticTask):
    name = "bound"

    def compute(self, context: TaskContext) -> TaskResult:
        scan = self.asymptotics_service.bound_scan(context.sigma, context.config.eps, context.n_max,
                                                   sweep=context.sweep(context.n_max))
        check = self.check("uniform_bound", scan.clean, scan.growth, BOUND_GROWTH_MAX,
                           f"growth of the running max between n={context.n_max // 2} and n={context.n_max}")
        return TaskResult(scan.table, [check], {"bound_statistic": scan.statistic})


TEST_FUNCTIONS = (TrigPoly.from_mapping({0: 1.0}), TrigPoly.from_mapping({1: 1.0}),
                  TrigPoly.from_mapping({-2: 0.5, 2: 0.5}))


class RakhmanovTask(AsymptoticTask):
    name = "rakhmanov"

    def compute(self, context: TaskContext) -> TaskResult:
        n_values = degree_schedule(context.n_max)
        table = self.asymptotics_service.rakhmanov_check(context.sigma, TEST_FUNCTIONS, n_values,
                                                         context.sweep(context.n_max))
        ones = table[table["f_index"] == 0]
        drift = float(np.max(np.abs(ones["value"] - 1.0)))
        checks = [self.check("normalization", drift <= NORMALIZATION_TOLERANCE, drift, NORMALIZATION_TOLERANCE,
                             "functional of f = 1")]
        support = context.exact_support
        if support is not None:
            tail = table[table["n"] >= support]
            worst = float(np.max(np.abs(tail["value"].to_numpy() - tail["lebesgue"].to_numpy()), initial=0.0))
            checks.append(self.check("exact_floor", worst <= RAKHMANOV_FLOOR, worst, RAKHMANOV_FLOOR,
                                     f"functionals equal Lebesgue for n >= {support}"))
        elif context.n_max > TREND_START:
            moving = table[table["f_index"] == 1]
            start = np.abs(moving.loc[moving["n"] == TREND_START, "value"].to_numpy())
            end = np.abs(moving.loc[moving["n"] == context.n_max, "value"].to_numpy())
            checks.append(self.check("trend", _trend(start, end), float(end[0]), None,
                                     f"|functional of f = t| at n={context.n_max} against n={TREND_START}"))
        return TaskResult(table, checks)


class SingularTask(AsymptoticTask):
    name = "singular"

    def compute(self, context: TaskContext) -> TaskResult:
        values = self.asymptotics_service.singular_decay(context.sigma, context.n_max,
                                                         context.sweep(context.n_max))
        table = pd.DataFrame({"n": np.arange(values.size), "singular_mass": values})
        checks = []
        if not context.sigma.atoms:
            checks.append(self.check("no_atoms", bool(np.all(values == 0.0)), float(np.max(values)), 0.0,
                                     "singular part vanishes"))
        elif context.n_max > TREND_START:
            checks.append(self.check("trend", values[-1] < values[TREND_START], values[-1], None,
                                     f"singular mass at n={context.n_max} against n={TREND_START}"))
        return TaskResult(table, checks)


class WaveTask(AsymptoticTask):
    name = "wave"

    @staticmethod
    def _n_values(config: ExperimentConfig) -> List[int]:
        return [n for n in degree_schedule(config.n_max) if n + config.l_shift >= 0]

    def depth(self, config: ExperimentConfig) -> int:
        n_values = self._n_values(config)
        return max(config.n_max, wave_depth(n_values, config.l_shift) if n_values else 0)

    def compute(self, context: TaskContext) -> TaskResult:
        l = context.config.l_shift
        n_values = self._n_values(context.config)
        if not n_values:
            raise ContractError(f"Shift l={l} leaves no degree n <= {context.n_max} with n + l >= 0",
                                module="asymptotics")
        sweep = context.sweep(self.depth(context.config))
        table = self.asymptotics_service.wave_symbol_check(context.sigma, n_values, l, sweep)
        checks = []
        support = context.exact_support
        if support is not None:
            worst_a = float(table.loc[table["n"] >= support, "err_a"].max())
            stationary = table[(2 * table["n"] >= support) & (2 * (table["n"] + l) >= support)]
            worst_b = float(stationary["err_b"].max()) if len(stationary) else 0.0
            checks.append(self.check("exact_floor_a", worst_a <= BS_FLOOR, worst_a, BS_FLOOR,
                                     f"err_a for n >= {support}"))
            checks.append(self.check("stationary_b", worst_b == 0.0, worst_b, 0.0, "err_b once psi is stationary"))
        elif context.n_max > TREND_START:
            start = table.loc[table["n"] == TREND_START, ["err_a", "err_b"]].to_numpy()
            end = table.loc[table["n"] == context.n_max, ["err_a", "err_b"]].to_numpy()
            checks.append(self.check("trend", _trend(start, end), float(np.max(end)), None,
                                     f"both errors at n={context.n_max} against n={TREND_START}"))
        return TaskResult(table, checks)
