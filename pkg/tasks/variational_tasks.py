import logging

import numpy as np
import pandas as pd

from config import JENSEN_SLACK, SUMRULE_TOLERANCE, TREND_START, WITNESS_SLACK
from service.variational_service import VariationalService
from tasks.base_task import BaseTask, TaskContext, TaskResult, degree_schedule
from utils.exceptions import VariationalViolation

logger = logging.getLogger(__name__)

LAMBDA_TOLERANCE = 1e-8
NU_POINTS = 8


class VariationalTask(BaseTask):
    name = "variational"
    module = "variational"

    def __init__(self):
        self.variational_service = VariationalService()

    def compute(self, context: TaskContext) -> TaskResult:
        service = self.variational_service
        sigma = context.sigma
        p0 = service.normalize_weight(sigma.weight, sigma.grid)
        candidates = service.random_outer_polys(context.rng(), context.config.candidates)
        try:
            report = service.sandwich_check(sigma, p0, candidates, context.n_max)
        except VariationalViolation as e:
            table = pd.DataFrame(e.offenders)
            return TaskResult(table, [self.check("jensen_lower_bound", False, min(o["slack"] for o in e.offenders),
                                                 JENSEN_SLACK, str(e))])

        rows = [("lower_bound", 0, report.lower), ("upper_bound", 0, report.upper)]
        rows += [("candidate", i, v) for i, v in enumerate(report.candidate_values)]
        rows += [("witness", n, v) for n, v in enumerate(report.witness_values)]
        s = np.linspace(0.0, 2.0 * np.pi, NU_POINTS + 1)
        rows += [("nu", k, v) for k, v in enumerate(service.nu_phase(p0, s))]
        table = pd.DataFrame(rows, columns=["kind", "index", "value"])

        series_gap = max((abs(service.lambda_eval(g, p0, sigma.grid) - service.lambda_series(g, p0))
                          for g in candidates), default=0.0)
        if report.exact:
            witness = self.check("witness_chain", report.witness_ok, report.witness_tail_min - report.upper,
                                 WITNESS_SLACK, "tail minimum of 1/lambda(phi*_n)^2 minus the upper bound")
        else:
            trend = report.witness_trend
            witness = self.check("witness_chain", report.witness_ok, None if np.isnan(trend) else trend, JENSEN_SLACK,
                                 f"change of 1/lambda(phi*_n)^2 from n={TREND_START} to n={context.n_max}")
        checks = [
            self.check("jensen_lower_bound", report.min_slack >= -JENSEN_SLACK, report.min_slack, JENSEN_SLACK,
                       f"{len(candidates)} candidates"),
            witness,
            self.check("lambda_series", series_gap <= LAMBDA_TOLERANCE, series_gap, LAMBDA_TOLERANCE,
                       "quadrature against the Taylor series"),
        ]
        return TaskResult(table, checks, {"best": report.best_label, "best_value": report.best_value,
                                          "witness_gap": report.witness_tail_min - report.upper})


class DistanceTask(BaseTask):
    name = "distance"
    module = "variational"

    def __init__(self):
        self.variational_service = VariationalService()

    def compute(self, context: TaskContext) -> TaskResult:
        table = self.variational_service.distance_table(context.sigma, degree_schedule(context.n_max))
        distances = table["distance"].to_numpy()
        increase = float(np.max(np.diff(distances), initial=0.0))
        checks = [self.check("nonincreasing", increase <= 1e-12, increase, 1e-12, "distance over n")]
        if context.exact_support is not None:
            gap = float(np.max(np.abs(distances - table["rho_product"].to_numpy())))
            checks.append(self.check("rho_product", gap <= SUMRULE_TOLERANCE, gap, SUMRULE_TOLERANCE,
                                     "distance against prod (1 - |alpha_k|^2)"))
        return TaskResult(table, checks)
