import logging

import pandas as pd

from config import MONOTONE_SLACK, SUMRULE_TOLERANCE
from service.sumrule_service import SumRuleService
from tasks.base_task import BaseTask, TaskContext, TaskResult

logger = logging.getLogger(__name__)


class SumRuleTask(BaseTask):
    name = "sumrule"
    module = "sumrules"

    def __init__(self):
        self.sumrule_service = SumRuleService()

    def compute(self, context: TaskContext) -> TaskResult:
        report = self.sumrule_service.sum_rule_report(context.sigma, n_max=context.n_max)
        rows = [("z_direct", report.z_direct), ("z_trace", report.z_trace), ("discrepancy", report.discrepancy),
                ("a0", report.a0), ("c1", report.c1), ("f_target", report.f_target),
                ("f_max_increase", report.f_max_increase), ("scan_ratio", report.scan_ratio)]
        rows += [(f"log_f[{n}]", value) for n, value in enumerate(report.f_sequence)]
        table = pd.DataFrame(rows, columns=["quantity", "value"])

        checks = []
        if report.discrepancy is not None:
            checks.append(self.check("sum_rule_equality", report.discrepancy <= SUMRULE_TOLERANCE,
                                     report.discrepancy, SUMRULE_TOLERANCE, "|Z_direct - Z_trace|"))
        checks.append(self.check("monotone_descent", bool(report.f_monotone), report.f_max_increase, MONOTONE_SLACK,
                                 "largest increase of log f_n(0)"))
        support = context.exact_support
        if support is not None and support <= context.n_max and report.f_target is not None:
            gap = max(abs(report.f_sequence[n] - report.f_target) for n in range(support, context.n_max + 1))
            checks.append(self.check("target_reached_at_N", gap <= SUMRULE_TOLERANCE, gap, SUMRULE_TOLERANCE,
                                     f"log f_n(0) = C1*Z/2 for n >= {support}"))
        logger.info(f"Sum rule: Z_direct={report.z_direct:.12f} Z_trace={report.z_trace}")
        return TaskResult(table, checks, {"sum_rule": report.model_dump()})
