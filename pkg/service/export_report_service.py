import json
import logging
import os
from typing import Dict, List

import pandas as pd

from config import REPORT_FLOAT_FORMAT
from models.report_models import RunSummary

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["task", "check", "module", "passed", "value", "tolerance", "message"]


class ExportReportService:
    """Writes task tables and the run summary as tab-separated text"""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        os.makedirs(self.output_dir, exist_ok=True)

    def _header(self, summary_fields: Dict[str, object]) -> str:
        return "# " + " ".join(f"{key}={value}" for key, value in summary_fields.items()) + "\n"

    def export_table(self, task: str, table: pd.DataFrame, seed: int, M: int, n_max: int) -> str:
        """
        Write one task table.

        Args:
            task: Task name, also the file stem
            table: Rows in their final order
            seed, M, n_max: Recorded in the comment header

        Returns:
            str: Path of the written file
        """
        path = os.path.join(self.output_dir, f"{task}.tsv")
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self._header({"seed": seed, "task": task, "M": M, "n_max": n_max}))
            table.to_csv(handle, sep="\t", index=False, float_format=REPORT_FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Wrote {len(table)} rows to {path}")
        return path

    def export_summary(self, summary: RunSummary) -> List[str]:
        rows = []
        for outcome in summary.outcomes:
            if outcome.status != "ok":
                rows.append((outcome.task, "task_error", outcome.error_module, False, None, None, outcome.error))
            for check in outcome.checks:
                rows.append((outcome.task, check.name, check.module, check.passed, check.value, check.tolerance,
                             check.message))
        table = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
        tsv_path = self.export_table("summary", table, summary.seed, summary.M, summary.n_max)

        json_path = os.path.join(self.output_dir, "summary.json")
        with open(json_path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(summary.model_dump(mode="json"), handle, indent=2, sort_keys=True)
            handle.write("\n")
        return [tsv_path, json_path]
