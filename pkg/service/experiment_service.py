"""
Experiment runner: validates spec files, builds the measure and runs tasks.
"""
import asyncio
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import pandas as pd
import yaml
from pydantic import ValidationError

from models.measure_models import MeasureSpec
from models.models import ExperimentConfig, SpecFile
from models.report_models import RunSummary, TaskOutcome
from service.export_report_service import ExportReportService
from service.measure_service import SHIPPED_WEIGHTS, Atom, MeasureService, PSMeasure, WeightPoly
from tasks import TASKS, TaskContext
from tools.circle_core import make_grid
from utils.exceptions import ConfigurationError, SpecValidationError, SzegoToolkitError
from utils.singleton import singleton

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIGURATION = 2
EXIT_NUMERICAL = 3

SWEEP_PARAMS = ("beta", "n_max", "grid_m")


def _field_paths(error: ValidationError) -> List[str]:
    return [".".join(str(part) for part in item["loc"]) for item in error.errors()]


@singleton
class ExperimentService:
    def __init__(self):
        self.measure_service = MeasureService()
        self._measures: Dict[str, PSMeasure] = {}

    def validate_spec(self, path: str, overrides: Optional[Dict[str, object]] = None) -> ExperimentConfig:
        """
        Parse, default and normalize a spec file

        Args:
            path: YAML (or JSON) spec file
            overrides: Command-line values replacing experiment settings; "grid_m" replaces measure.grid.M

        Returns:
            ExperimentConfig: Effective settings
        """
        if not os.path.isfile(path):
            raise SpecValidationError(f"Spec file {path} does not exist", ["spec"])
        try:
            with open(path, "r", encoding="utf-8") as handle:
                raw = yaml.safe_load(handle) or {}
        except yaml.YAMLError as e:
            raise SpecValidationError(f"Spec file {path} is not valid YAML: {e}", ["spec"]) from e

        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        grid_m = overrides.pop("grid_m", None)
        try:
            spec = SpecFile.model_validate(raw)
            measure = spec.measure
            if grid_m is not None:
                measure = MeasureSpec.model_validate({**measure.model_dump(), "grid": {**measure.grid.model_dump(),
                                                                                     "M": grid_m}})
            options = {**spec.experiment.model_dump(), **overrides}
            config = ExperimentConfig.model_validate({**options, "spec_path": path, "measure": measure.model_dump()})
        except ValidationError as e:
            paths = _field_paths(e)
            raise SpecValidationError(f"Invalid spec {path}: {e}", paths) from e
        logger.info(f"Effective settings: {config.echo()}")
        return config

    def build_weight(self, measure: MeasureSpec) -> WeightPoly:
        spec = measure.weight
        if spec.name is not None:
            weight = SHIPPED_WEIGHTS[spec.name]()
            return weight if spec.scale == 1.0 else WeightPoly(weight.zeros, weight.multiplicities,
                                                                weight.scale * spec.scale)
        return WeightPoly.from_angles([z.angle for z in spec.zeros], [z.kappa for z in spec.zeros], spec.scale)

    def build_measure(self, measure: MeasureSpec) -> PSMeasure:
        """Construct the PSMeasure of a validated spec; identical specs share one instance"""
        key = measure.model_dump_json()
        if key in self._measures:
            return self._measures[key]
        grid = make_grid(measure.grid.M, measure.grid.offset)
        weight = self.build_weight(measure)
        atoms = [Atom.from_angle(a.angle, a.mass) for a in measure.atoms]
        density = measure.density
        if density.kind == "lebesgue":
            sigma = self.measure_service.make_lebesgue(grid, weight, atoms)
        elif density.kind == "bernstein_szego":
            sigma = self.measure_service.make_bernstein_szego(density.alpha, grid, weight, atoms)
        elif density.kind == "ps_family":
            sigma = self.measure_service.make_ps_family(weight, density.beta, atoms, grid)
        else:
            sigma = self.measure_service.make_table_measure(density.angles, density.values, weight, atoms,
                                                             grid)
        self._measures[key] = sigma
        return sigma

    async def _run_tasks(self, context: TaskContext, workers: int) -> List[TaskOutcome]:
        async def run_one(name: str):
            task = TASKS[name]()
            started = time.perf_counter()
            try:
                result = await task.run(context, executor)
                logger.info(f"Task {name} finished in {time.perf_counter() - started:.2f}s")
                return name, result, None
            except SzegoToolkitError as e:
                logger.error(f"Task {name} failed in {e.module}: {e}")
                return name, None, e
            except Exception as e:
                logger.exception(f"Task {name} failed: {e}")
                return name, None, e

        with ThreadPoolExecutor(max_workers=workers) as executor:
            finished = await asyncio.gather(*(run_one(name) for name in context.config.tasks))

        config = context.config
        exporter = ExportReportService(config.output_dir)
        outcomes = []
        for name, result, error in finished:
            if error is not None:
                outcomes.append(TaskOutcome(task=name, status="error", error=str(error),
                                            error_module=getattr(error, "module", TASKS[name].module)))
                continue
            path = exporter.export_table(name, result.table, config.seed, config.measure.grid.M, config.n_max)
            outcomes.append(TaskOutcome(task=name, files=[os.path.basename(path)], checks=result.checks))
        return outcomes

    def run_experiment(self, config: ExperimentConfig) -> RunSummary:
        """
        Run every configured task and write the reports

        Returns:
            RunSummary: Outcomes in task order and the exit code
        """
        logger.info(f"Running {config.echo()}")
        M, n_max = config.measure.grid.M, config.n_max
        try:
            sigma = self.build_measure(config.measure)
        except SzegoToolkitError as e:
            logger.error(f"Measure construction failed in {e.module}: {e}")
            outcome = TaskOutcome(task="measure", status="error", error=str(e), error_module=e.module)
            summary = RunSummary(spec_path=config.spec_path, seed=config.seed, M=M, n_max=n_max, tasks=config.tasks,
                                 outcomes=[outcome], exit_code=self._exit_code([outcome], e))
            ExportReportService(config.output_dir).export_summary(summary)
            return summary

        context = TaskContext(config, sigma)
        context.prepare(max((TASKS[name]().depth(config) for name in config.tasks), default=n_max))
        outcomes = asyncio.run(self._run_tasks(context, config.workers))
        summary = RunSummary(spec_path=config.spec_path, seed=config.seed, M=M, n_max=n_max, tasks=config.tasks,
                             outcomes=outcomes, exit_code=self._exit_code(outcomes))
        ExportReportService(config.output_dir).export_summary(summary)
        failed = [f"{o.task}.{c.name}" for o in outcomes for c in o.checks if not c.passed]
        if failed:
            logger.warning(f"Failed checks: {', '.join(failed)}")
        return summary

    @staticmethod
    def _exit_code(outcomes: Sequence[TaskOutcome], error: Optional[Exception] = None) -> int:
        if isinstance(error, ConfigurationError):
            return EXIT_CONFIGURATION
        if error is not None or any(o.status != "ok" for o in outcomes):
            return EXIT_NUMERICAL
        if any(not o.passed for o in outcomes):
            return EXIT_CHECK_FAILURE
        return EXIT_PASS

    def sweep(self, config: ExperimentConfig, param: str, values: Sequence[str]) -> int:
        """
        One run per parameter value under <out>/<param>=<value>/ plus sweep_summary.tsv

        Returns:
            int: The worst exit code over the runs
        """
        if param not in SWEEP_PARAMS:
            raise ConfigurationError(f"Sweep parameter must be one of {SWEEP_PARAMS}, got {param}", module="cli")
        rows = []
        worst = EXIT_PASS
        for raw in values:
            value = float(raw) if param == "beta" else int(raw)
            data = config.model_dump()
            if param == "beta":
                if config.measure.density.kind != "ps_family":
                    raise ConfigurationError("A beta sweep needs a ps_family density", module="cli")
                data["measure"]["density"]["beta"] = value
            elif param == "n_max":
                data["n_max"] = value
            else:
                data["measure"]["grid"]["M"] = value
            data["output_dir"] = os.path.join(config.output_dir, f"{param}={raw}")
            try:
                run_config = ExperimentConfig.model_validate(data)
            except ValidationError as e:
                raise SpecValidationError(f"Sweep value {param}={raw} is invalid: {e}", _field_paths(e)) from e
            summary = self.run_experiment(run_config)
            worst = max(worst, summary.exit_code)
            passed = sum(1 for o in summary.outcomes for c in o.checks if c.passed)
            total = sum(len(o.checks) for o in summary.outcomes)
            rows.append((param, raw, summary.exit_code, passed, total))
        table = pd.DataFrame(rows, columns=["param", "value", "exit_code", "checks_passed", "checks_total"])
        ExportReportService(config.output_dir).export_table("sweep_summary", table, config.seed,
                                                            config.measure.grid.M, config.n_max)
        return worst
