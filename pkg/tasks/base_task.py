import asyncio
import logging
import threading
from abc import ABC, abstractmethod
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from models.models import ExperimentConfig
from models.report_models import CheckResult
from service.asymptotics_service import SzegoSweep
from service.measure_service import PSMeasure
from utils.exceptions import SzegoToolkitError

logger = logging.getLogger(__name__)

SCHEDULE = (0, 1, 2, 5, 10, 20, 50, 100, 150, 200, 300, 500, 1000)


def degree_schedule(n_max: int) -> List[int]:
    """Sparse degrees up to n_max, n_max included"""
    return sorted({n for n in SCHEDULE if n <= n_max} | {n_max})


@dataclass
class TaskResult:
    table: pd.DataFrame
    checks: List[CheckResult] = field(default_factory=list)
    extra: Dict[str, object] = field(default_factory=dict)


class TaskContext:
    """What every task of one run shares: settings, the measure and one sweep"""

    def __init__(self, config: ExperimentConfig, sigma: PSMeasure):
        self.config = config
        self.sigma = sigma
        self._sweep: Optional[SzegoSweep] = None
        self._lock = threading.Lock()

    @property
    def n_max(self) -> int:
        return self.config.n_max

    @property
    def probes(self) -> np.ndarray:
        return np.array([complex(re, im) for re, im in self.config.probes])

    @property
    def exact_support(self) -> Optional[int]:
        """N for measures with exactly known finite α, else None"""
        alpha = self.sigma.exact_alpha
        return alpha.support if alpha is not None else None

    def prepare(self, depth: int) -> None:
        """
        Extract α up to depth once, before any task runs, so that concurrent tasks
        read prefixes of the same sequence. Extraction errors are left for the
        tasks to report.
        """
        if self.sigma.exact_alpha is not None:
            return
        try:
            self.sigma.verblunsky(depth)
        except SzegoToolkitError as e:
            logger.warning(f"Verblunsky extraction to n={depth} failed in {e.module}: {e}")

    def sweep(self, n_top: int) -> SzegoSweep:
        with self._lock:
            if self._sweep is None or self._sweep.n_top < n_top:
                self._sweep = SzegoSweep(self.sigma, n_top)
            return self._sweep

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.seed)


class BaseTask(ABC):
    """Base abstract task class, all experiment tasks should inherit from this class"""

    name: str = ""
    module: str = ""

    async def run(self, context: TaskContext, executor: Optional[Executor] = None) -> TaskResult:
        """
        Run the task's numerical work on the executor

        Args:
            context: Shared run context
            executor: Thread pool, None for the loop default

        Returns:
            TaskResult: Table to export and the acceptance checks
        """
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(executor, self.compute, context)

    def depth(self, config: ExperimentConfig) -> int:
        """Deepest Verblunsky index the task reads"""
        return config.n_max

    @abstractmethod
    def compute(self, context: TaskContext) -> TaskResult:
        pass

    def check(self, name: str, passed: bool, value: Optional[float] = None, tolerance: Optional[float] = None,
              message: str = "") -> CheckResult:
        if value is not None:
            value = float(value)
        return CheckResult(name=name, module=self.module, passed=bool(passed), value=value, tolerance=tolerance,
                           message=message)
