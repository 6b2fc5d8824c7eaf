from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from config import CANDIDATE_COUNT, DEFAULT_N_MAX, DEFAULT_SEED, DEFAULT_WORKERS, N_MAX_LIMIT, OUTPUT_DIR
from models.measure_models import MeasureSpec

TASK_NAMES = ("sumrule", "pointwise", "l2", "arcs", "bound", "rakhmanov", "singular", "wave", "variational",
              "distance")


class ExperimentOptions(BaseModel):
    """The experiment section of a spec file; every field has a default"""
    model_config = ConfigDict(extra="forbid")

    tasks: List[str] = Field(default_factory=lambda: ["sumrule"])
    n_max: int = Field(default=DEFAULT_N_MAX, ge=1, le=N_MAX_LIMIT)
    probes: List[Tuple[float, float]] = Field(default_factory=lambda: [(0.0, 0.0), (0.5, 0.0), (0.0, 0.9)])
    arcs: List[Tuple[float, float]] = Field(default_factory=lambda: [(1.0, 2.5), (3.5, 5.0)])
    eps: float = Field(default=0.3, gt=0)
    l_shift: int = 1
    seed: int = DEFAULT_SEED
    candidates: int = Field(default=CANDIDATE_COUNT, ge=0)
    output_dir: str = OUTPUT_DIR
    workers: int = Field(default=DEFAULT_WORKERS, ge=1)

    @field_validator("tasks")
    @classmethod
    def check_tasks(cls, tasks):
        unknown = [t for t in tasks if t not in TASK_NAMES]
        if unknown:
            raise ValueError(f"unknown task(s) {unknown}; choose from {list(TASK_NAMES)}")
        # keep the canonical order, drop duplicates
        return [t for t in TASK_NAMES if t in tasks]

    @field_validator("probes")
    @classmethod
    def check_probes(cls, probes):
        for re, im in probes:
            if re * re + im * im >= 1.0:
                raise ValueError(f"point {[re, im]} is not in the open unit disk")
        return probes


class SpecFile(BaseModel):
    """Top level of a measure-spec file"""
    model_config = ConfigDict(extra="forbid")

    measure: MeasureSpec
    experiment: ExperimentOptions = Field(default_factory=ExperimentOptions)


class ExperimentConfig(ExperimentOptions):
    """Effective settings of one run: spec file contents plus command-line overrides"""

    spec_path: Optional[str] = None
    measure: MeasureSpec

    def echo(self) -> str:
        return (f"spec={self.spec_path} kind={self.measure.density.kind} M={self.measure.grid.M} "
                f"offset={self.measure.grid.offset} n_max={self.n_max} tasks={','.join(self.tasks)} "
                f"seed={self.seed} workers={self.workers} out={self.output_dir}")
