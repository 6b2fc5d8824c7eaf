from typing import List, Optional

from pydantic import BaseModel, Field


class SumRuleReport(BaseModel):
    z_direct: float
    z_trace: Optional[float] = None
    discrepancy: Optional[float] = None
    p_coefficients: List[List[float]]
    a0: float
    c1: float
    f_sequence: List[float] = Field(default_factory=list)
    f_target: Optional[float] = None
    f_monotone: Optional[bool] = None
    f_max_increase: Optional[float] = None
    scan_values: List[float] = Field(default_factory=list)
    scan_ratio: Optional[float] = None


class CheckResult(BaseModel):
    """One acceptance check of a task"""
    name: str
    module: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    message: str = ""


class TaskOutcome(BaseModel):
    task: str
    status: str = "ok"
    files: List[str] = Field(default_factory=list)
    checks: List[CheckResult] = Field(default_factory=list)
    error: Optional[str] = None
    error_module: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status == "ok" and all(check.passed for check in self.checks)


class RunSummary(BaseModel):
    spec_path: Optional[str] = None
    seed: int
    M: int
    n_max: int
    tasks: List[str]
    outcomes: List[TaskOutcome]
    exit_code: int
