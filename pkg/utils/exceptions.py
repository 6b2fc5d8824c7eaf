from typing import Any, Dict, List, Optional


class SzegoToolkitError(Exception):
    """Base class of every error raised by the toolkit"""

    module = "core"

    def __init__(self, message: str, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module


class ConfigurationError(SzegoToolkitError):
    """Grid sizes, truncation orders or limits that cannot be honoured"""


class SpecValidationError(ConfigurationError):
    """Measure-spec file rejected; carries the offending field paths"""

    module = "cli"

    def __init__(self, message: str, field_paths: Optional[List[str]] = None):
        super().__init__(message)
        self.field_paths = field_paths or []


class ContractError(SzegoToolkitError):
    """Caller data violates an operation precondition"""


class DomainError(SzegoToolkitError):
    """Point or coefficient outside the domain of an operation"""


class PoleError(DomainError):
    """Evaluation at a pole (z = 0 for q, z at a weight zero for the modified kernel)"""


class VerblunskyIndexError(IndexError):
    """Requested degree exceeds the available Verblunsky coefficients"""

    module = "szego"


class ClassViolationError(SzegoToolkitError):
    """Measure fails the (S) or (pS) gate required by an operation"""

    module = "measures"


class IllConditionedError(SzegoToolkitError):
    """Moment recursion or normal equations lost positive definiteness"""

    def __init__(self, message: str, index: Optional[int] = None, module: Optional[str] = None):
        super().__init__(message, module)
        self.index = index


class StabilizationError(SzegoToolkitError):
    """Truncated trace still depends on the truncation order"""

    module = "cmv"

    def __init__(self, message: str, suggested_m: int):
        super().__init__(message)
        self.suggested_m = suggested_m


class ExtractionError(SzegoToolkitError):
    """Phase coefficient fit failed its residual bound"""

    module = "outer"

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class VariationalViolation(SzegoToolkitError):
    """Candidates violating the Jensen lower bound"""

    module = "variational"

    def __init__(self, message: str, offenders: List[Dict[str, Any]]):
        super().__init__(message)
        self.offenders = offenders
