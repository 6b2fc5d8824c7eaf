"""
Measure-spec file schema: weight, density, atoms and grid.
"""
import math
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

UNIT_TOLERANCE = 1e-12


class WeightZeroSpec(BaseModel):
    """One zero ζ = e^{iθ} of p with multiplicity κ; given by angle or by [re, im]"""
    model_config = ConfigDict(extra="forbid")

    angle: Optional[float] = None
    zeta: Optional[Tuple[float, float]] = None
    kappa: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_location(self):
        if self.zeta is not None:
            modulus = math.hypot(*self.zeta)
            if abs(modulus - 1.0) > UNIT_TOLERANCE:
                raise ValueError(f"weight zero {list(self.zeta)} is off the unit circle (|zeta| = {modulus})")
            derived = math.atan2(self.zeta[1], self.zeta[0])
            if self.angle is not None and abs(math.remainder(self.angle - derived, 2.0 * math.pi)) > 1e-9:
                raise ValueError("angle and zeta describe different points")
            self.angle = derived
        if self.angle is None:
            raise ValueError("a weight zero needs angle or zeta")
        return self


class WeightSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[Literal["chord", "p1", "two_point"]] = None
    zeros: List[WeightZeroSpec] = Field(default_factory=list)
    scale: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_source(self):
        if self.name is None and not self.zeros:
            self.name = "chord"
        if self.name is not None and self.zeros:
            raise ValueError("give either a shipped weight name or explicit zeros, not both")
        return self


class DensitySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["bernstein_szego", "ps_family", "table", "lebesgue"]
    alpha: Optional[List[Tuple[float, float]]] = None
    beta: Optional[Union[float, List[float]]] = None
    angles: Optional[List[float]] = None
    values: Optional[List[float]] = None

    @field_validator("alpha")
    @classmethod
    def check_alpha(cls, alpha):
        if alpha is not None:
            for k, (re, im) in enumerate(alpha):
                if math.hypot(re, im) >= 1.0:
                    raise ValueError(f"|alpha_{k}| = {math.hypot(re, im)} is not below 1")
        return alpha

    @model_validator(mode="after")
    def check_params(self):
        required = {"bernstein_szego": ["alpha"], "ps_family": ["beta"], "table": ["angles", "values"],
                    "lebesgue": []}[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"density kind {self.kind} needs {', '.join(missing)}")
        if self.kind == "table" and len(self.angles) != len(self.values):
            raise ValueError("table angles and values differ in length")
        return self


class AtomSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    angle: float
    mass: float = Field(gt=0)


class GridSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    M: int = Field(default=4096, ge=4)
    offset: float = Field(default=0.5, ge=0.0, lt=1.0)

    @field_validator("M")
    @classmethod
    def check_power_of_two(cls, M):
        if M & (M - 1):
            raise ValueError(f"grid size {M} is not a power of two")
        return M


class MeasureSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    weight: WeightSpec = Field(default_factory=WeightSpec)
    density: DensitySpec
    atoms: List[AtomSpec] = Field(default_factory=list)
    grid: GridSpec = Field(default_factory=GridSpec)

    @field_validator("atoms")
    @classmethod
    def check_atom_mass(cls, atoms):
        total = sum(a.mass for a in atoms)
        if total >= 1.0:
            raise ValueError(f"atom masses sum to {total}; they must stay below 1")
        return atoms
