"""
Grids, quadrature, Fourier analysis and Schwarz-kernel evaluation on the unit circle.

Every other module samples functions on a CircleGrid and reduces them with
quad_mean; the spectral helpers (schwarz_coefficients, schwarz_ring,
boundary_trace) share one FFT convention with fourier_coeffs.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from config import (DELTA_MIN, GRID_OFFSET, SCAN_LEVELS, SCAN_M_CAP, SCAN_MAX_LEVELS, SCAN_RATIO_MAX, SCAN_TARGET,
                    SCAN_TOLERANCE)
from utils.exceptions import ConfigurationError, ContractError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CircleGrid:
    """Uniform grid tⱼ = exp(2πi(j + offset)/M) with probability weights 1/M"""

    M: int
    offset: float = GRID_OFFSET
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        theta = 2.0 * np.pi * (np.arange(self.M) + self.offset) / self.M
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nodes", np.exp(1j * theta))

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.M, 1.0 / self.M)

    def refine(self, factor: int = 2) -> "CircleGrid":
        return make_grid(self.M * factor, self.offset)


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Trigonometric polynomial Σ aⱼtʲ stored as a₋N..a_N"""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size % 2 == 0:
            raise ContractError("TrigPoly needs an odd number of coefficients a_-N..a_N")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "TrigPoly":
        """Build from {j: aⱼ}; missing indices are zero"""
        degree = max((abs(int(j)) for j in mapping), default=0)
        coeffs = np.zeros(2 * degree + 1, dtype=complex)
        for j, value in mapping.items():
            coeffs[int(j) + degree] = value
        return cls(coeffs)

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    def coefficient(self, j: int) -> complex:
        if abs(j) > self.degree:
            return 0j
        return complex(self.coeffs[j + self.degree])

    def __call__(self, t):
        t = np.asarray(t, dtype=complex)
        return npoly.polyval(t, self.coeffs) * t ** (-self.degree)

    def is_real(self, tol: float = 1e-13) -> bool:
        return bool(np.max(np.abs(self.coeffs[::-1] - np.conj(self.coeffs)), initial=0.0) <= tol)

    def analytic_part(self) -> np.ndarray:
        """Coefficients a₀..a_N in ascending order"""
        return self.coeffs[self.degree:].copy()

    def arc_integral(self, s):
        """∫₀ˢ f(e^{iu}) du, exact"""
        s = np.asarray(s, dtype=float)
        total = self.coefficient(0) * s
        for j in range(1, self.degree + 1):
            for k in (j, -j):
                total = total + self.coefficient(k) * (np.exp(1j * k * s) - 1.0) / (1j * k)
        return total


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a grid refinement scan of one integral"""

    levels: Tuple[int, ...]
    values: Tuple[float, ...]
    differences: Tuple[float, ...]
    ratio: float
    converged: bool

    @property
    def value(self) -> float:
        return self.values[-1]


def make_grid(M: int, offset: float = GRID_OFFSET) -> CircleGrid:
    """
    Build the uniform offset grid.

    Args:
        M: Point count, a power of two, at least 4
        offset: Fraction of the spacing in [0, 1)

    Returns:
        CircleGrid with nodes in the order j = 0..M-1
    """
    if not isinstance(M, (int, np.integer)) or M < 4 or (int(M) & (int(M) - 1)) != 0:
        raise ConfigurationError(f"Grid size must be a power of two >= 4, got {M}", module="circle_core")
    if not 0.0 <= offset < 1.0:
        raise ConfigurationError(f"Grid offset must lie in [0, 1), got {offset}", module="circle_core")
    return CircleGrid(int(M), float(offset))


def quad_mean(samples, grid: Optional[CircleGrid] = None) -> complex:
    """Compensated (1/M)Σ samples; exact for trig polynomials of degree < M/2"""
    values = np.asarray(samples)
    if values.ndim != 1 or values.size == 0:
        raise ContractError("quad_mean expects a non-empty one-dimensional sample array", module="circle_core")
    if grid is not None and values.size != grid.M:
        raise ContractError(f"Sample count {values.size} does not match grid size {grid.M}", module="circle_core")
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist())) / values.size
    return complex(math.fsum(values.tolist()) / values.size)


def _spectrum(samples, grid: CircleGrid) -> np.ndarray:
    """Phase-corrected DFT: entry k (0 ≤ k < M) is (1/M)Σ f(tⱼ)tⱼ^{-k}"""
    values = np.asarray(samples)
    if values.shape != (grid.M,):
        raise ContractError(f"Sample count {values.size} does not match grid size {grid.M}", module="circle_core")
    k = np.arange(grid.M)
    return np.fft.fft(values) / grid.M * np.exp(-2j * np.pi * k * grid.offset / grid.M)


def fourier_coeffs(samples, K: int, grid: CircleGrid) -> TrigPoly:
    """
    Fourier coefficients aⱼ = quad_mean(f·t^{-j}) for |j| ≤ K.

    Args:
        samples: Function values on the grid
        K: Largest index, below M/2
        grid: Grid the samples live on

    Returns:
        TrigPoly of degree K
    """
    if K < 0 or 2 * K >= grid.M:
        raise ConfigurationError(f"Fourier index {K} too large for grid size {grid.M}", module="circle_core")
    values = np.asarray(samples)
    if values.shape != (grid.M,):
        raise ContractError(f"Sample count {values.size} does not match grid size {grid.M}", module="circle_core")
    raw = np.fft.fft(values) / grid.M
    j = np.arange(-K, K + 1)
    coeffs = raw[j % grid.M] * np.exp(-2j * np.pi * j * grid.offset / grid.M)
    return TrigPoly(coeffs)


def _check_radius(z) -> None:
    limit = 1.0 - DELTA_MIN
    if np.max(np.abs(z), initial=0.0) > limit:
        raise DomainError(f"Evaluation point too close to the circle; limit radius is {limit}", module="circle_core")


def schwarz_eval(logdata, z: complex, grid: CircleGrid) -> complex:
    """Direct quadrature of ((t+z)/(t-z))·logdata(t)"""
    z = complex(z)
    _check_radius(z)
    t = grid.nodes
    return quad_mean((t + z) / (t - z) * np.asarray(logdata), grid)


def schwarz_coefficients(logdata, grid: CircleGrid) -> np.ndarray:
    """Taylor coefficients c₀ = f̂₀, cₖ = 2f̂ₖ (k < M/2) of the Schwarz integral"""
    spectrum = _spectrum(logdata, grid)[: grid.M // 2]
    coeffs = 2.0 * spectrum
    coeffs[0] = spectrum[0]
    return coeffs


def schwarz_series(coeffs: np.ndarray, z):
    """Evaluate a Schwarz series anywhere inside the disk"""
    _check_radius(z)
    return npoly.polyval(np.asarray(z, dtype=complex), coeffs)


def series_ring(coeffs: np.ndarray, grid: CircleGrid, r: float) -> np.ndarray:
    """Values of Σ cₖzᵏ at z = r·tⱼ for every node, one inverse FFT"""
    k = np.arange(coeffs.size)
    padded = np.zeros(grid.M, dtype=complex)
    padded[: coeffs.size] = coeffs * r ** k * np.exp(2j * np.pi * k * grid.offset / grid.M)
    return np.fft.ifft(padded) * grid.M


def schwarz_ring(logdata, grid: CircleGrid, r: float) -> np.ndarray:
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"Ring radius must lie in [0, 1], got {r}", module="circle_core")
    return series_ring(schwarz_coefficients(logdata, grid), grid, r)


def boundary_trace(logdata, grid: CircleGrid) -> np.ndarray:
    """Boundary values f + i·Hf of the Schwarz integral of real data"""
    data = np.asarray(logdata, dtype=float)
    trace = schwarz_ring(data, grid, 1.0)
    return data + 1j * trace.imag


def _ratio(diffs: List[float]) -> float:
    if len(diffs) < 2:
        return float("nan")
    if diffs[-2] > 0:
        return diffs[-1] / diffs[-2]
    return 0.0 if diffs[-1] == 0 else float("inf")


def refinement_scan(sampler: Callable[[CircleGrid], np.ndarray], M: int, offset: float = GRID_OFFSET,
                    levels: int = SCAN_LEVELS, tolerance: float = SCAN_TOLERANCE,
                    ratio_max: float = SCAN_RATIO_MAX, target: float = SCAN_TARGET,
                    max_levels: int = SCAN_MAX_LEVELS, max_M: int = SCAN_M_CAP) -> ScanResult:
    """
    Evaluate quad_mean(sampler(grid)) on M, 2M, 4M, ... and judge convergence.

    At least `levels` grids are evaluated. Doubling continues while the
    Cauchy differences keep shrinking and stops once the last difference is
    below `target`, after two non-shrinking steps, at `max_levels` grids or
    when the next grid would exceed `max_M` nodes. The reported value is the
    finest one.

    Converged when all values are finite and either the last Cauchy difference
    is below tolerance or the differences shrink geometrically with ratio
    below ratio_max.
    """
    sizes: List[int] = []
    values: List[float] = []
    diffs: List[float] = []
    size = M
    while len(sizes) < max(levels, max_levels, 1):
        grid = make_grid(size, offset)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            samples = sampler(grid)
        sizes.append(grid.M)
        values.append(quad_mean(samples, grid).real)
        if len(values) >= 2:
            diffs.append(abs(values[-1] - values[-2]))
        if not np.isfinite(values[-1]):
            break
        if len(sizes) >= levels and diffs:
            if diffs[-1] < target and (len(diffs) < 2 or diffs[-1] <= diffs[-2]):
                break
            if len(diffs) >= 3 and diffs[-1] >= diffs[-2] >= diffs[-3]:
                break
        if 2 * size > max_M:
            if len(sizes) < levels:
                raise ConfigurationError(f"Refinement scan from M={M} needs more than {max_M} nodes",
                                         module="circle_core")
            break
        size *= 2

    finite = bool(np.all(np.isfinite(values)))
    ratio = _ratio(diffs)
    converged = finite and bool(diffs) and (diffs[-1] < tolerance or ratio < ratio_max)
    logger.debug(f"Refinement scan {sizes}: values={values}, ratio={ratio}, converged={converged}")
    return ScanResult(tuple(sizes), tuple(values), tuple(diffs), ratio, converged)


def angular_distance(theta, phi) -> np.ndarray:
    """Distance between angles on the circle, in [0, π]"""
    d = np.mod(np.asarray(theta) - phi, 2.0 * np.pi)
    return np.minimum(d, 2.0 * np.pi - d)


def arc_mask(grid: CircleGrid, start: float, end: float) -> np.ndarray:
    """Nodes on the counter-clockwise closed arc from start to end"""
    width = np.mod(end - start, 2.0 * np.pi)
    if width == 0.0 and end != start:
        width = 2.0 * np.pi
    return np.mod(grid.theta - start, 2.0 * np.pi) <= width


def weighted_log(p: np.ndarray, log_density: np.ndarray) -> np.ndarray:
    """p·log σ′ with 0·log 0 = 0 at exact weight zeros"""
    with np.errstate(invalid="ignore"):
        product = p * log_density
    return np.where(p == 0.0, 0.0, product)
