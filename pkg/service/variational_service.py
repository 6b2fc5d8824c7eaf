"""
The λ-functional on outer polynomials, the sandwich bounds for inf ‖g‖²_σ/λ(g)²,
the classical extremal distance and the phase ν(s) = ∫₀ˢ p₀.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial as npoly
from scipy.linalg import LinAlgError, solve_toeplitz
from scipy.special import xlogy

from config import CANDIDATE_COUNT, CANDIDATE_MAX_DEGREE, JENSEN_SLACK, TREND_START, WITNESS_SLACK
from service.measure_service import MeasureService, PSMeasure, WeightPoly
from service.szego_service import SzegoService
from tools.circle_core import CircleGrid, TrigPoly, quad_mean, weighted_log
from utils.exceptions import ClassViolationError, ContractError, DomainError, IllConditionedError, VariationalViolation
from utils.singleton import singleton

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class OuterPoly:
    """g(z) = scale·∏(1 - z/zⱼ) with every |zⱼ| > 1, so g(0) = scale > 0"""

    roots: Tuple[complex, ...]
    scale: float = 1.0

    def __post_init__(self):
        roots = tuple(complex(z) for z in self.roots)
        inside = [z for z in roots if abs(z) <= 1.0]
        if inside:
            raise DomainError(f"Outer polynomial roots must lie outside the closed disk, got {inside}",
                              module="variational")
        if not self.scale > 0:
            raise ContractError(f"Outer polynomial scale must be positive, got {self.scale}", module="variational")
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def degree(self) -> int:
        return len(self.roots)

    def coefficients(self) -> np.ndarray:
        """Ascending coefficients"""
        if not self.roots:
            return np.array([self.scale + 0j])
        return self.scale * npoly.polyfromroots(self.roots) / np.prod([-z for z in self.roots])

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        value = np.full(z.shape, self.scale, dtype=complex)
        for root in self.roots:
            value = value * (1.0 - z / root)
        return value

    def log_taylor(self, kmax: int) -> np.ndarray:
        """Taylor coefficients c₁..c_kmax of log g: cⱼ = -Σ zᵢ^{-j}/j"""
        j = np.arange(1, kmax + 1)
        out = np.zeros(kmax, dtype=complex)
        for root in self.roots:
            out -= root ** (-j) / j
        return out

    def to_dict(self) -> dict:
        return {"roots": [[z.real, z.imag] for z in self.roots], "scale": self.scale}


@dataclass(frozen=True, eq=False)
class NormalizedWeight:
    """p₀ = C₀p with quad_mean(p₀) = 1"""

    weight: WeightPoly
    C0: float
    fourier: TrigPoly

    def evaluate(self, t) -> np.ndarray:
        return self.C0 * self.weight.evaluate(t)


@dataclass(frozen=True, eq=False)
class SandwichReport:
    lower: float
    upper: float
    candidate_values: np.ndarray
    witness_values: np.ndarray
    best_value: float
    best_label: str
    min_slack: float
    exact: bool = True

    @property
    def witness_tail_min(self) -> float:
        tail = self.witness_values[len(self.witness_values) // 2:]
        return float(np.min(tail)) if tail.size else float("nan")

    @property
    def witness_trend(self) -> float:
        """Witness at the last degree minus the one at TREND_START, NaN for short chains"""
        if len(self.witness_values) <= TREND_START + 1:
            return float("nan")
        return float(self.witness_values[-1] - self.witness_values[TREND_START])

    @property
    def witness_ok(self) -> bool:
        """
        Every witness stays above the lower bound. With exact α the tail must also reach
        the upper bound within WITNESS_SLACK; otherwise the chain must not grow past
        TREND_START.
        """
        above = bool(np.all(self.witness_values >= self.lower * (1.0 - JENSEN_SLACK)))
        if self.exact:
            return above and self.witness_tail_min <= self.upper + WITNESS_SLACK
        trend = self.witness_trend
        return above and (np.isnan(trend) or trend <= JENSEN_SLACK)


@singleton
class VariationalService:
    def __init__(self):
        self.measure_service = MeasureService()
        self.szego_service = SzegoService()

    def normalize_weight(self, W: WeightPoly, grid: Optional[CircleGrid] = None) -> NormalizedWeight:
        fourier = W.laurent_coeffs()
        mean = fourier.coefficient(0).real
        normalized = NormalizedWeight(W, 1.0 / mean, TrigPoly(fourier.coeffs / mean))
        if grid is not None:
            check = quad_mean(normalized.evaluate(grid.nodes), grid).real
            if abs(check - 1.0) > NORMALIZATION_TOLERANCE:
                raise ContractError(f"Normalized weight has mean {check} on the grid", module="variational")
        return normalized

    def lambda_from_samples(self, log_abs: np.ndarray, p0: NormalizedWeight, grid: CircleGrid) -> float:
        """exp(quad_mean(p₀·log|g|)) from grid samples of log|g|"""
        return float(np.exp(quad_mean(weighted_log(p0.evaluate(grid.nodes), log_abs), grid).real))

    def lambda_eval(self, g: OuterPoly, p0: NormalizedWeight, grid: CircleGrid) -> float:
        return self.lambda_from_samples(np.log(np.abs(g.evaluate(grid.nodes))), p0, grid)

    def lambda_series(self, g: OuterPoly, p0: NormalizedWeight) -> float:
        """λ(g) = g(0)·exp(Re Σⱼ āⱼcⱼ), aⱼ the Fourier coefficients of p₀, cⱼ those of log g"""
        degree = p0.fourier.degree
        a = np.array([p0.fourier.coefficient(j) for j in range(1, degree + 1)])
        c = g.log_taylor(degree)
        return float(g.scale * np.exp(np.sum(np.conj(a) * c).real))

    def sigma_norm2(self, sigma: PSMeasure, values_grid: np.ndarray, values_atoms: np.ndarray) -> float:
        """‖g‖²_σ from values of g on the grid and at the atoms"""
        density_part = quad_mean(np.abs(values_grid) ** 2 * sigma.density_samples(), sigma.grid).real
        return density_part + float(np.sum(sigma.atom_masses * np.abs(values_atoms) ** 2))

    def lower_bound(self, sigma: PSMeasure, p0: NormalizedWeight) -> float:
        """exp(quad_mean(p₀·log(σ′/p₀)))"""
        p = p0.evaluate(sigma.grid.nodes)
        integrand = weighted_log(p, sigma.log_density_samples()) - xlogy(p, p)
        return float(np.exp(quad_mean(integrand, sigma.grid).real))

    def upper_bound(self, sigma: PSMeasure, p0: NormalizedWeight) -> float:
        """exp(quad_mean(p₀·log σ′))"""
        p = p0.evaluate(sigma.grid.nodes)
        return float(np.exp(quad_mean(weighted_log(p, sigma.log_density_samples()), sigma.grid).real))

    def random_outer_polys(self, rng: np.random.Generator, count: int = CANDIDATE_COUNT,
                           max_degree: int = CANDIDATE_MAX_DEGREE) -> List[OuterPoly]:
        """Seeded candidates: roots at radius 1 + U(0.05, 2), uniform angles, log-normal scale"""
        candidates = []
        for _ in range(count):
            degree = int(rng.integers(0, max_degree + 1))
            radii = 1.0 + rng.uniform(0.05, 2.0, size=degree)
            angles = rng.uniform(0.0, 2.0 * np.pi, size=degree)
            scale = float(np.exp(rng.normal()))
            candidates.append(OuterPoly(tuple(radii * np.exp(1j * angles)), scale))
        return candidates

    def sandwich_check(self, sigma: PSMeasure, p0: NormalizedWeight, candidates: Sequence[OuterPoly],
                       n_max: int = 0) -> SandwichReport:
        """
        Check L·λ(g)² ≤ ‖g‖²_σ for every candidate and record the witness chain g = φ*ₙ.

        Args:
            sigma: Measure in (pS)
            p0: Normalized weight
            candidates: Outer polynomials
            n_max: Witnesses φ*ₙ for n = 0..n_max

        Returns:
            SandwichReport with candidate values ‖g‖²_σ/λ(g)²
        """
        if not sigma.is_poly_szego:
            raise ClassViolationError(f"{sigma!r} is not in the polynomial Szego class", module="variational")
        grid = sigma.grid
        lower = self.lower_bound(sigma, p0)
        upper = self.upper_bound(sigma, p0)

        values = np.empty(len(candidates))
        offenders = []
        min_slack = np.inf
        for index, g in enumerate(candidates):
            lam = self.lambda_eval(g, p0, grid)
            norm2 = self.sigma_norm2(sigma, g.evaluate(grid.nodes), g.evaluate(sigma.atom_locations))
            values[index] = norm2 / lam ** 2
            slack = (norm2 - lower * lam ** 2) / max(1.0, norm2)
            min_slack = min(min_slack, slack)
            if slack < -JENSEN_SLACK:
                offenders.append({"index": index, "slack": slack, **g.to_dict()})
        if offenders:
            logger.error(f"{len(offenders)} candidates violate the lower bound {lower:.12f}")
            raise VariationalViolation(f"{len(offenders)} candidates violate the Jensen lower bound", offenders)

        alpha = sigma.verblunsky(n_max)
        _, phi_grid = self.szego_service.recurse_values(alpha, n_max, grid.nodes)
        _, phi_atoms = self.szego_service.recurse_values(alpha, n_max, sigma.atom_locations)
        a = alpha.A[: n_max + 1]
        witnesses = np.empty(n_max + 1)
        for n in range(n_max + 1):
            lam = self.lambda_from_samples(np.log(np.abs(phi_grid[n] / a[n])), p0, grid)
            witnesses[n] = self.sigma_norm2(sigma, phi_grid[n] / a[n], phi_atoms[n] / a[n]) / lam ** 2

        all_values = np.concatenate((values, witnesses))
        labels = [f"candidate[{i}]" for i in range(len(candidates))] + [f"phi_star[{n}]" for n in range(n_max + 1)]
        best = int(np.argmin(all_values))
        report = SandwichReport(lower, upper, values, witnesses, float(all_values[best]), labels[best],
                                float(min_slack) if np.isfinite(min_slack) else 0.0,
                                exact=sigma.exact_alpha is not None)
        logger.info(f"Sandwich {lower:.8f} <= {report.best_value:.8f} ({report.best_label}), upper {upper:.8f}")
        return report

    def classical_distance(self, sigma: PSMeasure, n: int) -> float:
        """
        min ‖f‖²_σ over polynomials of degree ≤ n with f(0) = 1.

        The Gram matrix (∫tʲt̄ᵏdσ) is Hermitian Toeplitz in the moments; the
        minimum is 1/(G⁻¹)₀₀.
        """
        if n < 0:
            raise ContractError(f"Degree must be nonnegative, got {n}", module="variational")
        c = self.measure_service.moments(sigma, n)
        e0 = np.zeros(n + 1, dtype=complex)
        e0[0] = 1.0
        try:
            solution = solve_toeplitz((np.conj(c), c), e0)
        except LinAlgError as e:
            raise IllConditionedError(f"Moment normal equations are singular at degree {n}: {e}", index=n,
                                      module="variational") from e
        pivot = solution[0].real
        if not np.isfinite(pivot) or pivot <= 0:
            raise IllConditionedError(f"Moment normal equations lost positivity at degree {n}", index=n,
                                      module="variational")
        return float(1.0 / pivot)

    def distance_table(self, sigma: PSMeasure, n_values: Sequence[int]) -> pd.DataFrame:
        """classical_distance per degree next to ∏ρₖ² and, for σ ∈ (S), exp(quad_mean(log σ′))"""
        top = max(n_values)
        alpha = sigma.verblunsky(top)
        products = alpha.A ** 2
        limit = np.nan
        if sigma.is_szego:
            limit = float(np.exp(quad_mean(sigma.log_density_samples(), sigma.grid).real))
        rows = [(n, self.classical_distance(sigma, n), float(products[n]), limit) for n in n_values]
        return pd.DataFrame(rows, columns=["n", "distance", "rho_product", "szego_limit"])

    def nu_phase(self, p0: NormalizedWeight, s: Union[float, np.ndarray]):
        """ν(s) = ∫₀ˢ p₀(e^{iu}) du, 0 ≤ s ≤ 2π"""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0) or np.any(s_arr > 2.0 * np.pi + 1e-12):
            raise ContractError("nu is defined for 0 <= s <= 2*pi", module="variational")
        value = p0.fourier.arc_integral(s_arr).real
        return float(value) if np.ndim(s) == 0 else value
