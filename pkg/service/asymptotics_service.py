"""
Convergence diagnostics for ξₙ = D̃φ̃*ₙ → 1: pointwise, in L² on the circle and on
arcs, the uniform interior bound, the Rakhmanov functionals, the decay of the
singular part and the two wave-symbol limits.

No rates are asserted; every routine reports numbers and leaves verdicts to the
caller.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import BOUND_GROWTH_MAX, BOUND_RINGS, BOUNDARY_DELTA_NODES
from service.measure_service import PSMeasure
from service.outer_service import OuterEvaluator, OuterService, PhaseCoefficients
from service.szego_service import SzegoService
from tools.circle_core import TrigPoly, angular_distance, arc_mask, quad_mean
from utils.exceptions import ClassViolationError, ContractError, DomainError
from utils.singleton import singleton

logger = logging.getLogger(__name__)

POINTWISE_COLUMNS = ["n", "z_re", "z_im", "xi_error", "classical_error"]
L2_COLUMNS = ["n", "direct", "mass_formula", "gap"]
ARC_COLUMNS = ["arc_start", "arc_end", "arc_measure", "error", "mass", "trace_error", "trace_mass"]
BOUND_COLUMNS = ["n", "statistic", "running_max"]
RAKHMANOV_COLUMNS = ["n", "f_index", "value", "lebesgue"]
WAVE_COLUMNS = ["n", "err_a", "err_b"]


class SzegoSweep:
    """
    Per-measure context shared by the asymptotic diagnostics.

    Holds α up to n_top, |φ*ₙ| on the grid and at the atoms for every n ≤ n_top,
    and caches the ξₙ evaluators and phase coefficients built from them.
    """

    def __init__(self, sigma: PSMeasure, n_top: int):
        if not sigma.is_poly_szego:
            raise ClassViolationError(f"{sigma!r} is not in the polynomial Szego class", module="asymptotics")
        if n_top < 0:
            raise ContractError(f"Sweep depth must be nonnegative, got {n_top}", module="asymptotics")
        self.szego_service = SzegoService()
        self.outer_service = OuterService()
        self.sigma = sigma
        self.grid = sigma.grid
        self.n_top = n_top
        self.alpha = sigma.verblunsky(n_top)
        self._log_a = np.log(self.alpha.A[: n_top + 1])
        _, phi_star = self.szego_service.recurse_values(self.alpha, n_top, self.grid.nodes)
        self._log_phi_star = np.log(np.abs(phi_star)) - self._log_a[:, None]
        if sigma.atoms:
            _, atom_values = self.szego_service.recurse_values(self.alpha, n_top, sigma.atom_locations)
            self._atom_abs2 = np.abs(atom_values) ** 2 / np.exp(2.0 * self._log_a)[:, None]
        else:
            self._atom_abs2 = np.zeros((n_top + 1, 0))
        self.log_density = sigma.log_density_samples()
        self.density = sigma.density_samples()
        self._xi: Dict[int, OuterEvaluator] = {}
        self._psi: Dict[int, PhaseCoefficients] = {}
        self._classical: Optional[OuterEvaluator] = None
        logger.debug(f"SzegoSweep for {sigma!r} up to n={n_top}")

    def _check_n(self, n: int) -> None:
        if not 0 <= n <= self.n_top:
            raise ContractError(f"Degree {n} outside the sweep range 0..{self.n_top}", module="asymptotics")

    def log_phi_star(self, n: int) -> np.ndarray:
        self._check_n(n)
        return self._log_phi_star[n]

    def phi_star_abs2(self, n: int) -> np.ndarray:
        return np.exp(2.0 * self.log_phi_star(n))

    def atom_abs2(self, n: int) -> np.ndarray:
        """|φ*ₙ(tᵢ)|² = |φₙ(tᵢ)|² at the atoms"""
        self._check_n(n)
        return self._atom_abs2[n]

    def xi(self, n: int) -> OuterEvaluator:
        if n not in self._xi:
            self._xi[n] = self.outer_service.xi_function(self.sigma, n, self.log_phi_star(n), self.log_density)
        return self._xi[n]

    def psi(self, n: int) -> PhaseCoefficients:
        if n not in self._psi:
            self._psi[n] = self.outer_service.phase_coefficients(self.sigma.weight, self.log_phi_star(n), self.grid)
        return self._psi[n]

    def phi_star_at(self, n: int, points) -> np.ndarray:
        self._check_n(n)
        _, values = self.szego_service.recurse_values(self.alpha, n, points)
        return values[n] / np.exp(self._log_a[n])

    @property
    def classical(self) -> Optional[OuterEvaluator]:
        if self._classical is None and self.sigma.is_szego:
            self._classical = self.outer_service.szego_function(self.sigma)
        return self._classical


def _sweep(sigma: PSMeasure, n_top: int, sweep: Optional[SzegoSweep]) -> SzegoSweep:
    if sweep is not None and sweep.sigma is sigma and sweep.n_top >= n_top:
        return sweep
    return SzegoSweep(sigma, n_top)


def _check_probes(probes) -> np.ndarray:
    probes = np.atleast_1d(np.asarray(probes, dtype=complex))
    if np.any(np.abs(probes) >= 1.0):
        raise DomainError(f"Probes must lie in the open disk, got {probes[np.abs(probes) >= 1.0].tolist()}",
                          module="asymptotics")
    return probes


def _zero_distance(sigma: PSMeasure, points: np.ndarray) -> np.ndarray:
    zeros = np.asarray(sigma.weight.zeros, dtype=complex)
    if zeros.size == 0:
        return np.full(points.shape, np.inf)
    return np.min(np.abs(points[:, None] - zeros[None, :]), axis=1)


def _check_arc(sigma: PSMeasure, start: float, end: float, eps: float) -> None:
    width = np.mod(end - start, 2.0 * np.pi)
    for zeta in sigma.weight.zeros:
        angle = np.angle(zeta)
        inside = np.mod(angle - start, 2.0 * np.pi) <= width
        margin = 0.0 if inside else float(min(angular_distance(angle, start), angular_distance(angle, end)))
        if margin < eps:
            raise DomainError(f"Arc [{start:.6f}, {end:.6f}] comes within {margin:.3e} of the weight zero at "
                              f"angle {angle:.6f}; margin {eps} required", module="asymptotics")


@dataclass(frozen=True)
class L2Error:
    n: int
    direct: float
    mass_formula: float

    @property
    def gap(self) -> float:
        return abs(self.direct - self.mass_formula)


@dataclass(frozen=True, eq=False)
class BoundScan:
    """max_z |ξₙ(z)|·√(1-|z|) over z ∈ Ω_{2ε} on fixed rings"""

    eps: float
    rings: Tuple[float, ...]
    table: pd.DataFrame
    growth: float

    @property
    def clean(self) -> bool:
        return bool(np.isfinite(self.growth) and self.growth <= BOUND_GROWTH_MAX)

    @property
    def statistic(self) -> float:
        return float(self.table["running_max"].iloc[-1])


@dataclass(frozen=True, eq=False)
class ArcL2Result:
    n: int
    table: pd.DataFrame
    complement_mass: float
    complement_measure: float


@dataclass(frozen=True)
class WaveSymbolResult:
    n: int
    err_a: float
    err_b: float


@dataclass
class ConvergenceReport:
    """Tables of one measure's asymptotic diagnostics, filled task by task"""

    n_values: List[int]
    pointwise: Optional[pd.DataFrame] = None
    l2: Optional[pd.DataFrame] = None
    arcs: Optional[pd.DataFrame] = None
    bound: Optional[pd.DataFrame] = None
    rakhmanov: Optional[pd.DataFrame] = None
    singular: Optional[np.ndarray] = None
    wave: Optional[pd.DataFrame] = None
    notes: Dict[str, str] = field(default_factory=dict)

    def is_valid(self) -> bool:
        """All entries finite and nonnegative (NaN marks a column that does not apply)"""
        checks = [
            (self.pointwise, ["xi_error"]),
            (self.l2, ["direct"]),
            (self.arcs, ["error", "mass"]),
            (self.bound, ["statistic"]),
            (self.wave, ["err_a", "err_b"]),
        ]
        for table, columns in checks:
            if table is None:
                continue
            values = table[columns].to_numpy(dtype=float)
            if not (np.all(np.isfinite(values)) and np.all(values >= 0)):
                return False
        if self.singular is not None and not (np.all(np.isfinite(self.singular)) and np.all(self.singular >= 0)):
            return False
        return True


@singleton
class AsymptoticsService:
    def pointwise_table(self, sigma: PSMeasure, probes: Sequence[complex], n_values: Sequence[int],
                        sweep: Optional[SzegoSweep] = None) -> pd.DataFrame:
        """
        |ξₙ(z) - 1| per degree and point, plus |D(z)φ*ₙ(z) - 1| when σ ∈ (S).

        Args:
            sigma: Measure in (pS)
            probes: Points of the open disk away from the weight zeros
            n_values: Degrees to tabulate
            sweep: Optional shared context

        Returns:
            DataFrame with POINTWISE_COLUMNS, rows ordered by n then point
        """
        probes = _check_probes(probes)
        sweep = _sweep(sigma, max(n_values), sweep)
        classical = sweep.classical
        d_values = classical(probes) if classical is not None else None
        rows = []
        for n in n_values:
            xi_error = np.abs(sweep.xi(n)(probes) - 1.0)
            if d_values is not None:
                classical_error = np.abs(d_values * sweep.phi_star_at(n, probes) - 1.0)
            else:
                classical_error = np.full(probes.size, np.nan)
            for z, e_xi, e_cl in zip(probes, xi_error, classical_error):
                rows.append((n, z.real, z.imag, float(e_xi), float(e_cl)))
        return pd.DataFrame(rows, columns=POINTWISE_COLUMNS)

    def l2_error(self, sigma: PSMeasure, n: int, sweep: Optional[SzegoSweep] = None) -> L2Error:
        """
        ‖ξₙ - 1‖² on the circle two ways.

        direct takes the boundary values of ξₙ from the conjugate-function trace;
        mass_formula is quad_mean(|φ*ₙ|²σ′_ac) - 1, which equals direct whenever
        ξₙ lies in H¹.
        """
        sweep = _sweep(sigma, n, sweep)
        boundary = sweep.xi(n).boundary()
        direct = quad_mean(np.abs(boundary - 1.0) ** 2, sweep.grid).real
        mass = quad_mean(sweep.phi_star_abs2(n) * sweep.density, sweep.grid).real - 1.0
        return L2Error(n, direct, mass)

    def l2_table(self, sigma: PSMeasure, n_values: Sequence[int],
                 sweep: Optional[SzegoSweep] = None) -> pd.DataFrame:
        sweep = _sweep(sigma, max(n_values), sweep)
        rows = []
        for n in n_values:
            result = self.l2_error(sigma, n, sweep)
            rows.append((n, result.direct, result.mass_formula, result.gap))
        return pd.DataFrame(rows, columns=L2_COLUMNS)

    def bound_scan(self, sigma: PSMeasure, eps: float, n_max: int, rings: Sequence[float] = BOUND_RINGS,
                   sweep: Optional[SzegoSweep] = None) -> BoundScan:
        """
        Uniform interior bound statistic for n = 0..n_max.

        Args:
            sigma: Measure in (pS)
            eps: Radius of the excluded disks B_ε[ζₖ]; sample points keep distance 2ε
            n_max: Largest degree
            rings: Radii of the sampling rings
            sweep: Optional shared context

        Returns:
            BoundScan whose growth compares the running max at n_max with n_max/2
        """
        if not eps > 0:
            raise ContractError(f"eps must be positive, got {eps}", module="asymptotics")
        sweep = _sweep(sigma, n_max, sweep)
        masks = []
        for r in rings:
            if not 0.0 < r < 1.0:
                raise DomainError(f"Ring radius must lie in (0, 1), got {r}", module="asymptotics")
            masks.append(_zero_distance(sigma, r * sweep.grid.nodes) > 2.0 * eps)

        statistics = np.zeros(n_max + 1)
        for n in range(n_max + 1):
            xi = sweep.xi(n)
            best = 0.0
            for r, mask in zip(rings, masks):
                if not np.any(mask):
                    continue
                exponent = xi.ring_exponent(r)[mask]
                best = max(best, float(np.max(np.abs(np.exp(xi.prefactor * exponent)))) * np.sqrt(1.0 - r))
            statistics[n] = best
        running = np.maximum.accumulate(statistics)
        half = running[n_max // 2]
        growth = running[-1] / half - 1.0 if half > 0 else 0.0
        table = pd.DataFrame({"n": np.arange(n_max + 1), "statistic": statistics, "running_max": running},
                             columns=BOUND_COLUMNS)
        logger.info(f"Bound statistic {running[-1]:.6f}, growth {growth:.3%} between n={n_max // 2} and n={n_max}")
        return BoundScan(eps, tuple(rings), table, float(growth))

    def arc_l2(self, sigma: PSMeasure, arcs: Sequence[Tuple[float, float]], n: int, eps: float,
               sweep: Optional[SzegoSweep] = None) -> ArcL2Result:
        """
        ∫_I |ξₙ - 1|² dm and ∫_I |ξₙ|² dm on closed arcs away from the weight zeros.

        Arc values use the radial Richardson estimate 2ξ(r₁t) - ξ(r₂t) with
        r₁ = 1 - δ, r₂ = 1 - 2δ, δ = BOUNDARY_DELTA_NODES/M; the trace columns
        repeat both integrals from the boundary trace. The complement of the
        ε-neighbourhoods of the zeros is integrated from the trace only.
        """
        sweep = _sweep(sigma, n, sweep)
        grid = sweep.grid
        xi = sweep.xi(n)
        delta = BOUNDARY_DELTA_NODES / grid.M
        near = xi.ring_exponent(1.0 - delta)
        far = xi.ring_exponent(1.0 - 2.0 * delta)
        trace = xi.boundary()

        rows = []
        for start, end in arcs:
            _check_arc(sigma, start, end, eps)
            mask = arc_mask(grid, start, end)
            estimate = (2.0 * np.exp(xi.prefactor * near[mask]) - np.exp(xi.prefactor * far[mask]))
            measure = float(np.mod(end - start, 2.0 * np.pi) / (2.0 * np.pi))
            rows.append((start, end, measure,
                         float(np.sum(np.abs(estimate - 1.0) ** 2)) / grid.M,
                         float(np.sum(np.abs(estimate) ** 2)) / grid.M,
                         float(np.sum(np.abs(trace[mask] - 1.0) ** 2)) / grid.M,
                         float(np.sum(np.abs(trace[mask]) ** 2)) / grid.M))

        outside = _zero_distance(sigma, grid.nodes) > eps
        complement_mass = float(np.sum(np.abs(trace[outside]) ** 2)) / grid.M
        complement_measure = float(np.count_nonzero(outside)) / grid.M
        return ArcL2Result(n, pd.DataFrame(rows, columns=ARC_COLUMNS), complement_mass, complement_measure)

    def rakhmanov_check(self, sigma: PSMeasure, testfns: Sequence[TrigPoly], n_values: Sequence[int],
                        sweep: Optional[SzegoSweep] = None) -> pd.DataFrame:
        """∫f|φₙ|²dσ (density quadrature plus exact atom sum) against ∫f dm"""
        sweep = _sweep(sigma, max(n_values), sweep)
        nodes = sweep.grid.nodes
        f_grid = [f(nodes) for f in testfns]
        f_atoms = [f(sigma.atom_locations) for f in testfns]
        rows = []
        for n in n_values:
            weight = sweep.phi_star_abs2(n) * sweep.density
            atoms = sigma.atom_masses * sweep.atom_abs2(n)
            for index, f in enumerate(testfns):
                value = quad_mean(f_grid[index] * weight, sweep.grid) + complex(np.sum(f_atoms[index] * atoms))
                rows.append((n, index, value.real, f.coefficient(0).real))
        return pd.DataFrame(rows, columns=RAKHMANOV_COLUMNS)

    def singular_decay(self, sigma: PSMeasure, n_max: int, sweep: Optional[SzegoSweep] = None) -> np.ndarray:
        """Σμᵢ|φₙ(tᵢ)|² for n = 0..n_max; zeros when σ has no atoms"""
        if not sigma.atoms:
            return np.zeros(n_max + 1)
        sweep = _sweep(sigma, n_max, sweep)
        return np.array([float(np.sum(sigma.atom_masses * sweep.atom_abs2(n))) for n in range(n_max + 1)])

    def wave_symbol_point(self, sweep: SzegoSweep, n: int, l: int) -> WaveSymbolResult:
        sigma = sweep.sigma
        grid = sweep.grid
        # (a): on E_ac |ψₙφ*ₙ - 1/D̃|²σ′ = |ξₙ - 1|², at the atoms |ψₙφ*ₙ| = |φ*ₙ|
        density_part = quad_mean(np.abs(sweep.xi(n).boundary() - 1.0) ** 2, grid).real
        atom_part = float(np.sum(sigma.atom_masses * sweep.atom_abs2(n)))
        err_a = float(np.sqrt(max(density_part + atom_part, 0.0)))

        low, high = 2 * n, 2 * (n + l)
        psi_low = sweep.psi(low)
        psi_high = sweep.psi(high)
        diff_grid = np.abs(psi_high.boundary_evaluate(grid.nodes) - psi_low.boundary_evaluate(grid.nodes)) ** 2
        density_part = quad_mean(diff_grid * sweep.phi_star_abs2(low) * sweep.density, grid).real
        atom_part = 0.0
        if sigma.atoms:
            locations = sigma.atom_locations
            diff_atoms = np.abs(psi_high.boundary_evaluate(locations) - psi_low.boundary_evaluate(locations)) ** 2
            atom_part = float(np.sum(sigma.atom_masses * diff_atoms * sweep.atom_abs2(low)))
        err_b = float(np.sqrt(max(density_part + atom_part, 0.0)))
        return WaveSymbolResult(n, err_a, err_b)

    def wave_symbol_check(self, sigma: PSMeasure, n_values: Sequence[int], l: int = 1,
                          sweep: Optional[SzegoSweep] = None) -> pd.DataFrame:
        """
        The two wave-symbol limits per n.

        Args:
            sigma: Measure in (pS)
            n_values: Degrees n
            l: Shift, 2(n + l) must stay nonnegative
            sweep: Optional shared context, deep enough for 2(n + l)

        Returns:
            DataFrame with WAVE_COLUMNS: err_a = ‖ψₙφ*ₙ - χ_{E_ac}/D̃‖_{L²(σ)},
            err_b = ‖(ψ_{2(n+l)} - ψ_{2n})φ*_{2n}‖_{L²(σ)}
        """
        if any(n + l < 0 for n in n_values):
            raise ContractError(f"Shift l={l} makes 2(n+l) negative", module="asymptotics")
        sweep = _sweep(sigma, wave_depth(n_values, l), sweep)
        rows = []
        for n in n_values:
            result = self.wave_symbol_point(sweep, n, l)
            rows.append((result.n, result.err_a, result.err_b))
        return pd.DataFrame(rows, columns=WAVE_COLUMNS)

    def convergence_report(self, sigma: PSMeasure, probes: Sequence[complex], n_values: Sequence[int],
                           eps: float = 0.3, arcs: Sequence[Tuple[float, float]] = (), l: int = 1,
                           testfns: Sequence[TrigPoly] = ()) -> ConvergenceReport:
        """Every diagnostic above on one shared sweep"""
        n_values = sorted(set(int(n) for n in n_values))
        depth = max(max(n_values), 2 * (max(n_values) + max(l, 0)))
        sweep = SzegoSweep(sigma, depth)
        report = ConvergenceReport(list(n_values))
        report.pointwise = self.pointwise_table(sigma, probes, n_values, sweep)
        report.l2 = self.l2_table(sigma, n_values, sweep)
        if arcs:
            report.arcs = pd.concat([self.arc_l2(sigma, arcs, n, eps, sweep).table.assign(n=n) for n in n_values],
                                    ignore_index=True)
        report.bound = self.bound_scan(sigma, eps, max(n_values), sweep=sweep).table
        if testfns:
            report.rakhmanov = self.rakhmanov_check(sigma, testfns, n_values, sweep)
        report.singular = self.singular_decay(sigma, max(n_values), sweep)
        report.wave = self.wave_symbol_check(sigma, n_values, l, sweep)
        return report


def wave_depth(n_values: Sequence[int], l: int) -> int:
    """Deepest degree the wave-symbol limits touch: max of 2n and 2(n + l)"""
    return max(max(2 * (n + l), 2 * n) for n in n_values)
