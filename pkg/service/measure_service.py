"""
Weights p, measures σ in the polynomial Szegő class, moments and test families.
"""
import logging
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from config import GRID_M, GRID_OFFSET, LOG_FLOOR, SCAN_LEVELS, SCAN_M_CAP
from tools.circle_core import (CircleGrid, ScanResult, TrigPoly, fourier_coeffs, make_grid, quad_mean, refinement_scan,
                               weighted_log)
from service.szego_service import SzegoService, VerblunskySeq
from utils.exceptions import ClassViolationError, ConfigurationError, ContractError, DomainError, PoleError
from utils.singleton import singleton

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12
RESOLUTION_EXPONENT = 40.0


@dataclass(frozen=True, eq=False)
class WeightPoly:
    """p(t) = scale·∏|t - ζₖ|^{2κₖ} and its analytic extension q"""

    zeros: Tuple[complex, ...]
    multiplicities: Tuple[int, ...]
    scale: float = 1.0

    def __post_init__(self):
        zeros = tuple(complex(z) for z in self.zeros)
        kappas = tuple(int(k) for k in self.multiplicities)
        if len(zeros) != len(kappas):
            raise ContractError("Each weight zero needs exactly one multiplicity", module="measures")
        for z in zeros:
            if abs(abs(z) - 1.0) > UNIT_TOLERANCE:
                raise DomainError(f"Weight zero {z} is not on the unit circle", module="measures")
        if any(k < 1 for k in kappas):
            raise ContractError(f"Multiplicities must be >= 1, got {kappas}", module="measures")
        if len(set(np.round(np.angle(zeros), 12))) != len(zeros):
            raise ContractError("Weight zeros must be distinct", module="measures")
        if not self.scale > 0:
            raise ContractError(f"Weight scale must be positive, got {self.scale}", module="measures")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "multiplicities", kappas)
        object.__setattr__(self, "scale", float(self.scale))

    @classmethod
    def from_angles(cls, angles: Sequence[float], kappas: Optional[Sequence[int]] = None,
                    scale: float = 1.0) -> "WeightPoly":
        kappas = list(kappas) if kappas is not None else [1] * len(angles)
        return cls(tuple(np.exp(1j * np.asarray(angles, dtype=float))), tuple(kappas), scale)

    @property
    def n_prime(self) -> int:
        return sum(self.multiplicities)

    @property
    def C(self) -> complex:
        product = 1.0 + 0j
        for zeta, kappa in zip(self.zeros, self.multiplicities):
            product *= (-zeta) ** kappa
        return 1.0 / product

    @property
    def is_p1(self) -> bool:
        return (len(self.zeros) == 1 and abs(self.zeros[0] - 1.0) < UNIT_TOLERANCE
                and self.multiplicities == (1,) and abs(self.scale - 0.5) < UNIT_TOLERANCE)

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=complex)
        value = np.full(t.shape, self.scale)
        for zeta, kappa in zip(self.zeros, self.multiplicities):
            value = value * np.abs(t - zeta) ** (2 * kappa)
        return value

    def q(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(z == 0):
            raise PoleError("q has a pole of order N' at z = 0", module="measures")
        value = np.full(z.shape, self.scale * self.C, dtype=complex)
        for zeta, kappa in zip(self.zeros, self.multiplicities):
            value = value * (z - zeta) ** (2 * kappa)
        return value / z ** self.n_prime

    def numerator_poly(self) -> np.ndarray:
        """Ascending coefficients of scale·C·∏(z - ζₖ)^{2κₖ}"""
        roots = [zeta for zeta, kappa in zip(self.zeros, self.multiplicities) for _ in range(2 * kappa)]
        return self.scale * self.C * npoly.polyfromroots(roots) if roots else np.array([self.scale + 0j])

    def laurent_coeffs(self) -> TrigPoly:
        """q as a Laurent polynomial of degree N', Hermitian-symmetrized"""
        coeffs = self.numerator_poly()
        coeffs = 0.5 * (coeffs + np.conj(coeffs[::-1]))
        return TrigPoly(coeffs)

    def max_on(self, grid: CircleGrid) -> float:
        return float(np.max(self.evaluate(grid.nodes)))

    def describe(self) -> str:
        parts = [f"{np.angle(z):.6f}^{k}" for z, k in zip(self.zeros, self.multiplicities)]
        return f"scale={self.scale:g} zeros=[{', '.join(parts)}]"


def chord_weight() -> WeightPoly:
    """|t - 1|²"""
    return WeightPoly((1 + 0j,), (1,))


def p1_weight() -> WeightPoly:
    """1 - cos θ = ½|1 - t|²"""
    return WeightPoly((1 + 0j,), (1,), 0.5)


def two_point_weight() -> WeightPoly:
    """|(t - 1)(t + 1)|²"""
    return WeightPoly((1 + 0j, -1 + 0j), (1, 1))


SHIPPED_WEIGHTS: Dict[str, Callable[[], WeightPoly]] = {
    "chord": chord_weight,
    "p1": p1_weight,
    "two_point": two_point_weight,
}


@dataclass(frozen=True)
class Atom:
    location: complex
    mass: float

    @classmethod
    def from_angle(cls, angle: float, mass: float) -> "Atom":
        return cls(complex(np.exp(1j * angle)), float(mass))


def _check_atoms(atoms: Sequence[Atom]) -> Tuple[Atom, ...]:
    atoms = tuple(atoms or ())
    for atom in atoms:
        if not atom.mass > 0:
            raise ContractError(f"Atom mass must be positive, got {atom.mass}", module="measures")
        if abs(abs(atom.location) - 1.0) > UNIT_TOLERANCE:
            raise DomainError(f"Atom {atom.location} is not on the unit circle", module="measures")
    total = sum(atom.mass for atom in atoms)
    if total >= 1.0:
        raise ClassViolationError(f"Atom masses sum to {total}; the a.c. part vanishes and (pS) fails")
    return atoms


class PSMeasure:
    """Probability measure σ′_ac dm + Σμᵢδ_{tᵢ} with its weight and class flags"""

    def __init__(self, kind: str, weight: WeightPoly, grid: CircleGrid,
                 density: Callable[[np.ndarray], np.ndarray],
                 log_density: Callable[[np.ndarray], np.ndarray],
                 atoms: Sequence[Atom] = (), exact_alpha: Optional[VerblunskySeq] = None,
                 is_szego: bool = False, is_poly_szego: bool = False,
                 szego_scan: Optional[ScanResult] = None, poly_szego_scan: Optional[ScanResult] = None,
                 guarded_nodes: int = 0, params: Optional[dict] = None, scan_M: Optional[int] = None):
        self.kind = kind
        self.weight = weight
        self.grid = grid
        self._density = density
        self._log_density = log_density
        self.atoms = tuple(atoms)
        self.exact_alpha = exact_alpha
        self.is_szego = is_szego
        # (S) ⊂ (pS)
        self.is_poly_szego = is_poly_szego or is_szego
        self.szego_scan = szego_scan
        self.poly_szego_scan = poly_szego_scan
        self.guarded_nodes = guarded_nodes
        self.params = params or {}
        # first level of entropy scans; above grid.M when log σ′ needs a finer grid
        self.scan_M = max(scan_M or grid.M, grid.M)
        self._extracted: Optional[VerblunskySeq] = None
        self._entropy_scans: Dict[int, ScanResult] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return (f"PSMeasure(kind={self.kind}, M={self.grid.M}, atoms={len(self.atoms)}, "
                f"S={self.is_szego}, pS={self.is_poly_szego})")

    def density(self, t) -> np.ndarray:
        with np.errstate(divide="ignore", over="ignore"):
            return self._density(np.asarray(t, dtype=complex))

    def log_density(self, t) -> np.ndarray:
        with np.errstate(divide="ignore", over="ignore"):
            return self._log_density(np.asarray(t, dtype=complex))

    def density_samples(self, grid: Optional[CircleGrid] = None) -> np.ndarray:
        return self.density((grid or self.grid).nodes)

    def log_density_samples(self, grid: Optional[CircleGrid] = None) -> np.ndarray:
        return self.log_density((grid or self.grid).nodes)

    @property
    def atom_locations(self) -> np.ndarray:
        return np.array([a.location for a in self.atoms], dtype=complex)

    @property
    def atom_masses(self) -> np.ndarray:
        return np.array([a.mass for a in self.atoms], dtype=float)

    @property
    def singular_mass(self) -> float:
        return float(np.sum(self.atom_masses))

    def in_e_ac(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        if not self.atoms:
            return np.ones(t.shape, dtype=bool)
        return np.all(np.abs(t[:, None] - self.atom_locations[None, :]) > UNIT_TOLERANCE, axis=1)

    def total_mass(self) -> float:
        return quad_mean(self.density_samples(), self.grid).real + self.singular_mass

    def entropy_scan(self, weight: Optional[WeightPoly] = None) -> ScanResult:
        """Refinement scan of ∫p·log σ′_ac dm, starting at scan_M"""
        weight = weight or self.weight
        key = id(weight)
        with self._lock:
            if key not in self._entropy_scans:
                self._entropy_scans[key] = refinement_scan(
                    lambda g: weighted_log(weight.evaluate(g.nodes), self.log_density(g.nodes)),
                    self.scan_M, self.grid.offset)
            return self._entropy_scans[key]

    def verblunsky(self, n: int) -> VerblunskySeq:
        """
        First n Verblunsky coefficients.

        Exact (zero-extended) for Bernstein–Szegő measures. Otherwise extracted
        by Gram-Schmidt on the discretized measure: grid nodes with weights
        σ′(tⱼ)/M plus the atoms. Deeper requests extend the cached extraction.
        """
        if self.exact_alpha is not None:
            return self.exact_alpha.padded(n)
        with self._lock:
            if self._extracted is None or len(self._extracted) < n:
                if 2 * n >= self.grid.M:
                    raise ConfigurationError(f"Extracting {n} Verblunsky coefficients needs M > {2 * n}, "
                                             f"got M={self.grid.M}", module="measures")
                points = np.concatenate((self.grid.nodes, self.atom_locations))
                masses = np.concatenate((self.density_samples() / self.grid.M, self.atom_masses))
                self._extracted = SzegoService().verblunsky_from_measure(points, masses, n)
            return VerblunskySeq(self._extracted.alpha[:n], self._extracted.residual)


@dataclass(frozen=True)
class ClassReport:
    """Numerical verdicts along (S) ⊂ (pS), Erdős, Nevai"""

    szego: bool
    poly_szego: bool
    erdos: bool
    nevai: Optional[bool]
    nevai_tail: Optional[float]
    szego_scan: Optional[ScanResult]
    poly_szego_scan: Optional[ScanResult]


def _resolve_grid(grid: Optional[CircleGrid]) -> CircleGrid:
    return grid if grid is not None else make_grid(GRID_M, GRID_OFFSET)


def _scan_start(phi_star: np.ndarray, grid: CircleGrid) -> int:
    """
    Power-of-two multiple of M at which the trapezoid error of log|Φ*|, about
    r^{-M} for the root r of Φ* closest to the circle, is below e^{-40}.
    """
    nonzero = np.flatnonzero(np.abs(phi_star) > 0)
    if nonzero.size == 0 or nonzero[-1] == 0:
        return grid.M
    closest = float(np.min(np.abs(npoly.polyroots(phi_star[: nonzero[-1] + 1]))))
    if closest <= 1.0:
        return grid.M
    needed = RESOLUTION_EXPONENT / math.log(closest)
    limit = SCAN_M_CAP // 2 ** max(SCAN_LEVELS - 1, 0)
    M = grid.M
    while M < needed and 2 * M <= limit:
        M *= 2
    if M < needed:
        logger.warning(f"Root of Phi* at distance {closest - 1.0:.2e} from the circle needs M ~ {needed:.0f}; "
                       f"entropy scans start at the cap M={M}")
    return M


def _class_scans(weight: WeightPoly, grid: CircleGrid,
                 log_density: Callable[[np.ndarray], np.ndarray]) -> Tuple[ScanResult, ScanResult]:
    szego = refinement_scan(lambda g: log_density(g.nodes), grid.M, grid.offset)
    poly = refinement_scan(lambda g: weighted_log(weight.evaluate(g.nodes), log_density(g.nodes)),
                           grid.M, grid.offset)
    return szego, poly


@singleton
class MeasureService:
    """Constructors for the measure families, moments and class verdicts"""

    def __init__(self):
        self.szego_service = SzegoService()

    def weight_eval(self, W: WeightPoly, t) -> np.ndarray:
        return W.evaluate(t)

    def q_eval(self, W: WeightPoly, z):
        return W.q(z)

    def moments(self, sigma: PSMeasure, K: int) -> np.ndarray:
        """
        Moments cₖ = ∫t^{-k}dσ for k = 0..K.

        Args:
            sigma: Measure
            K: Largest order, below half the grid size

        Returns:
            Complex array c₀..c_K
        """
        if 2 * K >= sigma.grid.M:
            raise ConfigurationError(f"Moment order {K} too large for grid size {sigma.grid.M}", module="measures")
        density = sigma.density_samples()
        coeffs = fourier_coeffs(density, K, sigma.grid)
        c = np.array([coeffs.coefficient(k) for k in range(K + 1)], dtype=complex)
        if sigma.atoms:
            k = np.arange(K + 1)
            c = c + np.sum(sigma.atom_masses[:, None] * sigma.atom_locations[:, None] ** (-k[None, :]), axis=0)
        if abs(c[0] - 1.0) > 1e-10:
            raise ContractError(f"Measure is not normalized: total mass {c[0].real}", module="measures")
        c[0] = 1.0
        return c

    def make_bernstein_szego(self, alpha: Union[VerblunskySeq, Sequence], grid: Optional[CircleGrid] = None,
                             weight: Optional[WeightPoly] = None, atoms: Sequence[Atom] = (),
                             kind: str = "bernstein_szego") -> PSMeasure:
        """
        σ′_ac = A_N²/|Φ*_N|² (= 1/|φ*_N|²), rescaled to 1 - Σμ when atoms are present.

        Entropy scans start on a grid fine enough for the root of Φ*_N closest
        to the circle.
        """
        alpha = VerblunskySeq.of(alpha)
        atoms = _check_atoms(atoms)
        grid = _resolve_grid(grid)
        weight = weight or chord_weight()
        phi_star = self.szego_service.recurse(alpha, len(alpha)).phi_star
        a_n = alpha.A[-1]
        mass = 1.0 - sum(a.mass for a in atoms)

        def density(t):
            return mass * a_n ** 2 / np.abs(npoly.polyval(t, phi_star)) ** 2

        def log_density(t):
            return np.log(mass) + 2.0 * np.log(a_n) - 2.0 * np.log(np.abs(npoly.polyval(t, phi_star)))

        scan_M = _scan_start(phi_star, grid)
        logger.info(f"Bernstein-Szego measure with {len(alpha)} coefficients, {len(atoms)} atoms, M={grid.M}, "
                    f"entropy scans from M={scan_M}")
        return PSMeasure(kind, weight, grid, density, log_density, atoms,
                         exact_alpha=None if atoms else alpha, is_szego=True, is_poly_szego=True,
                         params={"alpha": [[a.real, a.imag] for a in alpha.alpha]}, scan_M=scan_M)

    def make_lebesgue(self, grid: Optional[CircleGrid] = None, weight: Optional[WeightPoly] = None,
                      atoms: Sequence[Atom] = ()) -> PSMeasure:
        return self.make_bernstein_szego([], grid, weight, atoms, kind="lebesgue")

    def make_ps_family(self, W: WeightPoly, beta: Union[float, Sequence[float]], atoms: Sequence[Atom] = (),
                       grid: Optional[CircleGrid] = None) -> PSMeasure:
        """
        σ′ ∝ exp(-Σₖ |t - ζₖ|^{-βₖ}) with class flags from refinement scans.

        The distance to each zero is the chord |t - ζₖ|, not the arc length.
        Near ζₖ the two agree to first order (|t - ζ| = |θ - θₖ|·(1 + O(θ²))),
        so the class thresholds are the same as for the angular form:
        log σ′ ∈ L¹ (class (S)) iff every βₖ < 1, and p·log σ′ ∈ L¹ (class
        (pS)) iff every βₖ < 2κₖ + 1. Unlike |θ - θₖ|, the chord is smooth
        away from ζₖ, including at the antipode where the angular distance
        has a kink.

        Args:
            W: Weight whose zeros carry the singularities
            beta: One exponent per zero (a scalar is broadcast)
            atoms: Optional point masses
            grid: Base grid of the scans

        Returns:
            PSMeasure of kind ps_family
        """
        betas = np.broadcast_to(np.asarray(beta, dtype=float), (len(W.zeros),)).copy()
        if np.any(betas <= 0):
            raise ContractError(f"Exponents beta must be positive, got {betas.tolist()}", module="measures")
        for zeta, kappa, b in zip(W.zeros, W.multiplicities, betas):
            if b >= 2 * kappa + 1:
                raise ClassViolationError(
                    f"beta = {b} >= 2*kappa + 1 = {2 * kappa + 1} at zeta angle {np.angle(zeta):.6f}: "
                    f"p·log σ′ is not integrable, the measure is outside (pS)")
        atoms = _check_atoms(atoms)
        grid = _resolve_grid(grid)
        zeros = np.asarray(W.zeros)

        def singular_sum(t):
            d = np.abs(t[..., None] - zeros)
            with np.errstate(divide="ignore"):
                return np.sum(d ** (-betas), axis=-1)

        template_mean = quad_mean(np.exp(-singular_sum(grid.nodes)), grid).real
        log_c = np.log((1.0 - sum(a.mass for a in atoms)) / template_mean)

        def log_density(t):
            return log_c - singular_sum(t)

        def density(t):
            return np.exp(log_density(t))

        szego, poly = _class_scans(W, grid, log_density)
        logger.info(f"ps_family beta={betas.tolist()}: (S) scan ratio {szego.ratio:.3f} -> {szego.converged}, "
                    f"(pS) scan ratio {poly.ratio:.3f} -> {poly.converged}")
        return PSMeasure("ps_family", W, grid, density, log_density, atoms,
                         is_szego=szego.converged, is_poly_szego=poly.converged,
                         szego_scan=szego, poly_szego_scan=poly, params={"beta": betas.tolist()})

    def make_table_measure(self, angles: Sequence[float], values: Sequence[float], W: WeightPoly,
                           atoms: Sequence[Atom] = (), grid: Optional[CircleGrid] = None) -> PSMeasure:
        """Density from a table, periodic linear interpolation, renormalized"""
        angles = np.mod(np.asarray(angles, dtype=float), 2.0 * np.pi)
        values = np.asarray(values, dtype=float)
        if angles.shape != values.shape or angles.size < 2:
            raise ContractError("Density table needs matching angles and values, at least two rows",
                                module="measures")
        if np.any(values < 0):
            raise ContractError("Density table values must be nonnegative", module="measures")
        atoms = _check_atoms(atoms)
        grid = _resolve_grid(grid)

        def raw(t):
            return np.interp(np.mod(np.angle(t), 2.0 * np.pi), angles, values, period=2.0 * np.pi)

        base = quad_mean(raw(grid.nodes), grid).real
        if base <= 0:
            raise ClassViolationError("Density table vanishes identically")
        factor = (1.0 - sum(a.mass for a in atoms)) / base

        def density(t):
            return factor * raw(t)

        def log_density(t):
            return np.log(np.maximum(density(t), LOG_FLOOR))

        guarded = int(np.count_nonzero(density(grid.nodes) < LOG_FLOOR))
        if guarded:
            logger.warning(f"Density table underflows at {guarded} nodes; log guarded at {LOG_FLOOR}")
        szego, poly = _class_scans(W, grid, log_density)
        return PSMeasure("table", W, grid, density, log_density, atoms,
                         is_szego=szego.converged, is_poly_szego=poly.converged,
                         szego_scan=szego, poly_szego_scan=poly, guarded_nodes=guarded,
                         params={"rows": int(angles.size)})

    def class_report(self, sigma: PSMeasure, alpha: Optional[VerblunskySeq] = None) -> ClassReport:
        log_values = sigma.log_density_samples()
        erdos = bool(np.all(np.isfinite(log_values))) and sigma.guarded_nodes == 0
        nevai = None
        tail = None
        if alpha is not None and len(alpha) >= 8:
            moduli = np.abs(alpha.alpha)
            quarter = len(moduli) // 4
            tail = float(np.max(moduli[-quarter:]))
            nevai = tail <= float(np.max(moduli[:quarter])) or tail < 1e-12
        return ClassReport(sigma.is_szego, sigma.is_poly_szego, erdos, nevai, tail,
                           sigma.szego_scan, sigma.poly_szego_scan)
