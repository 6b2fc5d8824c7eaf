"""
Classical and modified Szegő functions, modified reversed polynomials, the phase
functions ψₙ with their coefficient extraction, and ξₙ = D̃φ̃*ₙ.

All evaluators share one representation: real boundary log-data L on a grid,
a kernel (classical Schwarz, modified K, or the phase kernel K - Schwarz) and a
prefactor. Interior points use the spectral Schwarz series, boundary values
use the conjugate function.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from config import BOUNDARY_DELTA_NODES, EXTRACTION_RESIDUAL_MAX
from tools.circle_core import (CircleGrid, boundary_trace, fourier_coeffs, schwarz_coefficients, schwarz_eval,
                               schwarz_series, series_ring, weighted_log)
from service.measure_service import PSMeasure, WeightPoly
from service.szego_service import SzegoService, VerblunskySeq
from utils.exceptions import ClassViolationError, ContractError, ExtractionError, PoleError
from utils.singleton import singleton

logger = logging.getLogger(__name__)

SCHWARZ = "schwarz"
MODIFIED = "modified"
PHASE = "phase"

POLE_RADIUS = 1e-12


class KernelK:
    """K(t, z) = ((t+z)/(t-z))·q(t)/q(z) for a weight p"""

    def __init__(self, weight: WeightPoly):
        self.weight = weight
        self._q_cache: Dict[complex, complex] = {}

    def q(self, z: complex) -> complex:
        z = complex(z)
        if z not in self._q_cache:
            self._q_cache[z] = complex(self.weight.q(z))
        return self._q_cache[z]

    def __call__(self, t, z: complex) -> np.ndarray:
        t = np.asarray(t, dtype=complex)
        if z == 0:
            return np.zeros(t.shape, dtype=complex)
        # on the circle q(t) = p(t) ≥ 0
        return (t + z) / (t - z) * self.weight.evaluate(t) / self.q(z)


class OuterEvaluator:
    """
    exp(prefactor · ∫ kernel(t, z)·L(t) dm(t)) for real log-data L on a grid.
    """

    def __init__(self, logdata: np.ndarray, grid: CircleGrid, kernel: str = SCHWARZ,
                 weight: Optional[WeightPoly] = None, prefactor: float = 1.0):
        if kernel not in (SCHWARZ, MODIFIED, PHASE):
            raise ContractError(f"Unknown kernel {kernel}", module="outer")
        if kernel != SCHWARZ and weight is None:
            raise ContractError(f"The {kernel} kernel needs a weight", module="outer")
        self.logdata = np.asarray(logdata, dtype=float)
        self.grid = grid
        self.kernel = kernel
        self.weight = weight
        self.prefactor = prefactor
        self._p = weight.evaluate(grid.nodes) if weight is not None else None
        self._plain = schwarz_coefficients(self.logdata, grid) if kernel in (SCHWARZ, PHASE) else None
        self._weighted = (schwarz_coefficients(self._weighted_data(), grid)
                          if kernel in (MODIFIED, PHASE) else None)

    def _weighted_data(self) -> np.ndarray:
        return weighted_log(self._p, self.logdata)

    def _check_point(self, z: np.ndarray) -> None:
        if self.weight is None:
            return
        for zeta in self.weight.zeros:
            if np.any(np.abs(z - zeta) < POLE_RADIUS):
                raise PoleError(f"Evaluation at the weight zero {zeta}", module="outer")

    def _q_over(self, values: np.ndarray, z: np.ndarray) -> np.ndarray:
        """values/q(z), with the K(·, 0) = 0 convention at the origin"""
        out = np.zeros(z.shape, dtype=complex)
        nonzero = z != 0
        out[nonzero] = values[nonzero] / self.weight.q(z[nonzero])
        return out

    def exponent(self, z):
        """∫ kernel(t, z)·L(t) dm(t), spectral evaluation"""
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        self._check_point(z_arr)
        if self.kernel == SCHWARZ:
            out = schwarz_series(self._plain, z_arr)
        else:
            out = self._q_over(schwarz_series(self._weighted, z_arr), z_arr)
            if self.kernel == PHASE:
                out = out - schwarz_series(self._plain, z_arr)
        return out if np.ndim(z) else complex(out[0])

    def taylor_coefficients(self) -> np.ndarray:
        """Taylor coefficients of the Schwarz exponent (classical kernel)"""
        if self.kernel != SCHWARZ:
            raise ContractError("Taylor coefficients are defined for the classical kernel only", module="outer")
        return self._plain.copy()

    def reference_exponent(self, z: complex) -> complex:
        """Same exponent by direct quadrature of the kernel"""
        z = complex(z)
        self._check_point(np.array([z]))
        if self.kernel == SCHWARZ:
            return schwarz_eval(self.logdata, z, self.grid)
        modified = 0j if z == 0 else schwarz_eval(self._weighted_data(), z, self.grid) / complex(self.weight.q(z))
        if self.kernel == MODIFIED:
            return modified
        return modified - schwarz_eval(self.logdata, z, self.grid)

    def __call__(self, z):
        return np.exp(self.prefactor * self.exponent(z))

    def ring_exponent(self, r: float) -> np.ndarray:
        """Exponent at r·tⱼ for every grid node"""
        points = r * self.grid.nodes
        if self.kernel == SCHWARZ:
            return series_ring(self._plain, self.grid, r)
        out = series_ring(self._weighted, self.grid, r) / self.weight.q(points)
        if self.kernel == PHASE:
            out = out - series_ring(self._plain, self.grid, r)
        return out

    def ring(self, r: float) -> np.ndarray:
        return np.exp(self.prefactor * self.ring_exponent(r))

    def boundary_exponent(self) -> np.ndarray:
        """Boundary values: L + iH[L] (Schwarz), L + iH[pL]/p (modified), their difference (phase)"""
        if self.kernel == SCHWARZ:
            return boundary_trace(self.logdata, self.grid)
        conjugate = boundary_trace(self._weighted_data(), self.grid).imag
        positive = self._p > 0
        phase = np.zeros(self.grid.M)
        phase[positive] = conjugate[positive] / self._p[positive]
        if self.kernel == MODIFIED:
            return self.logdata + 1j * phase
        return 1j * (phase - boundary_trace(self.logdata, self.grid).imag)

    def boundary(self) -> np.ndarray:
        return np.exp(self.prefactor * self.boundary_exponent())

    def boundary_modulus(self, t: complex, delta: Optional[float] = None) -> float:
        """Two-radius Richardson estimate of |F(t)| from r = 1 - δ and 1 - 2δ"""
        delta = delta if delta is not None else BOUNDARY_DELTA_NODES / self.grid.M
        near = abs(self(complex((1.0 - delta) * t)))
        far = abs(self(complex((1.0 - 2.0 * delta) * t)))
        return 2.0 * near - far


def _require_szego(sigma: PSMeasure) -> None:
    if not sigma.is_szego:
        raise ClassViolationError(f"{sigma!r} is not in the Szego class; the classical D is undefined",
                                  module="outer")


def _require_poly_szego(sigma: PSMeasure) -> None:
    if not sigma.is_poly_szego:
        raise ClassViolationError(f"{sigma!r} is not in the polynomial Szego class", module="outer")


@dataclass(frozen=True, eq=False)
class PhaseCoefficients:
    """
    Exponent of ψₙ as A₀ + Σₖ Σⱼ A_{j,k}·((z+ζₖ)/(z-ζₖ))ʲ, j = 1..2κₖ.
    """

    zeros: Tuple[complex, ...]
    multiplicities: Tuple[int, ...]
    a0: complex
    coeffs: Tuple[np.ndarray, ...]
    method: str
    residual: float

    def exponent(self, z):
        z = np.asarray(z, dtype=complex)
        total = np.full(z.shape, self.a0, dtype=complex)
        for zeta, block in zip(self.zeros, self.coeffs):
            if np.any(np.abs(z - zeta) < POLE_RADIUS):
                raise PoleError(f"Phase exponent has a pole at {zeta}", module="outer")
            u = (z + zeta) / (z - zeta)
            total = total + npoly.polyval(u, np.concatenate(([0j], block)))
        return total

    def evaluate(self, z):
        return np.exp(self.exponent(z))

    def boundary_evaluate(self, t):
        """ψₙ on the circle, where the exponent is purely imaginary"""
        return np.exp(1j * np.imag(self.exponent(t)))

    def reality_defect(self) -> float:
        """max of |Re A₀|, |Re A_{even}|, |Im A_{odd}|"""
        defects = [abs(self.a0.real)]
        for block in self.coeffs:
            for j, value in enumerate(block, start=1):
                defects.append(abs(value.real) if j % 2 == 0 else abs(value.imag))
        return float(max(defects))

    def block(self, k: int) -> np.ndarray:
        return self.coeffs[k]


def _laurent_remainder(weight: WeightPoly, lhat) -> np.ndarray:
    """
    Coefficients R_m (m = -N'..N') of R = S[qL] - q·S[L], a Laurent polynomial.
    """
    n_prime = weight.n_prime
    qhat = weight.laurent_coeffs()

    def ell(k: int) -> complex:
        return lhat.coefficient(k)

    qL0 = sum(qhat.coefficient(j) * ell(-j) for j in range(-n_prime, n_prime + 1))
    out = np.zeros(2 * n_prime + 1, dtype=complex)
    for m in range(-n_prime, n_prime + 1):
        value = -qhat.coefficient(m) * ell(0)
        for j in range(-n_prime, n_prime + 1):
            qj = qhat.coefficient(j)
            if m >= 1:
                value += 2.0 * qj * ell(m - j)
            if m - j >= 1:
                value -= 2.0 * qj * ell(m - j)
        if m == 0:
            value += qL0
        out[m + n_prime] = value
    return out


def _residue_coefficients(weight: WeightPoly, numerator: np.ndarray) -> Tuple[complex, List[np.ndarray]]:
    """Möbius-basis coefficients of Num/Den for simple zeros (double poles)"""
    den = weight.numerator_poly()
    c0 = numerator[-1] / den[-1] if numerator.size == den.size else 0j
    constant = c0
    blocks = []
    for k, zeta in enumerate(weight.zeros):
        others = [z for l, z in enumerate(weight.zeros) if l != k for _ in range(2)]
        h = weight.scale * weight.C * (npoly.polyfromroots(others) if others else np.ones(1))
        h_val = npoly.polyval(zeta, h)
        h_der = npoly.polyval(zeta, npoly.polyder(h))
        num_val = npoly.polyval(zeta, numerator)
        num_der = npoly.polyval(zeta, npoly.polyder(numerator))
        b = num_val / h_val
        a = (num_der * h_val - num_val * h_der) / h_val ** 2
        a2 = b / (4.0 * zeta ** 2)
        a1 = a / (2.0 * zeta) - b / (2.0 * zeta ** 2)
        constant += -a / (2.0 * zeta) + b / (4.0 * zeta ** 2)
        blocks.append(np.array([a1, a2], dtype=complex))
    return complex(constant), blocks


def _fit_coefficients(weight: WeightPoly, exponent_values: np.ndarray,
                      points: np.ndarray) -> Tuple[complex, List[np.ndarray], float]:
    columns = [np.ones(points.size, dtype=complex)]
    for zeta, kappa in zip(weight.zeros, weight.multiplicities):
        u = (points + zeta) / (points - zeta)
        columns.extend(u ** j for j in range(1, 2 * kappa + 1))
    design = np.column_stack(columns)
    solution, *_ = np.linalg.lstsq(design, exponent_values, rcond=None)
    fitted = design @ solution
    scale = max(1.0, float(np.max(np.abs(exponent_values))))
    residual = float(np.max(np.abs(fitted - exponent_values))) / scale
    blocks = []
    position = 1
    for kappa in weight.multiplicities:
        blocks.append(solution[position:position + 2 * kappa].astype(complex))
        position += 2 * kappa
    return complex(solution[0]), blocks, residual


@dataclass(frozen=True)
class OffsetVerdict:
    """Which last summation index reproduces ψₙ in the p₁ example"""

    error_through_n_minus_1: float
    error_through_n: float
    verdict: str


@singleton
class OuterService:
    """Evaluators for D, D̃, ψₙ, φ̃*ₙ and ξₙ on a measure, and the ψ coefficient extraction"""

    def __init__(self):
        self.szego_service = SzegoService()

    def szego_function(self, sigma: PSMeasure) -> OuterEvaluator:
        _require_szego(sigma)
        return OuterEvaluator(sigma.log_density_samples(), sigma.grid, SCHWARZ, prefactor=0.5)

    def modified_szego_function(self, sigma: PSMeasure) -> OuterEvaluator:
        _require_poly_szego(sigma)
        return OuterEvaluator(sigma.log_density_samples(), sigma.grid, MODIFIED, sigma.weight, prefactor=0.5)

    def log_phi_star_samples(self, sigma: PSMeasure, n: int) -> np.ndarray:
        """log|φ*ₙ| on the measure's grid"""
        alpha = sigma.verblunsky(n)
        phi_star = self.szego_service.recurse(alpha, n).phi_star
        return np.log(np.abs(npoly.polyval(sigma.grid.nodes, phi_star))) - np.log(alpha.A[n])

    def phi_star_eval(self, sigma: PSMeasure, n: int, z):
        alpha = sigma.verblunsky(n)
        return npoly.polyval(np.asarray(z, dtype=complex), self.szego_service.recurse(alpha, n).phi_star) / alpha.A[n]

    def phase_function(self, sigma: PSMeasure, n: int, log_phi_star: Optional[np.ndarray] = None) -> OuterEvaluator:
        _require_poly_szego(sigma)
        logdata = log_phi_star if log_phi_star is not None else self.log_phi_star_samples(sigma, n)
        return OuterEvaluator(logdata, sigma.grid, PHASE, sigma.weight, prefactor=1.0)

    def xi_function(self, sigma: PSMeasure, n: int, log_phi_star: Optional[np.ndarray] = None,
                    log_density: Optional[np.ndarray] = None) -> OuterEvaluator:
        _require_poly_szego(sigma)
        lphi = log_phi_star if log_phi_star is not None else self.log_phi_star_samples(sigma, n)
        ldens = log_density if log_density is not None else sigma.log_density_samples()
        return OuterEvaluator(2.0 * lphi + ldens, sigma.grid, MODIFIED, sigma.weight, prefactor=0.5)

    def d_eval(self, sigma: PSMeasure, z):
        """Classical Szegő function D(z) = exp(½∫((t+z)/(t-z))·log σ′ dm)"""
        return self.szego_function(sigma)(z)

    def dtilde_eval(self, sigma: PSMeasure, z):
        """Modified Szegő function D̃(z) = exp(½∫K(t, z)·log σ′ dm)"""
        return self.modified_szego_function(sigma)(z)

    def psi_eval(self, sigma: PSMeasure, n: int, z):
        return self.phase_function(sigma, n)(z)

    def phitilde_star_eval(self, sigma: PSMeasure, n: int, z):
        """φ̃*ₙ = ψₙ·φ*ₙ"""
        return self.psi_eval(sigma, n, z) * self.phi_star_eval(sigma, n, z)

    def xi_eval(self, sigma: PSMeasure, n: int, z):
        return self.xi_function(sigma, n)(z)

    def log_szego_taylor(self, sigma: PSMeasure, kmax: int) -> np.ndarray:
        """Taylor coefficients of log D at the origin, orders 0..kmax"""
        return 0.5 * self.szego_function(sigma).taylor_coefficients()[: kmax + 1]

    def phase_coefficients(self, weight: WeightPoly, log_phi_star: np.ndarray, grid: CircleGrid,
                           method: str = "auto") -> PhaseCoefficients:
        """
        Coefficients of the ψ exponent for log-data log|φ*ₙ| on a grid.

        Args:
            weight: Weight p
            log_phi_star: log|φ*ₙ| on the grid
            grid: Grid of the samples
            method: "residue" (simple zeros only), "lstsq", or "auto"

        Returns:
            PhaseCoefficients with the method used and its residual
        """
        simple = all(k == 1 for k in weight.multiplicities)
        if method == "auto":
            method = "residue" if simple else "lstsq"
        if method == "residue" and not simple:
            raise ContractError("Residue extraction needs simple weight zeros", module="outer")

        if method == "residue":
            lhat = fourier_coeffs(log_phi_star, 2 * weight.n_prime, grid)
            numerator = _laurent_remainder(weight, lhat)
            a0, blocks = _residue_coefficients(weight, numerator)
            residual = 0.0
        elif method == "lstsq":
            evaluator = OuterEvaluator(log_phi_star, grid, PHASE, weight)
            count = 4 * (1 + 2 * weight.n_prime)
            points = 0.5 * np.exp(2j * np.pi * (np.arange(count) + 0.25) / count)
            a0, blocks, residual = _fit_coefficients(weight, evaluator.exponent(points), points)
            if residual > EXTRACTION_RESIDUAL_MAX:
                raise ExtractionError(f"Phase coefficient fit residual {residual:.3e} exceeds "
                                      f"{EXTRACTION_RESIDUAL_MAX:.1e}", residual)
        else:
            raise ContractError(f"Unknown extraction method {method}", module="outer")

        return PhaseCoefficients(weight.zeros, weight.multiplicities, a0, tuple(blocks), method, residual)

    def coeff_extract(self, sigma: PSMeasure, n: int, method: str = "auto") -> PhaseCoefficients:
        _require_poly_szego(sigma)
        coefficients = self.phase_coefficients(sigma.weight, self.log_phi_star_samples(sigma, n), sigma.grid, method)
        logger.debug(f"Phase coefficients n={n} via {coefficients.method}: "
                     f"reality defect {coefficients.reality_defect():.2e}")
        return coefficients

    def p1_coefficients(self, alpha: Union[VerblunskySeq, Sequence], last: int) -> Tuple[float, complex]:
        """
        (A, B) of the p₁ example summed through index `last`:
        A = Σ_{k≤last} log ρₖ, B = (i/4)·Im(α₀ - Σ_{1≤k≤last} ᾱ_{k-1}αₖ).
        """
        alpha = VerblunskySeq.of(alpha)
        if last < 0:
            return 0.0, 0j
        a = alpha.padded(max(len(alpha), last + 1))
        A = float(np.sum(np.log(a.rho[: last + 1])))
        values = a.alpha[: last + 1]
        drift = values[0] - np.sum(np.conj(values[:-1]) * values[1:])
        return A, 0.25j * float(np.imag(drift))

    def psi_p1_closed_form(self, alpha: Union[VerblunskySeq, Sequence], n: int, z,
                           weight: Optional[WeightPoly] = None):
        """ψₙ for p₁ = 1 - cos θ: exp(A·w + B·(w² - 1)), w = (1+z)/(1-z), sums through k = n-1"""
        if weight is not None and not weight.is_p1:
            raise ContractError(f"Closed form holds for p1 only, got {weight.describe()}", module="outer")
        A, B = self.p1_coefficients(alpha, n - 1)
        z = np.asarray(z, dtype=complex)
        w = (1.0 + z) / (1.0 - z)
        return np.exp(A * w + B * (w ** 2 - 1.0))

    def p1_mobius_coefficients(self, A: float, B: complex) -> Tuple[complex, complex, complex]:
        """(A₀, A₁, A₂) in the basis u = (z+1)/(z-1) = -(1+z)/(1-z)"""
        return -B, complex(-A), B

    def resolve_p1_offset(self, sigma: PSMeasure, n_values: Sequence[int],
                          probes: Sequence[complex]) -> OffsetVerdict:
        if not sigma.weight.is_p1:
            raise ContractError("Offset resolution needs a measure carrying the p1 weight", module="outer")
        n_top = max(n_values)
        alpha = sigma.verblunsky(n_top + 1)
        probes = np.asarray(probes, dtype=complex)
        w = (1.0 + probes) / (1.0 - probes)
        errors = {"n-1": 0.0, "n": 0.0}
        for n in n_values:
            reference = self.psi_eval(sigma, n, probes)
            for label, last in (("n-1", n - 1), ("n", n)):
                A, B = self.p1_coefficients(alpha, last)
                closed = np.exp(A * w + B * (w ** 2 - 1.0))
                errors[label] = max(errors[label], float(np.max(np.abs(closed / reference - 1.0))))
        verdict = "n-1" if errors["n-1"] <= errors["n"] else "n"
        logger.info(f"p1 offset: through n-1 err {errors['n-1']:.2e}, through n err {errors['n']:.2e} -> {verdict}")
        return OffsetVerdict(errors["n-1"], errors["n"], verdict)
