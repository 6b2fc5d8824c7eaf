"""
Both sides of the sum rule, the entropy functional Z and the trace functional Z̄,
plus the Szegő-ratio sequence log fₙ(0).
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from config import C1_SAFETY, MONOTONE_SLACK, SEMICONTINUITY_SLACK
from models.report_models import SumRuleReport
from service.cmv_service import CMVService
from service.measure_service import PSMeasure, WeightPoly
from service.szego_service import SzegoService, VerblunskySeq
from tools.circle_core import TrigPoly, quad_mean
from utils.exceptions import ClassViolationError
from utils.singleton import singleton

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RieszPolynomial:
    """P(z) = 2Σ_{j≥1}(aⱼ/j)zʲ and A₀ = 2a₀ for p = a₀ + 2Re Σ aⱼtʲ"""

    coeffs: np.ndarray
    A0: float
    fourier: TrigPoly

    def __call__(self, z):
        return npoly.polyval(np.asarray(z, dtype=complex), self.coeffs)

    def derivative(self, z):
        return npoly.polyval(np.asarray(z, dtype=complex), npoly.polyder(self.coeffs))


@dataclass(frozen=True, eq=False)
class FOriginSequence:
    log_f: np.ndarray
    entropy: np.ndarray
    target: Optional[float]
    c1: float
    monotone: bool
    max_increase: float
    semicontinuity_ok: Optional[bool]


@singleton
class SumRuleService:
    def __init__(self):
        self.cmv_service = CMVService()
        self.szego_service = SzegoService()

    def build_P(self, W: WeightPoly) -> RieszPolynomial:
        fourier = W.laurent_coeffs()
        degree = fourier.degree
        coeffs = np.zeros(degree + 1, dtype=complex)
        for j in range(1, degree + 1):
            coeffs[j] = 2.0 * fourier.coefficient(j) / j
        return RieszPolynomial(coeffs, 2.0 * fourier.coefficient(0).real, fourier)

    def z_direct(self, sigma: PSMeasure, W: Optional[WeightPoly] = None) -> float:
        """
        Z = ∫p·log σ′_ac dm, the finest level of a refinement scan.

        Args:
            sigma: Measure in (pS) for the weight
            W: Weight, defaults to the measure's own

        Returns:
            Entropy value
        """
        scan = sigma.entropy_scan(W)
        if not scan.converged:
            raise ClassViolationError(f"Entropy scan diverges for {sigma!r}: values {scan.values}, "
                                      f"ratio {scan.ratio:.3f}", module="sumrules")
        logger.debug(f"Z_direct = {scan.value:.12f} on M={scan.levels[-1]} (differences {scan.differences})")
        return scan.value

    def z_trace(self, alpha: Union[VerblunskySeq, Sequence], W: WeightPoly) -> float:
        """Z̄ = A₀t₀ + Re tr(P(𝒞) - P(𝒞₀))"""
        alpha = VerblunskySeq.of(alpha)
        P = self.build_P(W)
        t0 = self.cmv_service.trace_moments(alpha, 0)[0].real
        return P.A0 * t0 + self.cmv_service.trace_P_diff(alpha, P.coeffs)

    def diagonal_terms(self, alpha: Union[VerblunskySeq, Sequence], W: WeightPoly) -> np.ndarray:
        """Per-index terms A₀·log ρₖ + Re((P(𝒞) - P(𝒞₀))eₖ, eₖ); they sum to Z̄"""
        alpha = VerblunskySeq.of(alpha)
        P = self.build_P(W)
        diagonal = self.cmv_service.diagonal_P_diff(alpha, P.coeffs)
        logs = np.zeros(diagonal.size)
        support = alpha.support
        logs[:support] = np.log(alpha.rho[:support])
        return P.A0 * logs + diagonal

    def f_origin_sequence(self, sigma: PSMeasure, n_max: int, W: Optional[WeightPoly] = None) -> FOriginSequence:
        """
        log fₙ(0) = ½·quad_mean(C₁p·log(1/|φ*ₙ|²)) for n = 0..n_max.

        Args:
            sigma: Measure in (pS)
            n_max: Largest degree
            W: Weight, defaults to the measure's own

        Returns:
            FOriginSequence with the target ½C₁Z and the monotonicity verdict
        """
        weight = W or sigma.weight
        if not sigma.is_poly_szego:
            raise ClassViolationError(f"{sigma!r} is not in the polynomial Szego class", module="sumrules")
        grid = sigma.grid
        p = weight.evaluate(grid.nodes)
        c1 = C1_SAFETY / float(np.max(p))
        alpha = sigma.verblunsky(n_max)
        _, phi_star = self.szego_service.recurse_values(alpha, n_max, grid.nodes)
        log_a = np.log(alpha.A[: n_max + 1])

        entropy = np.empty(n_max + 1)
        for n in range(n_max + 1):
            log_abs = np.log(np.abs(phi_star[n])) - log_a[n]
            entropy[n] = -2.0 * quad_mean(p * log_abs, grid).real
        log_f = 0.5 * c1 * entropy

        increases = np.diff(log_f)
        max_increase = float(np.max(increases, initial=-np.inf))
        monotone = bool(max_increase <= MONOTONE_SLACK)

        target = None
        semicontinuity = None
        scan = sigma.entropy_scan(weight)
        if scan.converged:
            target = 0.5 * c1 * scan.value
            tail = entropy[n_max // 2:]
            semicontinuity = bool(np.max(tail) <= scan.value + SEMICONTINUITY_SLACK)
        if not monotone:
            logger.info(f"log f_n(0) increases by up to {max_increase:.3e} for {sigma!r}")
        return FOriginSequence(log_f, entropy, target, c1, monotone, max_increase, semicontinuity)

    def sum_rule_report(self, sigma: PSMeasure, W: Optional[WeightPoly] = None, n_max: int = 0) -> SumRuleReport:
        weight = W or sigma.weight
        P = self.build_P(weight)
        direct = self.z_direct(sigma, weight)
        trace = None
        discrepancy = None
        if sigma.exact_alpha is not None:
            trace = self.z_trace(sigma.exact_alpha, weight)
            discrepancy = abs(direct - trace)
        sequence = self.f_origin_sequence(sigma, n_max, weight) if n_max > 0 else None
        scan = sigma.entropy_scan(weight)
        return SumRuleReport(
            z_direct=direct,
            z_trace=trace,
            discrepancy=discrepancy,
            p_coefficients=[[c.real, c.imag] for c in P.coeffs],
            a0=P.A0,
            c1=sequence.c1 if sequence else C1_SAFETY / weight.max_on(sigma.grid),
            f_sequence=sequence.log_f.tolist() if sequence else [],
            f_target=sequence.target if sequence else None,
            f_monotone=sequence.monotone if sequence else None,
            f_max_increase=sequence.max_increase if sequence else None,
            scan_values=list(scan.values),
            scan_ratio=None if np.isnan(scan.ratio) else float(scan.ratio),
        )
