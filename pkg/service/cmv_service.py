"""
CMV matrices, truncations, the characteristic-polynomial identity and stabilized traces.
"""
import io
import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy.linalg import block_diag

from config import CHAR_POLY_MAX_N, TRACE_STABILITY_TOL
from service.szego_service import SzegoService, VerblunskySeq
from utils.exceptions import ConfigurationError, ContractError, StabilizationError
from utils.singleton import singleton

logger = logging.getLogger(__name__)

BANDWIDTH = 5


@dataclass(frozen=True, eq=False)
class CMVMatrix:
    """m×m truncation of the five-diagonal CMV matrix of a Verblunsky sequence"""

    alpha: VerblunskySeq
    m: int
    matrix: np.ndarray

    @property
    def bandwidth(self) -> int:
        return BANDWIDTH

    def entry(self, row: int, col: int) -> complex:
        return complex(self.matrix[row, col])

    def unitarity_defect(self, margin: int = 3) -> float:
        """max |(C*C - I)ᵢⱼ| over columns whose band lies inside the truncation"""
        interior = self.m - margin
        if interior <= 0:
            return 0.0
        gram = self.matrix.conj().T @ self.matrix
        return float(np.max(np.abs(gram[:interior, :interior] - np.eye(interior))))

    def to_text(self) -> str:
        buffer = io.StringIO()
        for row in self.matrix:
            buffer.write(" ".join(f"{v.real:.16e}{v.imag:+.16e}j" for v in row))
            buffer.write("\n")
        return buffer.getvalue()


def _theta(a: complex) -> np.ndarray:
    rho = np.sqrt(1.0 - abs(a) ** 2)
    return np.array([[np.conj(a), rho], [rho, -a]], dtype=complex)


def _factor(alpha: np.ndarray, size: int, odd: bool) -> np.ndarray:
    """Θ₀ ⊕ Θ₂ ⊕ … (odd=False) or [1] ⊕ Θ₁ ⊕ Θ₃ ⊕ … (odd=True), cut to size"""
    blocks = [np.ones((1, 1), dtype=complex)] if odd else []
    filled = len(blocks)
    j = 1 if odd else 0
    while filled < size:
        if filled + 2 <= size:
            blocks.append(_theta(alpha[j]))
            filled += 2
        else:
            blocks.append(np.array([[np.conj(alpha[j])]], dtype=complex))
            filled += 1
        j += 2
    return block_diag(*blocks)


def _matrix_poly(coeffs: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    result = coeffs[-1] * np.eye(matrix.shape[0], dtype=complex)
    for c in coeffs[-2::-1]:
        result = result @ matrix + c * np.eye(matrix.shape[0])
    return result


def _stabilized(compute: Callable[[int], np.ndarray], m: int, label: str) -> np.ndarray:
    first = np.atleast_1d(compute(m))
    second = np.atleast_1d(compute(m + 1))
    scale = max(1.0, float(np.max(np.abs(first), initial=0.0)))
    drift = float(np.max(np.abs(first - second), initial=0.0))
    if drift > TRACE_STABILITY_TOL * scale:
        raise StabilizationError(f"{label} changed by {drift:.3e} between m={m} and m={m + 1}; try m={2 * m}",
                                 suggested_m=2 * m)
    logger.debug(f"{label} stabilized at m={m} (drift {drift:.1e})")
    return first


@singleton
class CMVService:
    def __init__(self):
        self.szego_service = SzegoService()
        self._free = VerblunskySeq(np.zeros(0))

    def build_cmv(self, alpha: Union[VerblunskySeq, Sequence], m: int) -> CMVMatrix:
        """
        Truncated CMV matrix 𝒞_m = (L·M)[:m, :m].

        Args:
            alpha: Verblunsky coefficients, zero-extended as needed
            m: Truncation order

        Returns:
            CMVMatrix of order m
        """
        alpha = VerblunskySeq.of(alpha)
        if m < 1:
            raise ContractError(f"Truncation order must be >= 1, got {m}", module="cmv")
        size = m + 2
        padded = alpha.padded(max(len(alpha), size + 2)).alpha
        product = _factor(padded, size, odd=False) @ _factor(padded, size, odd=True)
        return CMVMatrix(alpha, m, product[:m, :m])

    def char_poly_check(self, alpha: Union[VerblunskySeq, Sequence], n: int) -> float:
        """max |Δcoeff| between det(zI - 𝒞ₙ) and Φₙ"""
        alpha = VerblunskySeq.of(alpha)
        if not 1 <= n <= CHAR_POLY_MAX_N:
            raise ConfigurationError(f"Characteristic polynomial check runs for 1 <= n <= {CHAR_POLY_MAX_N}, "
                                     f"got {n}", module="cmv")
        alpha = alpha.padded(max(n, len(alpha)))
        descending = np.poly(self.build_cmv(alpha, n).matrix)
        phi = self.szego_service.recurse(alpha, n).phi
        return float(np.max(np.abs(descending[::-1] - phi)))

    def reversed_from_determinant(self, alpha: Union[VerblunskySeq, Sequence], n: int, z: complex) -> complex:
        """φ*ₙ(z) = det(I - z·conj(𝒞ₙ)) / (Aₙ·det(I - z·conj(𝒞₀,ₙ)))"""
        alpha = VerblunskySeq.of(alpha)
        alpha = alpha.padded(max(n, len(alpha)))
        identity = np.eye(n)
        c_n = self.build_cmv(alpha, n).matrix
        c_0 = self.build_cmv(VerblunskySeq(np.zeros(n)), n).matrix
        numerator = np.linalg.det(identity - z * np.conj(c_n))
        denominator = np.linalg.det(identity - z * np.conj(c_0))
        return complex(numerator / (alpha.A[n] * denominator))

    def diagonal_trace_formula(self, alpha: Union[VerblunskySeq, Sequence]) -> complex:
        """tr(𝒞 - 𝒞₀) = ᾱ₀ - Σ_{k≥1} ᾱₖα_{k-1}"""
        a = VerblunskySeq.of(alpha).alpha
        if a.size == 0:
            return 0j
        return complex(np.conj(a[0]) - np.sum(np.conj(a[1:]) * a[:-1]))

    def trace_moments(self, alpha: Union[VerblunskySeq, Sequence], kmax: int) -> np.ndarray:
        """
        t₀ = Σ log ρₖ and tₖ = tr(conj(𝒞)ᵏ - conj(𝒞₀)ᵏ), k = 1..kmax.

        Args:
            alpha: Finitely supported Verblunsky coefficients
            kmax: Largest power

        Returns:
            Complex array t₀..t_kmax
        """
        alpha = VerblunskySeq.of(alpha)
        support = alpha.support
        t0 = float(np.sum(np.log(alpha.rho[:support]))) if support else 0.0

        def compute(size: int) -> np.ndarray:
            c_bar = np.conj(self.build_cmv(alpha, size).matrix)
            c0_bar = np.conj(self.build_cmv(self._free, size).matrix)
            power = np.eye(size, dtype=complex)
            power0 = np.eye(size, dtype=complex)
            out = np.zeros(kmax + 1, dtype=complex)
            out[0] = t0
            for k in range(1, kmax + 1):
                power = power @ c_bar
                power0 = power0 @ c0_bar
                out[k] = np.trace(power) - np.trace(power0)
            return out

        return _stabilized(compute, support + 2 * kmax + 5, "trace moments")

    def trace_P_diff(self, alpha: Union[VerblunskySeq, Sequence], P) -> float:
        """
        Re tr(P(𝒞) - P(𝒞₀)) on a stabilized truncation.

        Args:
            alpha: Finitely supported Verblunsky coefficients
            P: Ascending coefficients of an analytic polynomial

        Returns:
            Real trace difference
        """
        alpha = VerblunskySeq.of(alpha)
        coeffs = np.atleast_1d(np.asarray(P, dtype=complex))
        degree = max(coeffs.size - 1, 0)

        def compute(size: int) -> np.ndarray:
            value = np.trace(_matrix_poly(coeffs, self.build_cmv(alpha, size).matrix)
                             - _matrix_poly(coeffs, self.build_cmv(self._free, size).matrix))
            return np.array([value.real])

        return float(_stabilized(compute, alpha.support + 2 * degree + 5, "trace of P(C) - P(C0)")[0])

    def diagonal_P_diff(self, alpha: Union[VerblunskySeq, Sequence], P) -> np.ndarray:
        """Re((P(𝒞) - P(𝒞₀))eₖ, eₖ) for k inside the stabilized truncation"""
        alpha = VerblunskySeq.of(alpha)
        coeffs = np.atleast_1d(np.asarray(P, dtype=complex))
        size = alpha.support + 2 * max(coeffs.size - 1, 0) + 5
        diff = (_matrix_poly(coeffs, self.build_cmv(alpha, size).matrix)
                - _matrix_poly(coeffs, self.build_cmv(self._free, size).matrix))
        return np.real(np.diag(diff))
