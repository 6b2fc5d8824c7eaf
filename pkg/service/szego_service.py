"""
Verblunsky coefficients, the Szegő recurrence, Levinson-type moment inversion and
Gram-Schmidt extraction from a discretized measure.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from config import EXTRACTION_DRIFT_MAX, LEVINSON_ALPHA_LIMIT, LEVINSON_CAP
from utils.exceptions import ContractError, DomainError, IllConditionedError, VerblunskyIndexError
from utils.singleton import singleton

logger = logging.getLogger(__name__)


def _fsum_complex(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


@dataclass(frozen=True, eq=False)
class VerblunskySeq:
    """Verblunsky coefficients α₀..α_{n-1} with |αₖ| < 1"""

    alpha: np.ndarray
    residual: Optional[float] = None

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=complex))
        if alpha.ndim != 1:
            raise ContractError("Verblunsky coefficients must form a one-dimensional sequence", module="szego")
        bad = np.flatnonzero(np.abs(alpha) >= 1.0)
        if bad.size:
            raise DomainError(f"|alpha_{bad[0]}| = {abs(alpha[bad[0]])} is not below 1", module="szego")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def of(cls, values: Union["VerblunskySeq", Sequence]) -> "VerblunskySeq":
        """Accepts a VerblunskySeq, complex numbers, or (re, im) pairs as in spec files"""
        if isinstance(values, VerblunskySeq):
            return values
        items = list(values)
        if items and all(isinstance(v, (list, tuple)) and len(v) == 2 for v in items):
            items = [complex(float(re), float(im)) for re, im in items]
        return cls(np.asarray(items, dtype=complex))

    def __len__(self) -> int:
        return self.alpha.size

    def __getitem__(self, k: int) -> complex:
        return complex(self.alpha[k])

    @property
    def rho(self) -> np.ndarray:
        modulus = np.abs(self.alpha)
        return np.sqrt((1.0 - modulus) * (1.0 + modulus))

    @property
    def A(self) -> np.ndarray:
        """Partial products A₀ = 1, Aₙ = ∏_{k<n} ρₖ"""
        return np.concatenate(([1.0], np.cumprod(self.rho)))

    @property
    def support(self) -> int:
        nonzero = np.flatnonzero(self.alpha)
        return int(nonzero[-1]) + 1 if nonzero.size else 0

    def padded(self, n: int) -> "VerblunskySeq":
        """First n coefficients, zero-extended when n exceeds the length"""
        values = np.zeros(n, dtype=complex)
        keep = min(n, self.alpha.size)
        values[:keep] = self.alpha[:keep]
        return VerblunskySeq(values, self.residual)


@dataclass(frozen=True, eq=False)
class PolyPair:
    """Monic Φₙ and reversed Φ*ₙ, coefficients in ascending order"""

    phi: np.ndarray
    phi_star: np.ndarray
    n: int

    def evaluate(self, z) -> Tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=complex)
        return npoly.polyval(z, self.phi), npoly.polyval(z, self.phi_star)


def _step(phi: np.ndarray, phi_star: np.ndarray, a: complex) -> Tuple[np.ndarray, np.ndarray]:
    z_phi = np.concatenate(([0j], phi))
    star = np.concatenate((phi_star, [0j]))
    return z_phi - np.conj(a) * star, star - a * z_phi


def _check_depth(alpha: VerblunskySeq, n: int) -> None:
    if n > len(alpha):
        raise VerblunskyIndexError(f"Degree {n} needs {n} Verblunsky coefficients, only {len(alpha)} available")


@singleton
class SzegoService:
    """Szegő recurrence on coefficients and values, moment inversion and extraction from a measure"""

    def recurse(self, alpha: VerblunskySeq, n: int) -> PolyPair:
        """
        Run n steps of Φ_{k+1} = zΦ_k - ᾱ_kΦ*_k, Φ*_{k+1} = Φ*_k - α_k zΦ_k.

        Args:
            alpha: Verblunsky coefficients, at least n of them
            n: Degree

        Returns:
            PolyPair of degree n
        """
        alpha = VerblunskySeq.of(alpha)
        if n < 0:
            raise ContractError(f"Degree must be nonnegative, got {n}", module="szego")
        _check_depth(alpha, n)
        phi = np.ones(1, dtype=complex)
        phi_star = np.ones(1, dtype=complex)
        for k in range(n):
            phi, phi_star = _step(phi, phi_star, alpha.alpha[k])
        return PolyPair(phi, phi_star, n)

    def recurse_all(self, alpha: VerblunskySeq, n_max: int) -> List[PolyPair]:
        """PolyPairs for every degree 0..n_max in one pass"""
        alpha = VerblunskySeq.of(alpha)
        _check_depth(alpha, n_max)
        phi = np.ones(1, dtype=complex)
        phi_star = np.ones(1, dtype=complex)
        pairs = [PolyPair(phi, phi_star, 0)]
        for k in range(n_max):
            phi, phi_star = _step(phi, phi_star, alpha.alpha[k])
            pairs.append(PolyPair(phi, phi_star, k + 1))
        return pairs

    def recurse_values(self, alpha: VerblunskySeq, n_max: int, points) -> Tuple[np.ndarray, np.ndarray]:
        """
        The recurrence on values: rows n = 0..n_max of Φₙ and Φ*ₙ at the given points.
        """
        alpha = VerblunskySeq.of(alpha)
        _check_depth(alpha, n_max)
        z = np.atleast_1d(np.asarray(points, dtype=complex))
        phi = np.empty((n_max + 1, z.size), dtype=complex)
        phi_star = np.empty((n_max + 1, z.size), dtype=complex)
        phi[0] = 1.0
        phi_star[0] = 1.0
        for k in range(n_max):
            a = alpha.alpha[k]
            z_phi = z * phi[k]
            phi[k + 1] = z_phi - np.conj(a) * phi_star[k]
            phi_star[k + 1] = phi_star[k] - a * z_phi
        return phi, phi_star

    def orthonormalize(self, pair: PolyPair, alpha: VerblunskySeq) -> Tuple[np.ndarray, np.ndarray]:
        """φₙ = Φₙ/Aₙ and φ*ₙ = Φ*ₙ/Aₙ"""
        alpha = VerblunskySeq.of(alpha)
        if pair.n > len(alpha) or pair.phi.size != pair.n + 1:
            raise ContractError(f"PolyPair of degree {pair.n} is inconsistent with {len(alpha)} coefficients",
                                module="szego")
        a_n = alpha.A[pair.n]
        return pair.phi / a_n, pair.phi_star / a_n

    def moments_from_verblunsky(self, alpha: VerblunskySeq, K: int) -> np.ndarray:
        """Moments c₀..c_K of the measure with the given α (zero beyond its length)"""
        alpha = VerblunskySeq.of(alpha).padded(max(K, len(alpha)))
        c = np.zeros(K + 1, dtype=complex)
        c[0] = 1.0
        phi = np.ones(1, dtype=complex)
        energy = 1.0
        for k in range(K):
            a = alpha.alpha[k]
            # monic Φ_k has leading coefficient 1, the rest carries the history
            c[k + 1] = a * energy - _fsum_complex(np.conj(phi[:-1]) * c[1:k + 1])
            phi, _ = _step(phi, np.conj(phi[::-1]), a)
            energy *= 1.0 - abs(a) ** 2
        return c

    def verblunsky_from_moments(self, c, n: int) -> VerblunskySeq:
        """
        Levinson recursion αₖ = Σⱼ conj(aⱼ)c_{j+1} / Eₖ on the moments cₖ = ∫t^{-k}dσ.

        Suited to short sequences; measures use verblunsky_from_measure.

        Args:
            c: Moments c₀..c_n with c₀ = 1
            n: Number of coefficients to extract

        Returns:
            VerblunskySeq whose residual is the max reconstructed-moment error
        """
        c = np.asarray(c, dtype=complex)
        if c.size < n + 1:
            raise ContractError(f"Need {n + 1} moments, got {c.size}", module="szego")
        if abs(c[0] - 1.0) > 1e-10:
            raise ContractError(f"Moment c0 = {c[0]} is not 1; measure is not normalized", module="szego")
        if n > LEVINSON_CAP:
            logger.warning(f"Extracting {n} Verblunsky coefficients beyond the stability cap {LEVINSON_CAP}")

        alphas = np.zeros(n, dtype=complex)
        phi = np.ones(1, dtype=complex)
        energy = 1.0
        for k in range(n):
            a = _fsum_complex(np.conj(phi) * c[1:k + 2]) / energy
            if abs(a) >= LEVINSON_ALPHA_LIMIT:
                raise IllConditionedError(f"Levinson recursion lost positivity at index {k}: |alpha| = {abs(a)}",
                                          index=k, module="szego")
            alphas[k] = a
            phi, _ = _step(phi, np.conj(phi[::-1]), a)
            energy *= 1.0 - abs(a) ** 2

        residual = float(np.max(np.abs(self.moments_from_verblunsky(VerblunskySeq(alphas), n) - c[:n + 1]),
                                initial=0.0))
        logger.info(f"Extracted {n} Verblunsky coefficients, moment residual {residual:.3e}")
        return VerblunskySeq(alphas, residual)

    def verblunsky_from_measure(self, points, masses, n: int) -> VerblunskySeq:
        """
        α₀..α_{n-1} of the discrete measure Σ wⱼδ_{zⱼ} on the unit circle.

        Runs φ_{k+1} = (zφₖ - ᾱₖφ*ₖ)/ρₖ on the weighted values √wⱼ·φₖ(zⱼ) with
        ᾱₖ = ⟨zφₖ, φ*ₖ⟩ and φ*ₖ(zⱼ) = zⱼᵏ·conj(φₖ(zⱼ)). Each new vector is
        re-orthogonalized against all earlier ones, so the coefficients stay
        accurate where moment inversion loses positivity.

        Args:
            points: Support points, on the unit circle
            masses: Nonnegative weights summing to 1
            n: Number of coefficients to extract

        Returns:
            VerblunskySeq whose residual is the largest orthonormality defect of
            the recurrence output (norm error or overlap with lower degrees)
            before re-orthogonalization
        """
        z = np.ravel(np.asarray(points, dtype=complex))
        w = np.ravel(np.asarray(masses, dtype=float))
        if z.shape != w.shape:
            raise ContractError(f"{z.size} points but {w.size} masses", module="szego")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ContractError("Masses must be finite and nonnegative", module="szego")
        if np.any(np.abs(np.abs(z) - 1.0) > 1e-12):
            raise DomainError("Extraction points must lie on the unit circle", module="szego")
        total = math.fsum(w.tolist())
        if abs(total - 1.0) > 1e-10:
            raise ContractError(f"Measure is not normalized: total mass {total}", module="szego")
        if n < 0 or n >= np.count_nonzero(w):
            raise ContractError(f"Cannot extract {n} coefficients from {np.count_nonzero(w)} weighted points",
                                module="szego")

        basis = np.empty((n + 1, z.size), dtype=complex)
        phi = np.sqrt(w / total).astype(complex)
        basis[0] = phi
        z_power = np.ones(z.size, dtype=complex)
        alphas = np.zeros(n, dtype=complex)
        drift = 0.0
        for k in range(n):
            star = z_power * np.conj(phi)
            z_phi = z * phi
            a_bar = np.vdot(star, z_phi)
            a = complex(np.conj(a_bar))
            if abs(a) >= LEVINSON_ALPHA_LIMIT:
                raise IllConditionedError(f"Gram-Schmidt extraction lost positivity at index {k}: |alpha| = {abs(a)}",
                                          index=k, module="szego")
            alphas[k] = a
            rho = math.sqrt((1.0 - abs(a)) * (1.0 + abs(a)))
            nxt = (z_phi - a_bar * star) / rho
            previous = basis[:k + 1]
            overlap = np.conj(previous @ np.conj(nxt))
            drift = max(drift, abs(np.vdot(nxt, nxt).real - 1.0), float(np.linalg.norm(overlap)))
            if drift > EXTRACTION_DRIFT_MAX:
                raise IllConditionedError(f"Orthonormality drifted by {drift:.3e} at degree {k + 1}",
                                          index=k, module="szego")
            nxt = nxt - overlap @ previous
            nxt = nxt / np.linalg.norm(nxt)
            basis[k + 1] = nxt
            phi = nxt
            z_power = z_power * z

        logger.info(f"Extracted {n} Verblunsky coefficients from {z.size} points, orthonormality drift {drift:.3e}")
        return VerblunskySeq(alphas, drift)
