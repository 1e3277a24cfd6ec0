"""Radial potentials of the separated Dirac operator.

In the tortoise coordinate the separated operator reads
``H = -i Gamma^1 d/dx + V_m(x)`` with

    V_m(x) = k gamma^0 gamma^2 A(x) - m gamma^0 B(x),   k = s + 1/2,

``A = sqrt(F)/r`` and ``B = sqrt(F)``.  Near the conformal boundary ``B``
carries the Coulomb-like singularity ``-l/x``; the regular remainder is
collected in ``V_{lam,m}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError
from .geometry import BlackHoleParams, TortoiseMap
from .spinor_algebra import GAMMA, GAMMA1_BIG

__all__ = ["ModeParams", "PotentialEvaluator", "SUB", "SUPER"]

SUB = "sub"
SUPER = "super"

_G0G2 = (GAMMA[0] @ GAMMA[2]).real.copy()
_G0 = GAMMA[0]
_G1 = GAMMA[1]
_G1G2 = GAMMA[1] @ GAMMA[2]


@dataclass(frozen=True)
class ModeParams:
    """Angular index and mass of the separated mode.

    Parameters
    ----------
    s : float
        Angular index; ``2s`` must be a non-negative integer.  The coupling
        constant is ``k = s + 1/2``.
    m : float
        Field mass, positive.
    """

    s: float
    m: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0):
            raise InvalidParameterError(f"mass must be positive, got {self.m!r}")
        if not (self.s >= 0 and float(2 * self.s).is_integer()):
            raise InvalidParameterError(f"2s must be a non-negative integer, got s={self.s!r}")

    @property
    def k(self) -> float:
        return self.s + 0.5

    def regime(self, l: float) -> str:
        """``"sub"`` when ``2ml < 1``, otherwise ``"super"``."""
        return SUB if 2.0 * self.m * l < 1.0 else SUPER


class PotentialEvaluator:
    """Evaluate ``A``, ``B``, ``V_m`` and ``V_{lam,m}`` on the tortoise line.

    Close to the boundary (``|x| < x_series``) the potentials come from their
    Laurent expansions in ``x``, which avoids both the loss of precision in
    ``B + l/x`` and the overflow of ``r(x)``.

    Parameters
    ----------
    params : BlackHoleParams
    mode : ModeParams
    tmap : TortoiseMap, optional
        Reused when given, otherwise built.
    """

    def __init__(self, params: BlackHoleParams, mode: ModeParams, tmap: TortoiseMap | None = None):
        self.params = params
        self.mode = mode
        self.map = tmap if tmap is not None else TortoiseMap(params)
        self.l = params.l
        self.kappa = params.kappa
        self.k = mode.k
        self.m = mode.m
        self.ml = mode.m * params.l
        self.regime = mode.regime(params.l)
        self.free = False
        M, l = params.M, params.l
        self.x_series = 1e-2 * l / max(1.0, M / l)
        # coefficients of B + l/x and A - 1/l in powers x^1..x^6
        self._cb = (
            -1.0 / (6 * l),
            -M / (2 * l**3),
            -7.0 / (360 * l**3),
            -M / (4 * l**5),
            -9 * M * M / (28 * l**7) - 31.0 / (15120 * l**5),
            -71 * M / (720 * l**7),
        )
        self._ca = (
            0.0,
            1.0 / (2 * l**3),
            M / l**5,
            5.0 / (24 * l**5),
            M / l**7,
            M * M / l**9 + 61.0 / (720 * l**7),
        )

    def switched_off(self) -> "PotentialEvaluator":
        """Copy with ``A = B = 0``, for testing against the free equation."""
        ev = PotentialEvaluator.__new__(PotentialEvaluator)
        ev.__dict__.update(self.__dict__)
        ev.free = True
        return ev

    # scalar fast path used inside ODE right-hand sides

    def ab(self, x: float) -> tuple[float, float]:
        """``(A(x), B(x))`` for a scalar ``x < 0``."""
        if self.free:
            return 0.0, 0.0
        if -x < self.x_series:
            a1 = _horner(self._ca, x)
            b1 = _horner(self._cb, x)
            return 1.0 / self.l + a1, -self.l / x + b1
        u = self.map.log_offset(x)
        d = math.exp(u)
        a = self.params.r_sads
        r = a + d
        F = d * (r * r + a * r + a * a + self.l * self.l) / (self.l * self.l * r)
        B = math.sqrt(F)
        return B / r, B

    def ab_regular(self, x: float) -> tuple[float, float]:
        """``(A(x), B(x) + l/x)`` for a scalar ``x < 0``."""
        if self.free:
            return 0.0, 0.0
        if -x < self.x_series:
            return 1.0 / self.l + _horner(self._ca, x), _horner(self._cb, x)
        A, B = self.ab(x)
        return A, B + self.l / x

    # vectorised evaluation

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(~(x < 0)):
            raise DomainError("potentials are defined for x < 0")
        return x

    def _ab_vec(self, x: np.ndarray):
        # returns A, B and B + l/x, each computed without cancellation
        A = np.empty_like(x)
        B = np.empty_like(x)
        Bp = np.empty_like(x)
        near = -x < self.x_series
        xs = x[near]
        A[near] = 1.0 / self.l + _horner(self._ca, xs)
        Bp[near] = _horner(self._cb, xs)
        B[near] = -self.l / xs + Bp[near]
        far = ~near
        if np.any(far):
            u = self.map.log_offset_vec(x[far])
            d = np.exp(u)
            a = self.params.r_sads
            r = a + d
            F = d * (r * r + a * r + a * a + self.l * self.l) / (self.l * self.l * r)
            Bf = np.sqrt(F)
            A[far] = Bf / r
            B[far] = Bf
            Bp[far] = Bf + self.l / x[far]
        if self.free:
            A[:] = 0.0
            B[:] = 0.0
            Bp[:] = 0.0
        return A, B, Bp

    def potential_A(self, x):
        """``A(x) = sqrt(F(r))/r``."""
        x = self._check(x)
        A, _, _ = self._ab_vec(np.atleast_1d(x))
        return float(A[0]) if x.ndim == 0 else A

    def potential_B(self, x):
        """``B(x) = sqrt(F(r))``."""
        x = self._check(x)
        _, B, _ = self._ab_vec(np.atleast_1d(x))
        return float(B[0]) if x.ndim == 0 else B

    def potential_B_regular(self, x):
        """``B(x) + l/x``, accurate also as ``x -> 0``."""
        x = self._check(x)
        _, _, Bp = self._ab_vec(np.atleast_1d(x))
        return float(Bp[0]) if x.ndim == 0 else Bp

    def radius(self, x):
        """``r(x)``; see :meth:`TortoiseMap.radius_from_tortoise`."""
        return self.map.radius_from_tortoise(self._check(x))

    def potential_matrix_Vm(self, x) -> np.ndarray:
        """``V_m(x) = k gamma^0 gamma^2 A - m gamma^0 B``; a stack for array ``x``."""
        A = np.asarray(self.potential_A(x))
        B = np.asarray(self.potential_B(x))
        return self.k * A[..., None, None] * _G0G2 - self.m * B[..., None, None] * _G0

    def norm_Vm(self, x):
        """Induced max-norm (maximum absolute row sum) of ``V_m``, ``kA + mB``."""
        return self.k * np.asarray(self.potential_A(x)) + self.m * np.asarray(self.potential_B(x))

    def regular_potential_Vlm(self, x, lam: complex) -> np.ndarray:
        """``V_{lam,m} = i lam Gamma^1 - i k gamma^1 gamma^2 A + i m gamma^1 (B + l/x)``."""
        x = self._check(x)
        A, _, Bp = self._ab_vec(np.atleast_1d(x))
        out = (
            1j * complex(lam) * GAMMA1_BIG
            - 1j * self.k * A[:, None, None] * _G1G2
            + 1j * self.m * Bp[:, None, None] * _G1
        )
        return out[0] if x.ndim == 0 else out

    def regular_potential_bound(self, lam: complex, n: int = 4000) -> float:
        """``C_{lam,m} = max(|lam|, sup |m(B + l/x)|, sup |A|)`` from a dense grid."""
        lo = -60.0 / self.kappa
        x = -np.geomspace(1e-8, -lo, n)
        A, _, Bp = self._ab_vec(x)
        return max(abs(complex(lam)), float(np.max(np.abs(self.m * Bp))), float(np.max(np.abs(A))))

    def horizon_amplitudes(self, x: float = None) -> tuple[float, float]:
        """Diagnostic estimates of ``C_A, C_B`` in ``A ~ C_A e^{kappa x}``."""
        if x is None:
            x = -20.0 / self.kappa
        e = math.exp(-self.kappa * x)
        A, B = self.ab(x)
        return A * e, B * e


def _horner(coef, x):
    # sum_{j>=1} coef[j-1] x^j
    acc = 0.0 * x
    for c in reversed(coef):
        acc = (acc + c) * x
    return acc
