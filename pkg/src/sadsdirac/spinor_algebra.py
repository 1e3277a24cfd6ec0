"""Constant 4x4 matrices of the radial Dirac system.

The Dirac matrices are built from Pauli blocks::

    gamma^0 = i [[0, I], [-I, 0]],   gamma^k = i [[0, sigma^k], [sigma^k, 0]]

with ``sigma^1 = diag(1, -1)``, ``sigma^2 = [[0, 1], [1, 0]]`` and
``sigma^3 = [[0, -i], [i, 0]]``.  All named constants are exact: their entries
are Gaussian integers, or ``+-1/sqrt(2)`` for the diagonaliser ``P``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, InvalidParameterError, ScaledRepresentationError

__all__ = [
    "PAULI",
    "GAMMA",
    "GAMMA1_BIG",
    "MINKOWSKI",
    "P",
    "P_INV",
    "PI_PLUS",
    "PI_MINUS",
    "TWIST",
    "gamma",
    "big_gamma1",
    "fundamental_mc",
    "fundamental_mc_profile",
    "frobenius_m0",
    "frobenius_m0_ratio",
    "twist",
]

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)

PAULI = (
    _I2.copy(),
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
)

GAMMA = (
    1j * np.block([[_Z2, _I2], [-_I2, _Z2]]),
    1j * np.block([[_Z2, PAULI[1]], [PAULI[1], _Z2]]),
    1j * np.block([[_Z2, PAULI[2]], [PAULI[2], _Z2]]),
    1j * np.block([[_Z2, PAULI[3]], [PAULI[3], _Z2]]),
)

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])

#: Generator of the free propagation, ``-gamma^0 gamma^1 = diag(1, -1, -1, 1)``.
GAMMA1_BIG = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)

_S = 1.0 / np.sqrt(2.0)
#: Diagonaliser of ``gamma^1``: ``gamma^1 = P diag(i, i, -i, -i) P^-1``.
P = _S * np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, -1, 0, 1]], dtype=complex)
P_INV = _S * np.array([[1, 0, 1, 0], [0, 1, 0, -1], [1, 0, -1, 0], [0, 1, 0, 1]], dtype=complex)

#: Spectral projectors of ``gamma^1`` onto the eigenvalues ``+i`` and ``-i``.
PI_PLUS = 0.5 * np.array([[1, 0, 1, 0], [0, 1, 0, -1], [1, 0, 1, 0], [0, -1, 0, 1]], dtype=complex)
PI_MINUS = 0.5 * np.array([[1, 0, -1, 0], [0, 1, 0, 1], [-1, 0, 1, 0], [0, 1, 0, 1]], dtype=complex)

#: ``(-i) gamma^0 gamma^1 gamma^2``, an anti-diagonal involution.
TWIST = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)

_GAMMA1_DIAG = np.array([1.0, -1.0, -1.0, 1.0])


def gamma(index: int) -> np.ndarray:
    """Dirac matrix ``gamma^index`` for ``index`` in ``0..3`` (a fresh copy)."""
    if index not in (0, 1, 2, 3):
        raise InvalidParameterError(f"gamma index must be 0..3, got {index!r}")
    return GAMMA[index].copy()


def big_gamma1() -> np.ndarray:
    """``Gamma^1 = diag(1, -1, -1, 1)``, so that ``M_c' = i lambda Gamma^1 M_c``."""
    return GAMMA1_BIG.copy()


def fundamental_mc(x: float, lam: complex) -> np.ndarray:
    """Free fundamental matrix ``diag(e^{i lam x}, e^{-i lam x}, e^{-i lam x}, e^{i lam x})``.

    Raises
    ------
    ScaledRepresentationError
        If ``|Im lam| |x| > 700``; use :func:`fundamental_mc_profile` instead.
    """
    lam = complex(lam)
    if abs(lam.imag) * abs(x) > 700.0:
        raise ScaledRepresentationError("exponent too large, use the profile form")
    return np.diag(np.exp(1j * lam * x * _GAMMA1_DIAG))


def fundamental_mc_profile(x: float, lam: complex) -> tuple[np.ndarray, float]:
    """``M_c(x)`` split as ``exp(scale) * D`` with ``max |D_jj| = 1``.

    Returns
    -------
    D : ndarray
        Diagonal matrix of unit-bounded entries.
    scale : float
        Real log-prefactor, ``|Im lam x|``.
    """
    lam = complex(lam)
    expo = 1j * lam * x * _GAMMA1_DIAG
    scale = float(np.max(expo.real))
    return np.diag(np.exp(expo - scale)), scale


def frobenius_m0(x, ml: float) -> np.ndarray:
    """Fundamental matrix of ``phi' + i (ml/x) gamma^1 phi = 0`` normalised at ``x = -1``.

    ``M_0(x) = P diag((-x)^ml, (-x)^ml, (-x)^-ml, (-x)^-ml) P^-1``.  Accepts an
    array of ``x`` and then returns a stack of matrices.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x < 0)):
        raise DomainError("M_0(x) is defined for x < 0")
    if ml <= 0:
        raise InvalidParameterError("ml must be positive")
    y = -x
    up = y**ml
    dn = y ** (-ml)
    return up[..., None, None] * PI_PLUS + dn[..., None, None] * PI_MINUS


def frobenius_m0_ratio(x, t, ml: float) -> np.ndarray:
    """``M_0(-x/t)``, the boundary Volterra kernel, for ``x, t < 0``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(~(x < 0)) or np.any(~(t < 0)):
        raise DomainError("M_0(-x/t) needs x < 0 and t < 0")
    return frobenius_m0(-x / t, ml)


def twist(chi: np.ndarray) -> np.ndarray:
    """Apply the twist ``(-i) gamma^0 gamma^1 gamma^2`` along the last axis."""
    chi = np.asarray(chi)
    return chi @ TWIST.T
