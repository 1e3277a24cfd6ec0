"""Right-hand sides and marching helpers for the radial system.

The eigenvalue equation ``(H - lam) phi = 0`` is the first-order system

    phi' = i lam Gamma^1 phi - i Gamma^1 V_m(x) phi.

Written out, with ``k = s + 1/2``::

    phi1' =  i lam phi1 + i k A phi2 - m B phi3
    phi2' = -i lam phi2 - i k A phi1 + m B phi4
    phi3' = -i lam phi3 + i k A phi4 - m B phi1
    phi4' =  i lam phi4 - i k A phi3 + m B phi2

Solvers may integrate ``v = exp(-i lam c x) phi`` for a constant ``c``, which
strips the dominant exponential without changing the coupling terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp

from .errors import ConvergenceError, DomainError
from .potentials import PotentialEvaluator
from .spinor_algebra import GAMMA1_BIG, TWIST

__all__ = ["SolutionCurve", "cumulative_simpson_c", "make_rhs", "march", "ode_residual"]

_S1 = np.array([1.0, -1.0, -1.0, 1.0])


def make_rhs(ev: PotentialEvaluator, lam: complex, shift: float = 0.0):
    """Right-hand side for ``v = exp(-i lam shift x) phi``.

    Returns a callable ``f(x, v)`` suitable for :func:`scipy.integrate.solve_ivp`.
    """
    lam = complex(lam)
    k, m = ev.k, ev.m
    ab = ev.ab
    e1 = 1j * lam * (1.0 - shift)
    e2 = 1j * lam * (-1.0 - shift)
    ik = 1j * k

    def rhs(x, v):
        A, B = ab(x)
        v1, v2, v3, v4 = v.tolist()
        kA = ik * A
        mB = m * B
        return np.array(
            (
                e1 * v1 + kA * v2 - mB * v3,
                e2 * v2 - kA * v1 + mB * v4,
                e2 * v3 + kA * v4 - mB * v1,
                e1 * v4 - kA * v3 + mB * v2,
            )
        )

    return rhs


def cumulative_simpson_c(y, x=None, dx=1.0):
    """Cumulative Simpson integral along axis 0 that keeps imaginary parts."""
    y = np.asarray(y)
    kw = dict(x=x, dx=dx, axis=0, initial=0.0)
    if np.iscomplexobj(y):
        return cumulative_simpson(y.real, **kw) + 1j * cumulative_simpson(y.imag, **kw)
    return cumulative_simpson(y, **kw)


def march(rhs, x_start: float, y0, x_end: float, rtol: float, atol: float, t_eval=None):
    """Integrate with DOP853 and dense output; raise on failure."""
    sol = solve_ivp(
        rhs,
        (x_start, x_end),
        np.asarray(y0, dtype=complex),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        t_eval=t_eval,
    )
    if not sol.success:
        raise ConvergenceError(f"integration failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise ConvergenceError("non-finite values in the solution")
    return sol


@dataclass
class SolutionCurve:
    """A solution of the radial system sampled on a grid.

    Attributes
    ----------
    lam : complex
        Spectral parameter.
    anchor : str
        ``"horizon"`` or ``"boundary"``.
    label : str
        Kind of Jost solution or the boundary seed.
    grid : ndarray
        Increasing sample points in ``(-inf, 0)``.
    values : ndarray
        Complex array of shape ``(len(grid), 4)``.
    span : tuple of float
        Interval on which :meth:`__call__` may be evaluated.
    """

    lam: complex
    anchor: str
    label: str
    grid: np.ndarray
    values: np.ndarray
    span: tuple
    _evaluate: object = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        """Values at arbitrary points inside :attr:`span`, shape ``(n, 4)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.span
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise DomainError(f"evaluation outside the curve span {self.span}")
        return self._evaluate(x)

    def transformed(self, matrix: np.ndarray, label: str) -> "SolutionCurve":
        """Curve of ``matrix @ phi`` (a constant map commuting with the equation)."""
        fn = self._evaluate
        return SolutionCurve(
            lam=self.lam,
            anchor=self.anchor,
            label=label,
            grid=self.grid,
            values=self.values @ matrix.T,
            span=self.span,
            _evaluate=lambda x: fn(x) @ matrix.T,
            meta=dict(self.meta),
        )

    def twisted(self) -> "SolutionCurve":
        """Apply the twist pointwise."""
        return self.transformed(TWIST, f"twist({self.label})")


def ode_residual(curve: SolutionCurve, ev: PotentialEvaluator, x=None, h: float = 1e-4):
    """Pointwise relative residual of the radial equation by central differences.

    Returns ``|phi' - i lam Gamma^1 phi + i Gamma^1 V_m phi| / (1 + |phi|)``
    with fourth-order differences of the dense interpolant.
    """
    if x is None:
        x = curve.grid[2:-2]
    x = np.asarray(x, dtype=float)
    f = curve
    d = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)
    phi = f(x)
    V = ev.potential_matrix_Vm(x)
    G = GAMMA1_BIG
    rhs = 1j * curve.lam * phi * _S1 - 1j * np.einsum("ij,njk,nk->ni", G, V, phi)
    return np.max(np.abs(d - rhs), axis=1) / (1.0 + np.max(np.abs(phi), axis=1))
