"""Jost solutions anchored at the horizon.

The Jost solution of kind ``Phi_j`` behaves like ``exp(i lam s_j x) e_j`` as
``x -> -inf``, where ``s_j`` is the ``j``-th diagonal entry of
``Gamma^1 = diag(1, -1, -1, 1)``.  It exists and is holomorphic in ``lam`` for
``-s_j Im(lam) > -kappa/2``.  ``Phi3`` and ``Phi2`` are the ones entering the
resolvent in the upper half plane, ``Phi1`` and ``Phi4`` in the lower one.

The solver integrates the scaled variable ``v = exp(-i lam s_j x) psi``,
started at ``x_min = -30/kappa`` from the first-order asymptotic correction to
``e_j``.  The Picard series is kept as an independent check.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import InvalidParameterError, OutOfStripError
from .potentials import PotentialEvaluator
from .radial import SolutionCurve, cumulative_simpson_c, make_rhs, march
from .spinor_algebra import GAMMA1_BIG

__all__ = [
    "KINDS",
    "jost_solution",
    "jost_tilde",
    "picard_jost",
    "picard_terms",
    "jost_growth_bound",
    "check_strip",
]

KINDS = {"Phi1": 0, "Phi2": 1, "Phi3": 2, "Phi4": 3}
_S1 = np.array([1.0, -1.0, -1.0, 1.0])


def _kind(kind: str) -> tuple[int, float]:
    try:
        j = KINDS[kind]
    except KeyError:
        raise InvalidParameterError(f"unknown Jost kind {kind!r}") from None
    return j, _S1[j]


def check_strip(ev: PotentialEvaluator, lam: complex, kind: str = "Phi3", margin: float = 1e-3) -> None:
    """Raise :class:`OutOfStripError` unless ``-s_j Im lam > -kappa/2 + margin kappa``."""
    _, s = _kind(kind)
    if not -s * complex(lam).imag > -ev.kappa * (0.5 - margin):
        raise OutOfStripError(
            f"Im(lambda)={complex(lam).imag:.6g} is outside the strip of {kind} "
            f"(kappa/2 = {ev.kappa / 2:.6g})"
        )


def _initial_profile(ev: PotentialEvaluator, lam: complex, j: int, x0: float) -> np.ndarray:
    # v_i = delta_ij + W_ij(x0) / (kappa - i lam (s_i - s_j)),  W = -i Gamma^1 V_m
    W = -1j * GAMMA1_BIG @ ev.potential_matrix_Vm(x0)
    v = np.zeros(4, dtype=complex)
    v[j] = 1.0
    for i in range(4):
        if i != j:
            v[i] = W[i, j] / (ev.kappa - 1j * lam * (_S1[i] - _S1[j]))
    return v


def jost_solution(
    ev: PotentialEvaluator,
    lam: complex,
    kind: str = "Phi3",
    grid=None,
    x_min: float | None = None,
    x_end: float | None = None,
    rtol: float = 1e-10,
    atol: float | None = None,
    margin: float = 1e-3,
) -> SolutionCurve:
    """Jost solution of the given kind on a grid.

    Parameters
    ----------
    ev : PotentialEvaluator
    lam : complex
        Spectral parameter inside the strip of ``kind``.
    kind : {"Phi1", "Phi2", "Phi3", "Phi4"}
    grid : array_like, optional
        Increasing sample points.  Defaults to 401 points on ``[x_min, x_end]``.
    x_min : float, optional
        Start of the integration, ``-30/kappa`` by default.
    x_end : float, optional
        End of the integration, ``max(grid)`` or ``-1`` by default.
    rtol, atol : float
        Integrator tolerances for the scaled variable.  By default ``atol`` is
        ``1e-14`` except on the components whose errors are amplified towards
        the boundary (only below the real axis), where it is ``1e-30`` so that
        the control is effectively relative.

    Returns
    -------
    SolutionCurve
    """
    lam = complex(lam)
    check_strip(ev, lam, kind, margin)
    j, s = _kind(kind)
    if x_min is None:
        x_min = -30.0 / ev.kappa
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        x_min = min(x_min, float(grid[0]))
        x_end = float(grid[-1]) if x_end is None else max(x_end, float(grid[-1]))
    if x_end is None:
        x_end = -1.0
    if not x_min < x_end < 0:
        raise InvalidParameterError("need x_min < x_end < 0")
    if grid is None:
        grid = np.linspace(x_min, x_end, 401)

    if atol is None:
        amplified = (_S1 != s) & (-s * lam.imag < 0)
        atol = np.where(amplified, 1e-30, 1e-14)
    v0 = _initial_profile(ev, lam, j, x_min)
    sol = march(make_rhs(ev, lam, shift=s), x_min, v0, x_end, rtol, atol)
    dense = sol.sol
    phase = 1j * lam * s

    def evaluate(x):
        return dense(x).T * np.exp(phase * x)[:, None]

    return SolutionCurve(
        lam=lam,
        anchor="horizon",
        label=kind,
        grid=grid,
        values=evaluate(grid),
        span=(x_min, x_end),
        _evaluate=evaluate,
        meta={"x_min": x_min, "rtol": rtol, "nfev": int(sol.nfev)},
    )


def jost_tilde(curve: SolutionCurve) -> SolutionCurve:
    """Twisted partner of a Jost curve; twist of ``Phi3`` is ``Phi2``."""
    return curve.twisted()


def picard_terms(
    ev: PotentialEvaluator,
    lam: complex,
    kind: str,
    x: float,
    n_terms: int,
    h: float | None = None,
) -> np.ndarray:
    """Individual Picard terms ``psi_n(x)``, ``n = 0 .. n_terms-1``.

    Each layer solves ``w_{n+1}(x) = int_{-inf}^x M_c(-t) W(t) M_c(t) w_n(t) dt``
    with ``W = -i Gamma^1 V_m`` by cumulative Simpson quadrature on a uniform
    grid, truncated far enough into the horizon region that the neglected
    tail is below ``e^-36`` relative.  ``psi_n = M_c(x) w_n``.
    """
    lam = complex(lam)
    check_strip(ev, lam, kind, margin=0.0)
    if n_terms < 1:
        raise InvalidParameterError("n_terms must be >= 1")
    j, s = _kind(kind)
    rate = ev.kappa + 2.0 * min(0.0, -s * lam.imag)
    lo = x - max(36.0 / rate, 40.0 / ev.kappa)
    if h is None:
        h = min(2e-3, 0.05 / (abs(lam) + ev.kappa))
    n = max(int(math.ceil((x - lo) / h)), 8) + 1
    t = np.linspace(lo, x, n)
    W = -1j * GAMMA1_BIG @ ev.potential_matrix_Vm(t)
    ph = np.exp(-1j * lam * np.outer(t, _S1))  # diagonal of M_c(-t) as rows
    Bt = ph[:, :, None] * W / ph[:, None, :]
    w = np.zeros((n, 4), dtype=complex)
    w[:, j] = 1.0
    terms = [w[-1].copy()]
    for _ in range(n_terms - 1):
        integrand = np.einsum("nij,nj->ni", Bt, w)
        w = cumulative_simpson_c(integrand, t)
        terms.append(w[-1].copy())
    mc = np.exp(1j * lam * _S1 * x)
    return np.array(terms) * mc


def picard_jost(ev: PotentialEvaluator, lam: complex, kind: str, x: float, n_terms: int, h=None) -> np.ndarray:
    """Partial sum of the first ``n_terms`` Picard terms at ``x``."""
    return picard_terms(ev, lam, kind, x, n_terms, h).sum(axis=0)


def jost_growth_bound(ev: PotentialEvaluator, lam: complex, x) -> np.ndarray:
    """Bound ``e^{Im lam x} exp(int_{-inf}^x e^{max(0, 2 Im lam t)} |V_m(t)| dt)``.

    Valid for the kinds ``Phi2`` and ``Phi3`` in the sup-norm, with the
    induced max-norm for ``V_m``.
    """
    lam = complex(lam)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rate = ev.kappa + 2.0 * min(0.0, lam.imag)
    lo = min(float(x.min()), -1.0) - 40.0 / rate
    t = np.unique(np.concatenate([np.linspace(lo, float(x.max()), 20001), x]))
    g = np.exp(np.maximum(0.0, 2.0 * lam.imag * t)) * ev.norm_Vm(t)
    cum = cumulative_trapezoid(g, t, initial=0.0)
    integral = np.interp(x, t, cum)
    return np.exp(lam.imag * x + integral)
