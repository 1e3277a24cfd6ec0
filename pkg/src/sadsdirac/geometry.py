"""Schwarzschild-AdS exterior: horizon, surface gravity and tortoise coordinate.

The lapse function is ``F(r) = 1 - 2M/r + r**2/l**2``.  The tortoise
coordinate ``x`` satisfies ``dx/dr = 1/F`` with ``x(inf) = 0``, so the horizon
sits at ``x = -inf`` and the conformal boundary at ``x = 0``.

Internally radii close to the horizon are parametrised by
``u = ln(r - r_h)``.  In that variable ``dx/du = l**2 r / (r**2 + r_h r + q)``
with ``q = l**2 + r_h**2`` has no cancellation anywhere on the exterior, which
keeps the inverse map well conditioned at both ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, InvalidParameterError

__all__ = [
    "BlackHoleParams",
    "TortoiseMap",
    "horizon_radius",
    "horizon_radius_closed_form",
    "horizon_radius_bisection",
    "surface_gravity",
    "lapse",
    "tortoise",
    "tortoise_quadrature",
    "radius_from_tortoise",
]


def _cbrt(u: float) -> float:
    # real cube root, also for negative arguments
    return math.copysign(abs(u) ** (1.0 / 3.0), u)


def _check_ml(M: float, l: float) -> None:
    if not (math.isfinite(M) and math.isfinite(l)) or M <= 0 or l <= 0:
        raise InvalidParameterError(f"M and l must be positive, got M={M!r}, l={l!r}")


def horizon_radius_closed_form(M: float, l: float) -> float:
    """Real root of ``F`` from Cardano's formula ``p_+ + p_-``."""
    _check_ml(M, l)
    root = math.sqrt(M * M * l**4 + l**6 / 27.0)
    return _cbrt(M * l * l + root) + _cbrt(M * l * l - root)


def horizon_radius_bisection(M: float, l: float) -> float:
    """Real root of the cubic ``r**3 + l**2 r - 2 M l**2`` by bracketing."""
    _check_ml(M, l)
    cubic = lambda r: r**3 + l * l * r - 2.0 * M * l * l  # noqa: E731
    hi = max(2.0 * M, 1.0)
    while cubic(hi) < 0:
        hi *= 2.0
    return optimize.brentq(cubic, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def horizon_radius(M: float, l: float) -> float:
    """Horizon radius ``r_SAdS``, the unique real root of ``F``.

    The closed form is polished by one Newton step on the cubic, which
    removes the cancellation in ``p_-`` when ``M`` is small compared with ``l``.
    """
    r = horizon_radius_closed_form(M, l)
    g = r**3 + l * l * r - 2.0 * M * l * l
    dg = 3.0 * r * r + l * l
    return r - g / dg


def surface_gravity(M: float, l: float, r_h: float | None = None) -> float:
    """Surface gravity ``kappa = F'(r_h)/2``."""
    if r_h is None:
        r_h = horizon_radius(M, l)
    # F'(r_h) = (l^2 + 3 r_h^2) / (r_h l^2) once 2M = r_h + r_h^3/l^2 is used
    return (l * l + 3.0 * r_h * r_h) / (2.0 * r_h * l * l)


@dataclass(frozen=True)
class BlackHoleParams:
    """Mass and AdS radius of the black hole, with derived horizon data.

    Parameters
    ----------
    M : float
        Mass in geometric units.
    l : float
        AdS radius, ``l**2 = -3/Lambda``.
    """

    M: float
    l: float
    r_sads: float = field(init=False)
    kappa: float = field(init=False)

    def __post_init__(self):
        _check_ml(self.M, self.l)
        r_h = horizon_radius(self.M, self.l)
        object.__setattr__(self, "r_sads", r_h)
        object.__setattr__(self, "kappa", surface_gravity(self.M, self.l, r_h))


def lapse(params: BlackHoleParams, r):
    """``F(r) = 1 - 2M/r + r**2/l**2``."""
    r = np.asarray(r, dtype=float)
    return 1.0 - 2.0 * params.M / r + r * r / params.l**2


class _Closed:
    """Coefficients of the partial-fraction antiderivative of ``1/F``."""

    def __init__(self, params: BlackHoleParams):
        a, l = params.r_sads, params.l
        self.a, self.l, self.l2 = a, l, l * l
        self.q = l * l + a * a
        self.P = a / (3.0 * a * a + l * l)
        S = self.P * self.q / a
        self.D = math.sqrt(l * l + 0.75 * a * a)
        self.K = (S + 0.5 * self.P * a) / self.D

    def x_of_u(self, u: float) -> float:
        a = self.a
        d = math.exp(u)
        r = a + d
        quad = r * r + a * r + self.q
        z = (3.0 * a * r + self.l2) / quad
        if z < 0.5:
            lg = 0.5 * math.log1p(-z)
        else:
            lg = u - 0.5 * math.log(quad)
        return self.l2 * (self.P * lg - self.K * math.atan(self.D / (r + 0.5 * a)))

    def dxdu(self, u: float) -> float:
        r = self.a + math.exp(u)
        return self.l2 * r / (r * r + self.a * r + self.q)

    def x_of_u_vec(self, u):
        a = self.a
        d = np.exp(u)
        r = a + d
        quad = r * r + a * r + self.q
        z = (3.0 * a * r + self.l2) / quad
        lg = np.where(z < 0.5, 0.5 * np.log1p(-np.minimum(z, 0.5)), u - 0.5 * np.log(quad))
        return self.l2 * (self.P * lg - self.K * np.arctan(self.D / (r + 0.5 * a)))

    def dxdu_vec(self, u):
        r = self.a + np.exp(u)
        return self.l2 * r / (r * r + self.a * r + self.q)


class TortoiseMap:
    """Tabulated, invertible tortoise map ``x <-> r`` for one black hole.

    The forward map uses the closed-form antiderivative.  The inverse starts
    from linear interpolation on a table uniform in ``u = ln(r - r_h)`` and is
    polished by Newton iterations on the closed form.

    Parameters
    ----------
    params : BlackHoleParams
    n_table : int, optional
        Number of table nodes.
    """

    def __init__(self, params: BlackHoleParams, n_table: int = 4096):
        self.params = params
        self._c = _Closed(params)
        a, l, kappa = params.r_sads, params.l, params.kappa
        self.u_lo = 2.0 * kappa * (-80.0 / kappa) - 5.0
        self.u_hi = math.log(1e8 * max(a, l))
        self.u_grid = np.linspace(self.u_lo, self.u_hi, n_table)
        self.x_grid = self._c.x_of_u_vec(self.u_grid)
        self.r_grid = a + np.exp(self.u_grid)
        self.x_lo = float(self.x_grid[0])
        self.x_hi = float(self.x_grid[-1])
        self._xs = self.x_grid.tolist()
        self._us = self.u_grid.tolist()
        self._two_kappa = 2.0 * kappa

    # forward map

    def tortoise(self, r):
        """Tortoise coordinate of radius ``r > r_SAdS`` (scalar or array)."""
        r_arr = np.asarray(r, dtype=float)
        d = r_arr - self.params.r_sads
        if np.any(d <= 0) or np.any(~np.isfinite(r_arr)):
            raise DomainError("tortoise requires r > r_SAdS")
        out = self._c.x_of_u_vec(np.log(d))
        return float(out) if out.ndim == 0 else out

    def tortoise_from_offset(self, delta):
        """Tortoise coordinate of ``r = r_SAdS + delta`` (``delta > 0``)."""
        d = np.asarray(delta, dtype=float)
        if np.any(d <= 0):
            raise DomainError("offset from the horizon must be positive")
        out = self._c.x_of_u_vec(np.log(d))
        return float(out) if out.ndim == 0 else out

    # inverse map

    def _guess(self, x: float) -> float:
        if x <= self.x_lo:
            return self._us[0] + self._two_kappa * (x - self.x_lo)
        if x >= self.x_hi:
            return math.log(max(self.params.l**2 / -x - self.params.r_sads, 1e-300))
        xs = self._xs
        lo, hi = 0, len(xs) - 1
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if xs[mid] <= x:
                lo = mid
            else:
                hi = mid
        t = (x - xs[lo]) / (xs[hi] - xs[lo])
        return self._us[lo] + t * (self._us[hi] - self._us[lo])

    def log_offset(self, x: float) -> float:
        """``u = ln(r(x) - r_SAdS)`` for a scalar ``x < 0``."""
        if not x < 0:
            raise DomainError("radius_from_tortoise requires x < 0")
        u = self._guess(x)
        c = self._c
        for _ in range(60):
            du = (c.x_of_u(u) - x) / c.dxdu(u)
            u -= du
            if abs(du) <= 4e-16 * max(1.0, abs(u)):
                break
        return u

    def log_offset_vec(self, x) -> np.ndarray:
        """Vectorised ``u = ln(r(x) - r_SAdS)``."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x < 0)):
            raise DomainError("radius_from_tortoise requires x < 0")
        u = np.interp(x, self.x_grid, self.u_grid)
        left = x < self.x_lo
        u[left] = self.u_grid[0] + self._two_kappa * (x[left] - self.x_lo)
        right = x > self.x_hi
        u[right] = np.log(np.maximum(self.params.l**2 / -x[right] - self.params.r_sads, 1e-300))
        c = self._c
        for _ in range(60):
            du = (c.x_of_u_vec(u) - x) / c.dxdu_vec(u)
            u = u - du
            if np.all(np.abs(du) <= 4e-16 * np.maximum(1.0, np.abs(u))):
                break
        return u

    def radius_from_tortoise(self, x):
        """Radius ``r(x)`` for ``x < 0`` (scalar or array)."""
        x_arr = np.asarray(x, dtype=float)
        if x_arr.ndim == 0:
            return self.params.r_sads + math.exp(self.log_offset(float(x_arr)))
        return self.params.r_sads + np.exp(self.log_offset_vec(x_arr))

    def is_near_boundary(self, x) -> np.ndarray | bool:
        """True where ``x`` lies beyond the tabulated radius cutoff."""
        out = np.asarray(x, dtype=float) > self.x_hi
        return bool(out) if out.ndim == 0 else out


def tortoise(params: BlackHoleParams, r):
    """Tortoise coordinate ``x(r) = -int_r^inf ds / F(s)``."""
    return TortoiseMap(params, n_table=2).tortoise(r)


def radius_from_tortoise(params: BlackHoleParams, x):
    """Inverse of :func:`tortoise`."""
    return TortoiseMap(params).radius_from_tortoise(x)


def tortoise_quadrature(params: BlackHoleParams, r: float) -> float:
    """Tortoise coordinate by adaptive quadrature, independent of the closed form.

    Integrates ``1/F`` in ``ln s`` from ``r`` to a cutoff ``R`` and adds the
    asymptotic tail ``l**2/R - l**4/(3 R**3) + M l**4/(2 R**4)``.
    """
    if not r > params.r_sads:
        raise DomainError("tortoise requires r > r_SAdS")
    M, l = params.M, params.l
    R = 1e4 * max(l, r, M)
    f = lambda t: math.exp(t) / (1.0 - 2.0 * M * math.exp(-t) + math.exp(2 * t) / l**2)  # noqa: E731
    edges = np.linspace(math.log(r), math.log(R), 40)
    total = 0.0
    for t0, t1 in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, t0, t1, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    tail = l**2 / R - l**4 / (3.0 * R**3) + M * l**4 / (2.0 * R**4)
    return -(total + tail)
