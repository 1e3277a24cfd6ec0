"""Solutions anchored at the conformal boundary ``x = 0``.

Near ``x = 0`` the radial system is ``phi' + i (ml/x) gamma^1 phi = V_{lam,m} phi``
with a bounded ``V_{lam,m}``.  Its leading part is solved by ``M_0(x)``, and the
boundary solution is the Volterra series

    phi_{n+1}(x) = int_0^x M_0(-x/t) V_{lam,m}(t) phi_n(t) dt.

For ``2ml < 1`` (``"sub"``) the solution is selected by the reflecting
condition ``(gamma^1 + i) phi = o(sqrt(-x))`` and starts as
``phi_0 = 2 (-x)^{-ml} (c, d, -c, d)``; for ``2ml >= 1`` (``"super"``) it
vanishes at the boundary and starts as ``phi_0 = 2 (-x)^{ml} (a, b, a, -b)``.

The series is evaluated in ``sigma = ln(-x)`` where every term is a smooth
sum of exponentials.  It seeds an ODE march at ``x0 = -1e-4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidParameterError, SeedMismatchError
from .potentials import SUB, SUPER, PotentialEvaluator
from .radial import SolutionCurve, cumulative_simpson_c, make_rhs, march
from .spinor_algebra import PI_MINUS, PI_PLUS

__all__ = [
    "BoundarySeed",
    "BoundarySeries",
    "BoundaryReport",
    "boundary_series",
    "series_correction",
    "boundary_solution",
    "boundary_limits",
    "check_boundary_condition",
    "boundary_residual",
    "decay_report",
    "regular_bound_constant",
    "series_term_bound",
    "global_bound",
]


@dataclass(frozen=True)
class BoundarySeed:
    """Leading coefficients of a boundary solution.

    Parameters
    ----------
    regime : {"sub", "super"}
    pair : tuple of float
        ``(c, d)`` for ``"sub"``, ``(a, b)`` for ``"super"``.
    """

    regime: str
    pair: tuple

    def __post_init__(self):
        if self.regime not in (SUB, SUPER):
            raise InvalidParameterError(f"unknown regime {self.regime!r}")
        if len(self.pair) != 2 or not all(math.isfinite(v) for v in self.pair):
            raise InvalidParameterError("seed pair must hold two finite numbers")
        if self.pair[0] == 0 and self.pair[1] == 0:
            raise InvalidParameterError("seed pair must be nonzero")

    @classmethod
    def canonical(cls, ev: PotentialEvaluator) -> "BoundarySeed":
        """Seed ``(1, 0)`` in the regime of ``ev``."""
        return cls(ev.regime, (1.0, 0.0))

    @property
    def vector(self) -> np.ndarray:
        """Constant vector ``w`` with ``phi_0(x) = M_0(x) w``."""
        p, q = self.pair
        if self.regime == SUB:
            return 2.0 * np.array([p, q, -p, q], dtype=complex)
        return 2.0 * np.array([p, q, p, -q], dtype=complex)

    @property
    def norm_constant(self) -> float:
        """``N = 2 max(|c|, |d|)``."""
        return 2.0 * max(abs(self.pair[0]), abs(self.pair[1]))

    def twisted(self) -> "BoundarySeed":
        """Seed of the twisted solution: ``(c, d) -> (-d, -c)`` or ``(a, b) -> (b, a)``."""
        p, q = self.pair
        return BoundarySeed(self.regime, (-q, -p) if self.regime == SUB else (q, p))

    @property
    def twist_degenerate(self) -> bool:
        """True if the twist maps the seed to a multiple of itself (``|p| = |q|``)."""
        p, q = self.pair
        return abs(p) == abs(q)

    def power(self, ml: float) -> float:
        """Exponent ``e`` in ``phi_0 ~ (-x)^e``."""
        return -ml if self.regime == SUB else ml


def _check_seed(ev: PotentialEvaluator, seed: BoundarySeed) -> None:
    if seed.regime != ev.regime:
        raise SeedMismatchError(f"seed regime {seed.regime!r} does not match mode regime {ev.regime!r}")


def _weighted_cumint(F: np.ndarray, sig: np.ndarray, c: float, rate_floor: float) -> np.ndarray:
    """``J(s_k) = int_{-inf}^{s_k} exp(c (s_k - s)) F(s) ds`` on a uniform grid.

    The part below ``sig[0]`` is estimated from the local exponential rate of
    ``F``.  The grid is cut into chunks on which the weight stays within
    ``e^30`` so that nothing overflows.
    """
    h = sig[1] - sig[0]
    f0, f1 = np.max(np.abs(F[0])), np.max(np.abs(F[1]))
    if f0 > 0 and f1 > 0:
        rho = math.log(f1 / f0) / h
    else:
        rho = c + rate_floor
    rho = max(rho, c + rate_floor)
    J = np.empty_like(F)
    start = F[0] / (rho - c)
    n = len(sig)
    step = n if c == 0 else max(int(30.0 / (abs(c) * h)), 3)
    a = 0
    while a < n - 1:
        b = min(a + step, n - 1)
        s = sig[a : b + 1]
        w = np.exp(c * (sig[a] - s))[:, None]
        inner = cumulative_simpson_c(F[a : b + 1] * w, dx=h)
        J[a : b + 1] = np.exp(c * (s - sig[a]))[:, None] * (start + inner)
        start = J[b]
        a = b
    if n == 1:
        J[0] = start
    return J


@dataclass
class BoundarySeries:
    """Terms of the boundary Volterra series on a grid in ``sigma = ln(-x)``.

    Attributes
    ----------
    sigma : ndarray
        Uniform grid ending at ``ln(-x_top)``.
    scaled : ndarray
        ``g_n(sigma)`` with ``phi_n = (-x)^e g_n``, shape ``(n_terms, N, 4)``.
    power : float
        The exponent ``e`` (``-ml`` or ``ml``).
    """

    sigma: np.ndarray
    scaled: np.ndarray
    power: float

    @property
    def x(self) -> np.ndarray:
        return -np.exp(self.sigma)

    def terms(self) -> np.ndarray:
        """Unscaled terms ``phi_n`` on the grid."""
        return self.scaled * np.exp(self.power * self.sigma)[None, :, None]

    def top_terms(self) -> np.ndarray:
        """``phi_n(x_top)`` for every ``n``."""
        return self.scaled[:, -1] * math.exp(self.power * self.sigma[-1])

    def partial_sum(self, n_terms: int | None = None) -> np.ndarray:
        """``sum_{n < n_terms} phi_n`` on the grid."""
        g = self.scaled[:n_terms].sum(axis=0)
        return g * np.exp(self.power * self.sigma)[:, None]

    def interpolant(self, n_terms: int | None = None):
        """Callable ``x -> sum phi_n(x)`` for ``x`` inside the grid."""
        g = self.scaled[:n_terms].sum(axis=0)
        spline = CubicSpline(self.sigma, g, axis=0)
        p = self.power

        def evaluate(x):
            s = np.log(-np.asarray(x, dtype=float))
            return spline(s) * np.exp(p * s)[:, None]

        return evaluate


def boundary_series(
    ev: PotentialEvaluator,
    lam: complex,
    seed: BoundarySeed,
    x_top: float,
    n_terms: int,
    h: float = 5e-3,
    tol: float | None = None,
) -> BoundarySeries:
    """Compute the first ``n_terms`` terms of the boundary series on ``[.., x_top]``.

    With ``tol`` given the series stops early, once two consecutive terms at
    ``x_top`` are below ``tol`` relative to the partial sum there.

    With ``p = ml`` and ``J_c[F](s) = int^s e^{c(s - t)} F(t) dt`` the scaled
    terms obey ``g_{n+1} = -Pi_+ J_{c+}[e^t V g_n] - Pi_- J_{c-}[e^t V g_n]``,
    where ``(c+, c-) = (2p, 0)`` below and ``(0, -2p)`` above the mass
    threshold, and ``Pi_+-`` project onto the ``+-i`` eigenspaces of ``gamma^1``.
    """
    _check_seed(ev, seed)
    if not x_top < 0:
        raise InvalidParameterError("x_top must be negative")
    if n_terms < 1:
        raise InvalidParameterError("n_terms must be >= 1")
    lam = complex(lam)
    p = ev.ml
    if seed.regime == SUB:
        c_plus, c_minus, floor = 2.0 * p, 0.0, 1.0 - 2.0 * p
    else:
        c_plus, c_minus, floor = 0.0, -2.0 * p, 1.0
    top = math.log(-x_top)
    span = min(700.0, 40.0 / floor)
    n = int(math.ceil(span / h)) + 1
    sig = np.linspace(top - span, top, n)
    x = -np.exp(sig)
    V = ev.regular_potential_Vlm(x, lam)
    es = np.exp(sig)[:, None]
    out = np.empty((n_terms, n, 4), dtype=complex)
    # g_0 is the constant seed vector: M_0(x) w = (-x)^e w on the seed direction
    out[0] = seed.vector
    for k in range(1, n_terms):
        F = es * np.einsum("nij,nj->ni", V, out[k - 1])
        Jp = _weighted_cumint(F @ PI_PLUS.T, sig, c_plus, floor)
        Jm = _weighted_cumint(F @ PI_MINUS.T, sig, c_minus, floor)
        out[k] = -(Jp + Jm)
        if tol is not None and k >= 2:
            total = np.max(np.abs(out[: k + 1, -1].sum(axis=0)))
            if max(np.max(np.abs(out[k, -1])), np.max(np.abs(out[k - 1, -1]))) <= tol * total:
                out = out[: k + 1]
                break
    return BoundarySeries(sigma=sig, scaled=out, power=seed.power(p))


def series_correction(
    ev: PotentialEvaluator, lam: complex, seed: BoundarySeed, x0: float, n_terms: int
) -> np.ndarray:
    """Partial sum of the first ``n_terms`` boundary-series terms at ``x0``."""
    return boundary_series(ev, lam, seed, x0, n_terms).top_terms().sum(axis=0)


def _auto_series(ev, lam, seed, x0, max_terms=40):
    return boundary_series(ev, lam, seed, x0, max_terms, tol=1e-17)


def boundary_solution(
    ev: PotentialEvaluator,
    lam: complex,
    seed: BoundarySeed | None = None,
    grid=None,
    x0: float = -1e-4,
    x_end: float | None = None,
    rtol: float = 1e-10,
    atol: float | None = None,
    n_series: int | None = None,
) -> SolutionCurve:
    """Boundary solution with the given seed, marched from ``x0`` towards the horizon.

    Parameters
    ----------
    ev : PotentialEvaluator
    lam : complex
    seed : BoundarySeed, optional
        Defaults to the canonical seed ``(1, 0)`` of the mode's regime.
    grid : array_like, optional
        Increasing sample points; points in ``(x0, 0)`` are taken from the series.
    x0 : float
        Hand-over point from the series to the ODE.
    x_end : float, optional
        Leftmost point of the march, ``min(grid)`` or ``-1`` by default.
    rtol, atol : float
        Integrator tolerances; ``atol`` defaults to ``1e-14`` times the seed size.
    n_series : int, optional
        Number of series terms at ``x0``; by default until two consecutive
        terms are below ``1e-17`` relative (at most 40).

    Returns
    -------
    SolutionCurve
    """
    lam = complex(lam)
    if seed is None:
        seed = BoundarySeed.canonical(ev)
    _check_seed(ev, seed)
    if not x0 < 0:
        raise InvalidParameterError("x0 must be negative")
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        x_end = float(grid[0]) if x_end is None else min(x_end, float(grid[0]))
    if x_end is None:
        x_end = -1.0
    if not x_end < x0:
        raise InvalidParameterError("need x_end < x0")
    if grid is None:
        grid = np.linspace(x_end, x0, 401)
    x_hi = max(x0, float(grid[-1]))
    if not x_hi < 0:
        raise InvalidParameterError("grid must lie in x < 0")

    if ev.free:
        w = seed.vector
        e = seed.power(ev.ml)

        def evaluate(x):
            return (-x)[:, None] ** e * w

        return SolutionCurve(lam, "boundary", f"seed{seed.pair}", grid, evaluate(grid), (x_end, -1e-300), evaluate,
                             {"seed": seed, "x0": x0, "free": True})

    if n_series is None:
        ser = _auto_series(ev, lam, seed, x0)
    else:
        ser = boundary_series(ev, lam, seed, x0, n_series)
    y0 = ser.top_terms().sum(axis=0)
    if atol is None:
        atol = 1e-14 * float(np.max(np.abs(y0)))
    sol = march(make_rhs(ev, lam), x0, y0, x_end, rtol, atol)
    dense = sol.sol
    near = ser.interpolant()

    def evaluate(x):
        out = np.empty((len(x), 4), dtype=complex)
        inner = x > x0
        if np.any(~inner):
            out[~inner] = dense(x[~inner]).T
        if np.any(inner):
            out[inner] = near(x[inner])
        return out

    return SolutionCurve(
        lam=lam,
        anchor="boundary",
        label=f"seed{seed.pair}",
        grid=grid,
        values=evaluate(grid),
        span=(x_end, max(x_hi, -math.exp(ser.sigma[0]))),
        _evaluate=evaluate,
        meta={"seed": seed, "x0": x0, "rtol": rtol, "n_series": ser.scaled.shape[0], "nfev": int(sol.nfev)},
    )


def boundary_limits(curve: SolutionCurve, ev: PotentialEvaluator, x: float | None = None) -> tuple[complex, complex]:
    """Recover the seed pair from a curve near ``x = 0``.

    ``c = lim (-x)^{ml} (phi1 - phi3)/4`` and ``d = lim (-x)^{ml} (phi2 + phi4)/4``
    below the threshold; ``a = lim (-x)^{-ml} (phi1 + phi3)/4`` and
    ``b = lim (-x)^{-ml} (phi2 - phi4)/4`` above it.
    """
    if x is None:
        x = min(curve.span[1], -1e-10)
    phi = curve(x)[0]
    if ev.regime == SUB:
        f = (-x) ** ev.ml / 4.0
        return f * (phi[0] - phi[2]), f * (phi[1] + phi[3])
    f = (-x) ** (-ev.ml) / 4.0
    return f * (phi[0] + phi[2]), f * (phi[1] - phi[3])


@dataclass
class BoundaryReport:
    """Boundary-condition diagnostic on the last decade of a curve.

    Attributes
    ----------
    regime : str
    x : ndarray
        Probe points, ordered towards the boundary.
    residual : ndarray
        ``(|phi1+phi3| + |phi2-phi4|)/sqrt(-x)`` below the threshold, ``|phi|``
        above it.
    sup : float
        Maximum of ``residual``.
    exponent : float
        Least-squares slope of ``log residual`` against ``log(-x)``; positive
        means the residual vanishes at the boundary.
    satisfied : bool
        ``exponent > 0``.
    """

    regime: str
    x: np.ndarray
    residual: np.ndarray
    sup: float
    exponent: float
    satisfied: bool

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "x": self.x.tolist(),
            "residual": self.residual.tolist(),
            "sup": self.sup,
            "exponent": self.exponent,
            "satisfied": self.satisfied,
        }


def check_boundary_condition(curve: SolutionCurve, ev: PotentialEvaluator, n_points: int = 25) -> BoundaryReport:
    """Measure how well ``curve`` satisfies the boundary condition of its regime.

    The probe points cover the decade ending at the grid point closest to
    the boundary.
    """
    hi = float(curve.grid[-1])
    x = -np.geomspace(10.0 * -hi, -hi, n_points)
    res = boundary_residual(curve(x), x, ev.regime)
    return decay_report(ev.regime, x, res)


def boundary_residual(values: np.ndarray, x, regime: str) -> np.ndarray:
    """Pointwise boundary-condition residual of samples ``values`` (shape ``(n, 4)``).

    ``"sub"``: ``|(gamma^1 + i) u| / sqrt(-x)`` in the sum of component moduli.
    ``"super"``: ``max_i |u_i|``.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(values)
    if regime == SUB:
        return (np.abs(u[:, 0] + u[:, 2]) + np.abs(u[:, 1] - u[:, 3])) / np.sqrt(-x)
    return np.max(np.abs(u), axis=1)


def decay_report(regime: str, x, res) -> BoundaryReport:
    """Fit the log-log slope of ``res`` against ``-x``; positive means decay."""
    x = np.asarray(x, dtype=float)
    res = np.asarray(res, dtype=float)
    tiny = np.finfo(float).tiny
    if np.all(res <= tiny):
        exponent = math.inf
    else:
        exponent = float(np.polyfit(np.log(-x), np.log(np.maximum(res, tiny)), 1)[0])
    return BoundaryReport(regime, x, res, float(np.max(res)), exponent, exponent > 0)


def regular_bound_constant(ev: PotentialEvaluator, lam: complex) -> float:
    """``c_0`` in the term bounds: ``6 C k/(1 - 2ml)`` below, ``6 C k`` above the threshold."""
    C = ev.regular_potential_bound(lam)
    c0 = 6.0 * C * ev.k
    if ev.regime == SUB:
        c0 /= 1.0 - 2.0 * ev.ml
    return c0


def series_term_bound(ev: PotentialEvaluator, lam: complex, seed: BoundarySeed, x, n: int) -> np.ndarray:
    """``N (-x)^e (c_0 (-x))^n / n!``, the bound on each component of ``phi_n``."""
    x = np.asarray(x, dtype=float)
    c0 = regular_bound_constant(ev, lam)
    y = -x
    return seed.norm_constant * y ** seed.power(ev.ml) * (c0 * y) ** n / math.factorial(n)


def global_bound(ev: PotentialEvaluator, lam: complex, seed: BoundarySeed, x) -> np.ndarray:
    """``4 N (-x)^e exp(-c_0 x)``, the bound on the whole boundary solution."""
    x = np.asarray(x, dtype=float)
    c0 = regular_bound_constant(ev, lam)
    return 4.0 * seed.norm_constant * (-x) ** seed.power(ev.ml) * np.exp(-c0 * x)
