"""Green kernel of the separated Dirac operator and its weighted continuation.

With a boundary solution ``phi``, a horizon (Jost) solution ``psi`` and their
twists ``phi~``, ``psi~`` the resolvent ``R(lam) = (H - lam)^-1`` acts as

    (R f)(x) = [phi(x) int_{-inf}^x psi^t G f + phi~(x) int_{-inf}^x psi~^t G f
                + psi(x) int_x^0 phi^t G f + psi~(x) int_x^0 phi~^t G f],

with ``G = M_{alpha,beta}^-1 i Gamma^1``.  The pairs ``alpha``, ``beta`` are
``x``-independent bilinear forms of ``phi`` and ``psi``; ``M_{alpha,beta}`` is
singular exactly when ``alpha^2 = beta^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .boundary_solver import BoundaryReport, BoundarySeed, boundary_residual, boundary_solution, decay_report
from .errors import AtResonanceError, InvalidParameterError, OutOfStripError
from .jost_solver import jost_solution
from .potentials import PotentialEvaluator
from .radial import SolutionCurve, cumulative_simpson_c
from .spinor_algebra import GAMMA1_BIG

__all__ = [
    "WronskianPair",
    "alpha_beta",
    "wronskians",
    "m_alpha_beta",
    "det_m_alpha_beta",
    "tol_res",
    "ResolventKernel",
    "apply_resolvent",
    "resolvent_residual",
    "weighted_resolvent",
    "inner_product",
]

_S1 = np.array([1.0, -1.0, -1.0, 1.0])


def alpha_beta(phi: np.ndarray, psi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise ``alpha`` and ``beta`` of two solution samples (last axis = 4)."""
    p1, p2, p3, p4 = np.moveaxis(np.asarray(phi), -1, 0)
    q1, q2, q3, q4 = np.moveaxis(np.asarray(psi), -1, 0)
    alpha = p1 * q2 - q1 * p2 + p3 * q4 - q3 * p4
    beta = p1 * q3 - q1 * p3 + p2 * q4 - q2 * p4
    return alpha, beta


def tol_res(alpha: complex, beta: complex) -> float:
    """Pole-detection threshold ``1e-8 (|alpha|^2 + |beta|^2 + 1)``."""
    return 1e-8 * (abs(alpha) ** 2 + abs(beta) ** 2 + 1.0)


@dataclass
class WronskianPair:
    """The constants ``alpha``, ``beta`` at one spectral point.

    Attributes
    ----------
    lam : complex
    alpha, beta : complex
        Means over the matching points.
    variation : float
        Largest deviation from the mean over the points, relative to
        ``|alpha| + |beta|``.
    points : tuple of float
    """

    lam: complex
    alpha: complex
    beta: complex
    variation: float
    points: tuple

    @property
    def determinant(self) -> complex:
        """``D = alpha^2 - beta^2``."""
        return self.alpha**2 - self.beta**2

    @property
    def tolerance(self) -> float:
        return tol_res(self.alpha, self.beta)


def wronskians(phi: SolutionCurve, psi: SolutionCurve, points=(-0.5, -1.0, -2.0)) -> WronskianPair:
    """Evaluate ``alpha`` and ``beta`` at several matching points."""
    if phi.lam != psi.lam:
        raise InvalidParameterError("curves belong to different spectral points")
    lo = max(phi.span[0], psi.span[0])
    hi = min(phi.span[1], psi.span[1])
    pts = np.array([p for p in points if lo <= p <= hi], dtype=float)
    if pts.size == 0:
        raise InvalidParameterError(f"no matching point inside the overlap [{lo}, {hi}]")
    a, b = alpha_beta(phi(pts), psi(pts))
    am, bm = complex(np.mean(a)), complex(np.mean(b))
    scale = abs(am) + abs(bm)
    var = float(max(np.max(np.abs(a - am)), np.max(np.abs(b - bm))) / scale) if scale > 0 else 0.0
    return WronskianPair(phi.lam, am, bm, var, tuple(pts.tolist()))


def m_alpha_beta(alpha: complex, beta: complex, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """The matching matrix ``M_{alpha,beta}`` and its inverse.

    Raises
    ------
    AtResonanceError
        If ``|alpha^2 - beta^2| <= tol_res(alpha, beta)``.
    """
    a, b = complex(alpha), complex(beta)
    M = np.array([[0, a, b, 0], [-a, 0, 0, b], [-b, 0, 0, a], [0, -b, -a, 0]], dtype=complex)
    d = (a - b) * (a + b)
    if check and abs(d) <= tol_res(a, b):
        raise AtResonanceError(f"alpha^2 - beta^2 = {d:.3e} is below the pole threshold")
    if d == 0:
        raise AtResonanceError("M_{alpha,beta} is singular")
    return M, np.linalg.inv(M)


def det_m_alpha_beta(alpha: complex, beta: complex) -> complex:
    """``det M_{alpha,beta} = ((alpha - beta)(alpha + beta))^2``."""
    return ((alpha - beta) * (alpha + beta)) ** 2


def inner_product(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> complex:
    """``int sum_i u_i conj(v_i) dx`` by the trapezoid rule."""
    return complex(np.trapezoid(np.sum(u * np.conj(v), axis=1), x))


class ResolventKernel:
    """Solutions, matching data and quadrature for one spectral point.

    Parameters
    ----------
    ev : PotentialEvaluator
    lam : complex
    x_lo, x_hi : float
        Interval that must be covered by all four curves.
    seed : BoundarySeed, optional
        Boundary seed of ``phi``, canonical by default.  Seeds with
        ``|p| = |q|`` are rejected: the twist maps them to multiples of
        themselves.
    x_match : float
        Matching point for ``alpha`` and ``beta``.
    continued : bool, optional
        Use the ``Phi3`` Jost solution also below the real axis (the
        meromorphic continuation).  By default the physical resolvent is
        built: ``Phi3`` for ``Im lam >= 0`` and ``Phi1`` below.
    jost_kind : str, optional
        Overrides the choice of ``psi`` (``"Phi2"`` gives the twisted pair).
    rtol : float
        Integrator tolerance for both solution families.
    x0 : float
        Series hand-over point of the boundary solution.
    """

    def __init__(
        self,
        ev: PotentialEvaluator,
        lam: complex,
        x_lo: float,
        x_hi: float,
        seed: BoundarySeed | None = None,
        x_match: float = -1.0,
        continued: bool | None = None,
        jost_kind: str | None = None,
        rtol: float = 1e-10,
        x0: float = -1e-4,
    ):
        lam = complex(lam)
        self.ev = ev
        self.lam = lam
        if jost_kind is None:
            if continued is None:
                continued = lam.imag >= 0
            jost_kind = "Phi3" if (continued or lam.imag >= 0) else "Phi1"
        self.jost_kind = jost_kind
        if seed is not None and seed.twist_degenerate:
            raise InvalidParameterError("seed is a twist eigenvector; phi and its twist would be dependent")
        self.x_match = x_match
        self.psi = jost_solution(ev, lam, jost_kind, x_end=max(x_hi, x_match), rtol=rtol)
        b_lo = min(x_lo, x_match)
        self.phi = boundary_solution(ev, lam, seed, x_end=b_lo, x0=min(x0, 0.5 * x_match), rtol=rtol)
        if x_lo < self.psi.span[0]:
            raise InvalidParameterError("x_lo lies left of the Jost starting point")
        self.phi_t = self.phi.twisted()
        self.psi_t = self.psi.twisted()
        a, b = alpha_beta(self.phi(x_match)[0], self.psi(x_match)[0])
        self.pair = WronskianPair(lam, complex(a), complex(b), 0.0, (x_match,))
        self.M, self.M_inv = m_alpha_beta(self.pair.alpha, self.pair.beta)
        self.G = self.M_inv @ (1j * GAMMA1_BIG)

    def kernel(self, x: float, y: float) -> np.ndarray:
        """The 4x4 kernel ``R(x, y, lam)``."""
        if y < x:
            left, right = (self.phi, self.psi), (self.phi_t, self.psi_t)
        else:
            left, right = (self.psi, self.phi), (self.psi_t, self.phi_t)
        a = np.outer(left[0](x)[0], left[1](y)[0]) + np.outer(right[0](x)[0], right[1](y)[0])
        return a @ self.G

    def _densities(self, x, f):
        G = self.G
        dens = {}
        for name, c in (("psi", self.psi), ("psi_t", self.psi_t), ("phi", self.phi), ("phi_t", self.phi_t)):
            v = c(x)
            dens[name] = (v, np.einsum("ni,ij,nj->n", v, G, f))
        return dens

    def apply(self, x, f, rule: str = "simpson") -> np.ndarray:
        """``R(lam) f`` on the sample grid of ``f`` (``f = 0`` outside the grid).

        Uses the rank-2 split of the kernel: four cumulative integrals, O(n).
        """
        x = np.asarray(x, dtype=float)
        f = np.asarray(f, dtype=complex)
        if f.shape != (len(x), 4):
            raise InvalidParameterError("f must have shape (len(x), 4)")
        if np.any(np.diff(x) <= 0):
            raise InvalidParameterError("grid must be strictly increasing")
        if rule == "simpson":
            cum = lambda g: cumulative_simpson_c(g, x)  # noqa: E731
        elif rule == "trapezoid":
            cum = lambda g: cumulative_trapezoid(g, x, initial=0.0)  # noqa: E731
        else:
            raise InvalidParameterError(f"unknown quadrature rule {rule!r}")
        d = self._densities(x, f)
        i_psi = cum(d["psi"][1])
        i_psi_t = cum(d["psi_t"][1])
        c_phi = cum(d["phi"][1])
        c_phi_t = cum(d["phi_t"][1])
        j_phi = c_phi[-1] - c_phi
        j_phi_t = c_phi_t[-1] - c_phi_t
        return (
            d["phi"][0] * i_psi[:, None]
            + d["phi_t"][0] * i_psi_t[:, None]
            + d["psi"][0] * j_phi[:, None]
            + d["psi_t"][0] * j_phi_t[:, None]
        )

    def apply_outside(self, x, f, x_out) -> np.ndarray:
        """``R(lam) f`` at points outside the support grid of ``f``."""
        x = np.asarray(x, dtype=float)
        x_out = np.asarray(x_out, dtype=float)
        if np.any((x_out > x[0]) & (x_out < x[-1])):
            raise InvalidParameterError("x_out must lie outside the support grid")
        d = self._densities(x, np.asarray(f, dtype=complex))
        tot = {k: complex(cumulative_simpson_c(v[1], x)[-1]) for k, v in d.items()}
        right = x_out >= x[-1]
        out = np.empty((len(x_out), 4), dtype=complex)
        if np.any(right):
            xr = x_out[right]
            out[right] = self.phi(xr) * tot["psi"] + self.phi_t(xr) * tot["psi_t"]
        if np.any(~right):
            xl = x_out[~right]
            out[~right] = self.psi(xl) * tot["phi"] + self.psi_t(xl) * tot["phi_t"]
        return out

    def boundary_report(self, x, f, x_near: float = -1e-8, n_points: int = 25) -> BoundaryReport:
        """Boundary-condition decay of ``R f`` over the decade ending at ``x_near``.

        ``x_near`` must lie to the right of the support grid of ``f``.
        """
        if not float(np.asarray(x)[-1]) < 10.0 * x_near:
            raise InvalidParameterError("the probed decade must lie right of the support of f")
        xo = -np.geomspace(-10.0 * x_near, -x_near, n_points)
        u = self.apply_outside(x, f, xo)
        return decay_report(self.ev.regime, xo, boundary_residual(u, xo, self.ev.regime))

    def apply_direct(self, x, f) -> np.ndarray:
        """``R(lam) f`` from the full O(n^2) kernel matrix and the trapezoid rule.

        The kernel jumps by ``i Gamma^1`` across ``y = x``; the diagonal takes
        the mean of both sides.
        """
        x = np.asarray(x, dtype=float)
        f = np.asarray(f, dtype=complex)
        n = len(x)
        w = np.zeros(n)
        w[1:] += 0.5 * np.diff(x)
        w[:-1] += 0.5 * np.diff(x)
        Gf = f @ self.G.T
        below = np.tril(np.ones((n, n)), -1) + 0.5 * np.eye(n)  # y < x
        above = np.triu(np.ones((n, n)), 1) + 0.5 * np.eye(n)  # y > x
        curves = (self.phi(x), self.phi_t(x), self.psi(x), self.psi_t(x))
        phi, phit, psi, psit = curves
        dens = [np.einsum("ik,ik->i", c, Gf) * w for c in (psi, psit, phi, phit)]
        a1 = below @ dens[0]
        a2 = below @ dens[1]
        a3 = above @ dens[2]
        a4 = above @ dens[3]
        return phi * a1[:, None] + phit * a2[:, None] + psi * a3[:, None] + psit * a4[:, None]


def apply_resolvent(
    ev: PotentialEvaluator,
    lam: complex,
    x,
    f,
    seed: BoundarySeed | None = None,
    x_match: float = -1.0,
    rtol: float = 1e-10,
    continued: bool | None = None,
    jost_kind: str | None = None,
) -> np.ndarray:
    """``R(lam) f`` for samples ``f`` of shape ``(len(x), 4)`` on an increasing grid."""
    x = np.asarray(x, dtype=float)
    k = ResolventKernel(ev, lam, float(x[0]), float(x[-1]), seed=seed, x_match=x_match, rtol=rtol,
                        continued=continued, jost_kind=jost_kind)
    return k.apply(x, f)


def resolvent_residual(ev: PotentialEvaluator, lam: complex, x, u, f) -> float:
    """``|(H - lam) u - f|_2 / |f|_2`` with fourth-order central differences.

    The grid must be uniform; the two points nearest each end are skipped.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=complex)
    f = np.asarray(f, dtype=complex)
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise InvalidParameterError("resolvent_residual needs a uniform grid")
    h = h[0]
    du = (-u[4:] + 8 * u[3:-1] - 8 * u[1:-3] + u[:-4]) / (12 * h)
    xi = x[2:-2]
    ui = u[2:-2]
    V = ev.potential_matrix_Vm(xi)
    Hu = -1j * _S1 * du + np.einsum("nij,nj->ni", V, ui)
    r = Hu - complex(lam) * ui - f[2:-2]
    num = np.sqrt(np.trapezoid(np.sum(np.abs(r) ** 2, axis=1), xi))
    den = np.sqrt(np.trapezoid(np.sum(np.abs(f[2:-2]) ** 2, axis=1), xi))
    if den == 0:
        raise InvalidParameterError("f vanishes on the interior of the grid")
    return float(num / den)


def weighted_resolvent(
    ev: PotentialEvaluator,
    lam: complex,
    eps: float,
    x,
    f,
    seed: BoundarySeed | None = None,
    x_match: float = -1.0,
    rtol: float = 1e-10,
    margin: float = 1e-3,
) -> np.ndarray:
    """``e^{eps x} R(lam) e^{eps y} f``, continued into ``Im lam > -eps``.

    Parameters
    ----------
    eps : float
        Weight exponent, ``0 < eps < kappa/2``.
    """
    lam = complex(lam)
    if not 0 < eps < ev.kappa / 2:
        raise InvalidParameterError(f"eps must lie in (0, kappa/2) = (0, {ev.kappa / 2:.6g})")
    if not lam.imag > -eps + margin * ev.kappa:
        raise OutOfStripError(f"Im(lambda) must exceed -eps = {-eps:.6g}")
    x = np.asarray(x, dtype=float)
    w = np.exp(eps * x)[:, None]
    k = ResolventKernel(ev, lam, float(x[0]), float(x[-1]), seed=seed, x_match=x_match, rtol=rtol, continued=True)
    return w * k.apply(x, w * np.asarray(f, dtype=complex))
