"""Resonances as zeros of ``D(lam) = alpha(lam)^2 - beta(lam)^2``.

``D`` is built from the ``Phi3`` Jost solution and the boundary solution, both
holomorphic in ``Im lam > -kappa/2``; its zeros are the poles of the weighted
resolvent.  The finder scans a rectangle, refines local minima of ``|D|`` by a
secant iteration with a Muller fallback, and confirms each root with the
argument principle.
"""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boundary_solver import BoundarySeed, boundary_solution
from .errors import ConvergenceError, InconclusiveError, InvalidParameterError, OutOfStripError, SadsError
from .jost_solver import check_strip, jost_solution
from .potentials import PotentialEvaluator
from .resolvent import WronskianPair, alpha_beta

__all__ = [
    "DeterminantFunction",
    "determinant",
    "determinant_pair",
    "ScanRegion",
    "ScanField",
    "scan",
    "count_zeros",
    "Resonance",
    "refine",
    "find_resonances",
    "default_epsilon",
]


def default_epsilon(ev: PotentialEvaluator) -> float:
    """Weight exponent ``0.45 kappa``."""
    return 0.45 * ev.kappa


def determinant_pair(
    ev: PotentialEvaluator,
    lam: complex,
    x_match: float = -1.0,
    rtol: float = 1e-10,
    x0: float = -1e-4,
    seed: BoundarySeed | None = None,
    margin: float = 1e-3,
) -> WronskianPair:
    """``alpha``, ``beta`` of the ``Phi3`` Jost and the boundary solution at ``x_match``."""
    lam = complex(lam)
    check_strip(ev, lam, "Phi3", margin)
    psi = jost_solution(ev, lam, "Phi3", grid=np.array([x_match - 1.0, x_match]), rtol=rtol, margin=margin)
    phi = boundary_solution(ev, lam, seed, grid=np.array([x_match]), x0=min(x0, 0.5 * x_match), rtol=rtol)
    a, b = alpha_beta(phi(x_match)[0], psi(x_match)[0])
    return WronskianPair(lam, complex(a), complex(b), 0.0, (float(x_match),))


def determinant(ev: PotentialEvaluator, lam: complex, **kwargs) -> complex:
    """``D(lam) = alpha^2 - beta^2``; keyword arguments as in :func:`determinant_pair`."""
    return determinant_pair(ev, lam, **kwargs).determinant


@dataclass
class DeterminantFunction:
    """Picklable ``lam -> D(lam)`` with fixed numerical options."""

    ev: PotentialEvaluator
    x_match: float = -1.0
    rtol: float = 1e-10
    x0: float = -1e-4
    seed: BoundarySeed | None = None
    margin: float = 1e-3

    def pair(self, lam: complex) -> WronskianPair:
        return determinant_pair(self.ev, lam, self.x_match, self.rtol, self.x0, self.seed, self.margin)

    def __call__(self, lam: complex) -> complex:
        return self.pair(lam).determinant

    def scale(self, lam: complex) -> float:
        """Local size of ``D``: ``|alpha|^2 + |beta|^2``."""
        p = self.pair(lam)
        return abs(p.alpha) ** 2 + abs(p.beta) ** 2

    def strip_ok(self, lam: complex) -> bool:
        return -complex(lam).imag < self.ev.kappa * (0.5 - self.margin)


@dataclass(frozen=True)
class ScanRegion:
    """Rectangle ``[re_min, re_max] x [im_min, im_max]`` sampled on ``nx x ny`` points.

    ``nx = 0`` or ``ny = 0`` describes an empty scan; otherwise both must be
    at least 4.  ``im_min`` must exceed ``-epsilon``.
    """

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int
    epsilon: float

    def __post_init__(self):
        vals = (self.re_min, self.re_max, self.im_min, self.im_max, self.epsilon)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError("region bounds must be finite")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise InvalidParameterError("region must have positive width and height")
        if self.nx < 0 or self.ny < 0 or (self.nx * self.ny > 0 and min(self.nx, self.ny) < 4):
            raise InvalidParameterError("nx and ny must be >= 4 (or zero for an empty scan)")
        if not self.im_min > -self.epsilon:
            raise OutOfStripError(f"im_min = {self.im_min} must exceed -epsilon = {-self.epsilon}")

    def validate(self, ev: PotentialEvaluator) -> None:
        """Check ``0 < epsilon < kappa/2`` for the given background."""
        if not 0 < self.epsilon < ev.kappa / 2:
            raise InvalidParameterError(f"epsilon must lie in (0, kappa/2) = (0, {ev.kappa / 2:.6g})")

    @property
    def empty(self) -> bool:
        return self.nx * self.ny == 0

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(self.re_min, self.re_max, self.nx), np.linspace(self.im_min, self.im_max, self.ny)

    def points(self) -> np.ndarray:
        """Sample points, shape ``(ny, nx)``."""
        re, im = self.axes()
        return re[None, :] + 1j * im[:, None]

    def refined(self, factor: int = 2) -> "ScanRegion":
        """Same rectangle with ``factor`` times the grid spacing density."""
        return ScanRegion(self.re_min, self.re_max, self.im_min, self.im_max,
                          factor * (self.nx - 1) + 1, factor * (self.ny - 1) + 1, self.epsilon)


@dataclass
class ScanField:
    """``D`` sampled on a region; failed cells hold NaN and are listed in ``failures``."""

    region: ScanRegion
    lam: np.ndarray
    D: np.ndarray
    scale: np.ndarray
    failures: dict = field(default_factory=dict)

    @property
    def normalized(self) -> np.ndarray:
        """``|D| / (|alpha|^2 + |beta|^2)``."""
        return np.abs(self.D) / self.scale

    def local_minima(self) -> list[tuple[int, int]]:
        """Indices of cells whose normalized ``|D|`` is a minimum of their 3x3 neighbourhood."""
        a = self.normalized
        ny, nx = a.shape
        out = []
        for j in range(ny):
            for i in range(nx):
                v = a[j, i]
                if not np.isfinite(v):
                    continue
                nb = a[max(j - 1, 0) : j + 2, max(i - 1, 0) : i + 2]
                if v <= np.nanmin(nb):
                    out.append((j, i))
        return out

    def rows(self):
        """Flat records ``(re, im, D.re, D.im, |D|, scale)``."""
        lam = self.lam.ravel()
        D = self.D.ravel()
        return np.column_stack([lam.real, lam.imag, D.real, D.imag, np.abs(D), self.scale.ravel()])


def _scan_cell(args):
    fn, lam = args
    try:
        p = fn.pair(lam)
        return p.determinant, abs(p.alpha) ** 2 + abs(p.beta) ** 2, None
    except SadsError as exc:
        return complex("nan"), float("nan"), f"{type(exc).__name__}: {exc}"


def _map(func, items, threads):
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * threads))))


def scan(fn: DeterminantFunction, region: ScanRegion, threads: int | None = None) -> ScanField:
    """Sample ``D`` on the region grid, in parallel over ``threads`` processes."""
    region.validate(fn.ev)
    if region.empty:
        z = np.zeros((region.ny, region.nx))
        return ScanField(region, z.astype(complex), z.astype(complex), z)
    lam = region.points()
    res = _map(_scan_cell, [(fn, complex(v)) for v in lam.ravel()], threads)
    D = np.array([r[0] for r in res], dtype=complex).reshape(lam.shape)
    sc = np.array([r[1] for r in res], dtype=float).reshape(lam.shape)
    failures = {}
    for idx, r in enumerate(res):
        if r[2] is not None:
            failures[np.unravel_index(idx, lam.shape)] = r[2]
    return ScanField(region, lam, D, sc, failures)


def _contour(rect):
    re0, re1, im0, im1 = rect
    return [complex(re0, im0), complex(re1, im0), complex(re1, im1), complex(re0, im1)]


def _winding_once(D, rect, n_edge, max_depth, zero_tol):
    corners = _contour(rect)
    total = 0.0
    cache = {}

    def val(z):
        if z not in cache:
            cache[z] = complex(D(z))
        return cache[z]

    scale = 0.0
    for c in corners:
        scale = max(scale, abs(val(c)))
    for a, b in zip(corners, corners[1:] + corners[:1]):
        ts = np.linspace(0.0, 1.0, n_edge + 1)
        stack = [(a + (b - a) * t0, a + (b - a) * t1, 0) for t0, t1 in zip(ts[-2::-1], ts[:0:-1])]
        while stack:
            z0, z1, depth = stack.pop()
            d0, d1 = val(z0), val(z1)
            scale = max(scale, abs(d0), abs(d1))
            if min(abs(d0), abs(d1)) <= zero_tol * scale:
                return None
            dphi = cmath.phase(d1 / d0)
            if abs(dphi) > math.pi / 4:
                if depth < max_depth:
                    zm = 0.5 * (z0 + z1)
                    stack.append((zm, z1, depth + 1))
                    stack.append((z0, zm, depth + 1))
                    continue
                if abs(dphi) >= math.pi * (1 - 1e-12):
                    raise InconclusiveError(f"phase jump {dphi:.3f} between {z0} and {z1} after refinement")
            total += dphi
    return total / (2 * math.pi)


def count_zeros(D, rect, n_edge: int = 8, max_depth: int = 10, zero_tol: float = 1e-10, nudges: int = 3) -> int:
    """Number of zeros of ``D`` inside ``rect = (re_min, re_max, im_min, im_max)``.

    The phase of ``D`` is accumulated along the boundary, bisecting every
    segment on which it turns by more than ``pi/4``.  If ``D`` nearly vanishes
    on the contour the rectangle is enlarged by 1% of its size and the count
    repeated.

    Raises
    ------
    InconclusiveError
        If a phase jump of ``pi`` or more survives ``max_depth`` bisections,
        or ``D`` vanishes on every nudged contour.
    """
    re0, re1, im0, im1 = (float(v) for v in rect)
    if not (re0 < re1 and im0 < im1):
        raise InvalidParameterError("rectangle must have positive width and height")
    for _ in range(nudges + 1):
        w = _winding_once(D, (re0, re1, im0, im1), n_edge, max_depth, zero_tol)
        if w is not None:
            n = round(w)
            if abs(w - n) > 1e-3:
                raise InconclusiveError(f"non-integer winding {w:.6f}")
            return int(n)
        dr, di = 0.01 * (re1 - re0), 0.01 * (im1 - im0)
        re0, re1, im0, im1 = re0 - dr, re1 + dr, im0 - di, im1 + di
    raise InconclusiveError("D vanishes on the contour after nudging")


@dataclass
class Resonance:
    """A refined zero of ``D``.

    Attributes
    ----------
    lam : complex
    abs_D : float
        ``|D(lam)|``.
    scale : float
        Local size ``|alpha|^2 + |beta|^2`` of ``D``.
    winding : int or None
        Zero count of a small box around ``lam`` (``None`` if not checked).
    iterations : int
        Length of the refinement history.
    history : list of complex
    """

    lam: complex
    abs_D: float
    scale: float
    winding: int | None
    iterations: int
    history: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "lambda_re": self.lam.real,
            "lambda_im": self.lam.imag,
            "abs_D": self.abs_D,
            "winding": self.winding,
        }


def _muller(f, z0, z1, z2, f0, f1, f2):
    h1, h2 = z1 - z0, z2 - z1
    d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
    a = (d2 - d1) / (h2 + h1)
    b = a * h2 + d2
    disc = cmath.sqrt(b * b - 4 * f2 * a)
    den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
    if den == 0:
        return None
    return z2 - 2 * f2 / den


def refine(
    D,
    lam0: complex,
    lam1: complex | None = None,
    tol: float = 1e-12,
    step_tol: float = 1e-10,
    max_iter: int = 60,
    in_domain=None,
) -> tuple[complex, complex, list]:
    """Secant iteration on ``D`` from ``lam0`` (and ``lam1``), Muller on stagnation.

    Converged when ``|D| < tol`` and the last step is below ``step_tol``
    (relative to ``max(1, |lam|)``).

    Returns
    -------
    lam, D(lam), history

    Raises
    ------
    ConvergenceError
        No convergence in ``max_iter`` iterations.
    OutOfStripError
        The iterate leaves the domain accepted by ``in_domain``.
    """
    z0 = complex(lam0)
    z1 = complex(lam1) if lam1 is not None else z0 + 1e-3 * max(1.0, abs(z0))
    f0, f1 = complex(D(z0)), complex(D(z1))
    hist = [z0, z1]
    pts = [(z0, f0), (z1, f1)]
    for _ in range(max_iter):
        (za, fa), (zb, fb) = pts[-2], pts[-1]
        if fb == fa:
            znew = None
        else:
            znew = zb - fb * (zb - za) / (fb - fa)
        if znew is None or not np.isfinite(znew) or (len(pts) >= 3 and abs(fb) > 0.9 * abs(fa)):
            if len(pts) >= 3:
                znew = _muller(D, *[p[0] for p in pts[-3:]], *[p[1] for p in pts[-3:]])
            if znew is None or not np.isfinite(znew):
                znew = zb + 1e-3 * (zb - za) + 1e-8
        if in_domain is not None and not in_domain(znew):
            raise OutOfStripError(f"refinement left the search domain at {znew}")
        fnew = complex(D(znew))
        hist.append(znew)
        step = abs(znew - zb)
        pts.append((znew, fnew))
        if abs(fnew) < tol and step < step_tol * max(1.0, abs(znew)):
            return znew, fnew, hist
        if fnew == 0:
            return znew, fnew, hist
    raise ConvergenceError(f"no convergence in {max_iter} iterations (last {pts[-1][0]})")


def _refine_candidate(args):
    fn, z0, z1, box, rel_tol = args
    try:
        sc = fn.scale(z0)
        re0, re1, im0, im1 = box

        def ok(z):
            return fn.strip_ok(z) and re0 <= z.real <= re1 and im0 <= z.imag <= im1

        lam, d, hist = refine(fn, z0, z1, tol=rel_tol * sc, in_domain=ok)
        sc = fn.scale(lam)
        return lam, d, sc, hist, None
    except SadsError as exc:
        return None, None, None, None, f"{type(exc).__name__}: {exc}"


def find_resonances(
    fn: DeterminantFunction,
    region: ScanRegion,
    threads: int | None = None,
    field_: ScanField | None = None,
    rel_tol: float = 1e-10,
    check_winding: bool = True,
) -> tuple[list[Resonance], ScanField, list[str]]:
    """Scan, refine every local minimum of ``|D|`` and confirm by winding.

    Each candidate is refined inside a box of three grid cells around its
    scan point; candidates that leave the box are dropped with a note.

    Returns
    -------
    resonances : list of Resonance
        Distinct roots inside the region, sorted by real part.
    field : ScanField
    notes : list of str
        Candidates that failed to converge or left the region.
    """
    if field_ is None:
        field_ = scan(fn, region, threads)
    if region.empty:
        return [], field_, []
    re, im = region.axes()
    dx, dy = re[1] - re[0], im[1] - im[0]
    cands = []
    for j, i in field_.local_minima():
        z0 = complex(field_.lam[j, i])
        box = (z0.real - 3 * dx, z0.real + 3 * dx, z0.imag - 3 * dy, z0.imag + 3 * dy)
        cands.append((fn, z0, z0 + complex(0.25 * dx, 0.25 * dy), box, rel_tol))
    results = _map(_refine_candidate, cands, threads)
    found: list[Resonance] = []
    notes = []
    for (_, z0, *_), (lam, d, sc, hist, err) in zip(cands, results):
        if err is not None:
            notes.append(f"{z0}: {err}")
            continue
        inside = region.re_min <= lam.real <= region.re_max and region.im_min <= lam.imag <= region.im_max
        if not inside:
            notes.append(f"{z0}: converged outside the region to {lam}")
            continue
        if any(abs(lam - r.lam) < 1e-6 * max(1.0, abs(lam)) for r in found):
            continue
        found.append(Resonance(lam, abs(d), sc, None, len(hist), hist))
    if check_winding:
        for r in found:
            h = 0.25 * min(dx, dy)
            box = (r.lam.real - h, r.lam.real + h, r.lam.imag - h, r.lam.imag + h)
            r.winding = count_zeros(fn, box)
    found.sort(key=lambda r: r.lam.real)
    return found, field_, notes
