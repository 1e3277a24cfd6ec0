"""Acceptance criteria; each test prints one PASS/FAIL line."""

import itertools
import math
import time

import numpy as np
from conftest import bump_data, record

from sadsdirac.boundary_solver import BoundarySeed, boundary_series, boundary_solution, series_term_bound
from sadsdirac.geometry import (
    BlackHoleParams,
    horizon_radius_bisection,
    horizon_radius_closed_form,
    surface_gravity,
    tortoise,
)
from sadsdirac.jost_solver import jost_growth_bound, jost_solution, picard_jost
from sadsdirac.resolvent import (
    ResolventKernel,
    apply_resolvent,
    det_m_alpha_beta,
    inner_product,
    m_alpha_beta,
    resolvent_residual,
    weighted_resolvent,
    wronskians,
)
from sadsdirac.resonance_finder import (
    DeterminantFunction,
    ScanRegion,
    count_zeros,
    find_resonances,
    refine,
    scan,
)
from sadsdirac.spinor_algebra import MINKOWSKI, frobenius_m0, gamma

X_OF_2 = -0.48987194547383717  # partial-fraction closed form at M = l = 1, r = 2


def x_partial_fractions(r):
    s7 = math.sqrt(7.0)
    g = 0.25 * math.log(r - 1) - 0.125 * math.log(r * r + r + 2) + 5.0 / (4 * s7) * math.atan((2 * r + 1) / s7)
    return g - 5.0 / (4 * s7) * math.pi / 2


def rel(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))


def test_01_geometry():
    t = time.perf_counter()
    r_cf = horizon_radius_closed_form(1.0, 1.0)
    r_bi = horizon_radius_bisection(1.0, 1.0)
    kappa = surface_gravity(1.0, 1.0)
    x2 = float(tortoise(BlackHoleParams(1.0, 1.0), 2.0))
    dt = time.perf_counter() - t
    errs = (abs(r_cf - 1), abs(r_bi - 1), abs(r_cf - r_bi), abs(kappa - 2), abs(x2 - x_partial_fractions(2.0)))
    ok = max(errs[:4]) < 1e-10 and errs[4] < 1e-6 and abs(x2 + 0.4899) < 1e-4 and dt < 1.0
    record(1, "geometry", ok, f"r={r_cf:.15f} kappa={kappa:.15f} x(2)={x2:.12f} max err={max(errs):.1e} t={dt:.3f}s")
    assert ok


def test_02_potential_asymptotics(ev):
    t = time.perf_counter()
    a = abs(ev.potential_A(-1e-3) - 1.0)
    b = abs(ev.potential_B(-1e-3) + 1.0 / -1e-3)
    slopes = [(math.log(f(-10.0)) - math.log(f(-12.0))) / 2.0 for f in (ev.potential_A, ev.potential_B)]
    dt = time.perf_counter() - t
    s_err = max(abs(s - ev.kappa) for s in slopes)
    ok = a < 1e-5 and b < 1e-2 and s_err < 1e-3 and dt < 1.0
    record(2, "potential asymptotics", ok, f"|A-1/l|={a:.1e} |B+l/x|={b:.1e} slope err={s_err:.1e} t={dt:.3f}s")
    assert ok


def test_03_gamma_algebra():
    I4 = np.eye(4)
    cliff = max(
        float(np.max(np.abs(gamma(m) @ gamma(n) + gamma(n) @ gamma(m) - 2 * MINKOWSKI[m, n] * I4)))
        for m, n in itertools.product(range(4), repeat=2)
    )
    m0 = 0.0
    for ml in (0.3, 1.2):
        m0 = max(m0, float(np.max(np.abs(frobenius_m0(-1.0, ml) - I4))))
        for x in (-0.1, -0.5, -3.0):
            M = frobenius_m0(x, ml)
            m0 = max(m0, float(np.max(np.abs(M @ frobenius_m0(1 / x, ml) - I4))))
            m0 = max(m0, float(np.max(np.abs(M @ gamma(1) - gamma(1) @ M))))
    ok = cliff == 0.0 and m0 < 1e-12
    record(3, "gamma algebra", ok, f"16 Clifford relations max err={cliff:.1e}, M0 relations max err={m0:.1e}")
    assert ok


def test_04_jost_picard(ev):
    t = time.perf_counter()
    worst, bound_ok = 0.0, True
    for lam in (1j, 1 + 0.2j, 1 - 0.3 * ev.kappa * 1j):
        c = jost_solution(ev, lam, "Phi3", x_end=-0.2)
        for x in (-3.0, -1.0):
            worst = max(worst, rel(c(x)[0], picard_jost(ev, lam, "Phi3", x, 8)))
        norm = np.max(np.abs(c.values), axis=1)
        bound_ok &= bool(np.all(norm <= jost_growth_bound(ev, lam, c.grid) * (1 + 1e-8)))
    dt = time.perf_counter() - t
    ok = worst < 1e-6 and bound_ok and dt < 30
    record(4, "Jost vs Picard", ok, f"max rel diff={worst:.1e} growth bound={'holds' if bound_ok else 'violated'} t={dt:.1f}s")
    assert ok


def test_05_boundary_series(ev, ev_super):
    t = time.perf_counter()
    worst, bound_ok = 0.0, True
    for e in (ev, ev_super):
        for lam in (1j, 1 + 0.2j, 1 - 0.6j):
            seed = BoundarySeed(e.regime, (1.0, -0.5))
            ser = boundary_series(e, lam, seed, -0.1, 10)
            ode = boundary_solution(e, lam, seed, grid=np.array([-0.5, -0.1]), x0=-1e-6, rtol=1e-12)(-0.1)[0]
            worst = max(worst, rel(ser.top_terms().sum(axis=0), ode))
            x = ser.x
            terms = ser.terms()[:6]
            for n in range(6):
                bound = series_term_bound(e, lam, seed, x, n) * (1 + 1e-12)  # n = 0 attains the bound
                bound_ok &= bool(np.all(np.max(np.abs(terms[n]), axis=1) <= bound))
    dt = time.perf_counter() - t
    ok = worst < 1e-6 and bound_ok and dt < 30
    record(5, "boundary series", ok, f"max rel diff={worst:.1e} term bounds={'hold' if bound_ok else 'violated'} t={dt:.1f}s")
    assert ok


def test_06_wronskian(ev):
    var = 0.0
    for lam in (1j, 1 + 0.2j, 2 - 0.5j):
        psi = jost_solution(ev, lam, "Phi3", x_end=-0.2)
        phi = boundary_solution(ev, lam, x_end=-3.0)
        var = max(var, wronskians(phi, psi, points=(-0.5, -1.0, -2.0)).variation)
    rng = np.random.default_rng(11)
    det_err = 0.0
    for _ in range(50):
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        M, _ = m_alpha_beta(a, b)
        d = det_m_alpha_beta(a, b)
        det_err = max(det_err, abs(np.linalg.det(M) - d) / max(1.0, abs(d)))
    ok = var < 1e-6 and det_err < 1e-12
    record(6, "Wronskian constancy", ok, f"variation={var:.1e} det err={det_err:.1e}")
    assert ok


def test_07_resolvent_identity(ev, ev_super):
    t = time.perf_counter()
    x = np.linspace(-8.0, -0.2, 2001)
    f = bump_data(x, freq=1.0)
    g = bump_data(x, coeffs=(0.0, 1.0, 0.3j, 1.0 + 1.0j), freq=-2.0)
    k = ResolventKernel(ev, 1j, x[0], x[-1])
    u = k.apply(x, f)
    res = resolvent_residual(ev, 1j, x, u, f)
    v = apply_resolvent(ev, -1j, x, g)
    lhs = inner_product(x, u, g)
    adj = abs(lhs - inner_product(x, f, v)) / abs(lhs)
    sub = k.boundary_report(x, f)
    ks = ResolventKernel(ev_super, 1j, x[0], x[-1])
    sup = ks.boundary_report(x, f)
    res_s = resolvent_residual(ev_super, 1j, x, ks.apply(x, f), f)
    dt = time.perf_counter() - t
    ok = res < 1e-4 and res_s < 1e-4 and adj < 1e-6 and sub.satisfied and sup.satisfied and dt < 120
    record(7, "resolvent identity", ok, f"residual={res:.1e} (super {res_s:.1e}) adjoint={adj:.1e} "
           f"BC decay exponent sub={sub.exponent:.3f} super={sup.exponent:.3f} t={dt:.1f}s")
    assert ok


def test_08_no_upper_half_plane_poles(ev):
    t = time.perf_counter()
    fn = DeterminantFunction(ev)
    fld = scan(fn, ScanRegion(0.1, 5.0, 0.1, 2.0, 20, 10, 0.45 * ev.kappa))
    tol = 1e-8 * (fld.scale + 1.0)
    ratio = float(np.min(np.abs(fld.D) / tol))
    dt = time.perf_counter() - t
    ok = not fld.failures and ratio > 1.0 and dt < 300
    record(8, "no upper-half-plane poles", ok,
           f"min |D| = {np.min(np.abs(fld.D)):.3e}, min |D|/tol_res = {ratio:.2e} on 20x10 grid t={dt:.1f}s")
    assert ok


def test_09_meromorphic_continuation(ev):
    t = time.perf_counter()
    eps = 0.45 * ev.kappa
    x = np.linspace(-8.0, -0.2, 2001)
    f = bump_data(x, freq=1.0)
    v = {s: weighted_resolvent(ev, 0.5 + 1j * s, eps, x, f) for s in (1e-2, 2e-2, 3e-2, -1e-2)}
    extrap = 6 * v[1e-2] - 8 * v[2e-2] + 3 * v[3e-2]
    mismatch = rel(extrap, v[-1e-2])
    w = np.exp(eps * x)[:, None]
    ident = 0.0
    for lam in (0.5 + 0.1j, 2 + 1j):
        ident = max(ident, rel(weighted_resolvent(ev, lam, eps, x, f), w * apply_resolvent(ev, lam, x, w * f)))
    dt = time.perf_counter() - t
    ok = mismatch < 1e-2 and ident < 1e-8 and dt < 120
    record(9, "meromorphic continuation", ok,
           f"three-point mismatch={mismatch:.1e} weighted vs direct={ident:.1e} t={dt:.1f}s")
    assert ok


def test_10_resonance_self_consistency(ev):
    t = time.perf_counter()
    eps = 0.45 * ev.kappa
    region = ScanRegion(0.0, 6.0, -eps * (1 - 1e-9), -1e-3, 13, 5, eps)
    fn = DeterminantFunction(ev)
    coarse, _, notes_c = find_resonances(fn, region)
    fine, _, notes_f = find_resonances(fn, region.refined(2))
    total = count_zeros(fn, (region.re_min, region.re_max, region.im_min, region.im_max))
    residual_ok = all(r.abs_D < 1e-8 * r.scale for r in coarse + fine)
    winding_ok = all(r.winding is not None and r.winding >= 1 for r in coarse + fine)
    same = len(coarse) == len(fine) == total and all(
        abs(a.lam - b.lam) < 1e-6 for a, b in zip(coarse, fine)
    )
    shift = 0.0
    for kw in ({"rtol": 1e-11}, {"x_match": -0.5}):
        f2 = DeterminantFunction(ev, **kw)
        for r in coarse:
            lam, _, _ = refine(f2, r.lam + 1e-4, r.lam + 1e-4j, tol=1e-10 * r.scale)
            shift = max(shift, abs(lam - r.lam))
    dt = time.perf_counter() - t
    ok = residual_ok and winding_ok and same and shift < 1e-6 and dt < 600
    zeros = ", ".join(f"{r.lam:.10f}" for r in coarse) or "none"
    record(10, "resonance self-consistency", ok,
           f"zeros [{zeros}] count coarse/fine/winding={len(coarse)}/{len(fine)}/{total} "
           f"max shift={shift:.1e} t={dt:.0f}s")
    assert ok
