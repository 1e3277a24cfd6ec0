import math

import numpy as np
import pytest

from sadsdirac.boundary_solver import (
    BoundarySeed,
    boundary_limits,
    boundary_series,
    boundary_solution,
    check_boundary_condition,
    global_bound,
    series_term_bound,
)
from sadsdirac.errors import InvalidParameterError, SeedMismatchError
from sadsdirac.jost_solver import jost_solution
from sadsdirac.radial import ode_residual
from sadsdirac.spinor_algebra import GAMMA, TWIST

LAMS = [1j, 0.5 - 0.3j, 3 + 0.1j]


def test_seed_vectors():
    assert np.array_equal(BoundarySeed("sub", (1.0, 2.0)).vector, [2, 4, -2, 4])
    assert np.array_equal(BoundarySeed("super", (1.0, 2.0)).vector, [2, 4, 2, -4])
    assert BoundarySeed("sub", (3.0, -1.0)).norm_constant == 6.0
    with pytest.raises(InvalidParameterError):
        BoundarySeed("sub", (0.0, 0.0))
    with pytest.raises(InvalidParameterError):
        BoundarySeed("mid", (1.0, 0.0))


def test_sub_seed_in_kernel_of_reflecting_operator():
    g1 = GAMMA[1]
    for pair in [(1.0, 0.0), (0.0, 1.0), (0.4, -2.0)]:
        w = BoundarySeed("sub", pair).vector
        assert np.max(np.abs((g1 + 1j * np.eye(4)) @ w)) == 0


def test_twisted_seed_matches_twist_of_vector():
    for regime in ("sub", "super"):
        s = BoundarySeed(regime, (0.7, -0.2))
        np.testing.assert_allclose(TWIST @ s.vector, s.twisted().vector, atol=0)
        assert not s.twist_degenerate
    assert BoundarySeed("sub", (1.0, 1.0)).twist_degenerate


def test_regime_mismatch(ev, ev_super):
    with pytest.raises(SeedMismatchError):
        boundary_solution(ev, 1j, BoundarySeed("super", (1.0, 0.0)))
    with pytest.raises(SeedMismatchError):
        boundary_solution(ev_super, 1j, BoundarySeed("sub", (1.0, 0.0)))


def test_start_value_is_seed(ev, ev_super):
    for e in (ev, ev_super):
        seed = BoundarySeed(e.regime, (0.3, 1.0))
        c = boundary_solution(e, 0.5 - 0.2j, seed, grid=np.array([-1.0, -1e-7]))
        pair = boundary_limits(c, e, -1e-9)
        np.testing.assert_allclose(pair, seed.pair, atol=1e-5)


@pytest.mark.parametrize("which", ["ev", "ev_super"])
@pytest.mark.parametrize("lam", LAMS)
def test_series_matches_ode(request, which, lam):
    e = request.getfixturevalue(which)
    seed = BoundarySeed.canonical(e)
    ser = boundary_series(e, lam, seed, -0.1, 10).top_terms().sum(axis=0)
    ode = boundary_solution(e, lam, seed, grid=np.array([-0.5, -0.1]), x0=-1e-6, rtol=1e-12)(-0.1)[0]
    assert np.max(np.abs(ser - ode)) / np.max(np.abs(ode)) < 1e-6


@pytest.mark.parametrize("which", ["ev", "ev_super"])
def test_series_term_bounds(request, which):
    e = request.getfixturevalue(which)
    seed = BoundarySeed(e.regime, (1.0, -0.5))
    lam = 0.5 - 0.3j
    ser = boundary_series(e, lam, seed, -0.5, 6)
    x = ser.x[::200]
    t = ser.terms()[:, ::200]
    for n in range(6):
        bound = series_term_bound(e, lam, seed, x, n)
        assert np.all(np.max(np.abs(t[n]), axis=1) <= bound * (1 + 1e-8))


@pytest.mark.parametrize("which", ["ev", "ev_super"])
def test_global_bound(request, which):
    e = request.getfixturevalue(which)
    seed = BoundarySeed.canonical(e)
    lam = 1 - 0.5j
    x = -np.geomspace(3.0, 1e-4, 60)
    c = boundary_solution(e, lam, seed, grid=x)
    assert np.all(np.max(np.abs(c.values), axis=1) <= global_bound(e, lam, seed, x))


@pytest.mark.parametrize("which,expected", [("ev", 0.2), ("ev_super", 1.2)])
def test_boundary_condition_exponent(request, which, expected):
    e = request.getfixturevalue(which)
    c = boundary_solution(e, 0.5 - 0.2j, grid=np.array([-1.0, -1e-6]))
    rep = check_boundary_condition(c, e)
    assert rep.satisfied
    assert rep.exponent >= 0.5 - e.ml - 1e-2 if which == "ev" else rep.exponent > 0
    assert rep.exponent == pytest.approx(expected, abs=0.05)


def test_free_boundary_solution_exact(ev):
    free = ev.switched_off()
    seed = BoundarySeed("sub", (1.0, 2.0))
    x = -np.geomspace(1.0, 1e-8, 30)
    c = boundary_solution(free, 2j, seed, grid=x)
    np.testing.assert_allclose(c.values, (-x)[:, None] ** (-free.ml) * seed.vector, rtol=1e-14)
    rep = check_boundary_condition(c, free)
    assert np.all(rep.residual == 0)


def test_jost_solution_violates_condition(ev):
    c = jost_solution(ev, 0.5 + 0.2j, "Phi3", x_end=-1e-6)
    rep = check_boundary_condition(c, ev)
    assert not rep.satisfied


@pytest.mark.parametrize("lam", LAMS)
def test_ode_residual(ev, lam):
    c = boundary_solution(ev, lam, grid=np.linspace(-4.0, -1e-3, 300))
    assert np.max(ode_residual(c, ev, c.grid[2:-2])) < 1e-6


def test_twisted_seed_gives_twisted_solution(ev):
    lam = 0.8 - 0.4j
    seed = BoundarySeed("sub", (1.0, 0.3))
    x = np.linspace(-3.0, -1e-3, 50)
    a = boundary_solution(ev, lam, seed, grid=x)
    b = boundary_solution(ev, lam, seed.twisted(), grid=x)
    np.testing.assert_allclose(a.values @ TWIST.T, b.values, rtol=1e-8, atol=1e-10 * np.max(np.abs(b.values)))
    pair = boundary_limits(b, ev, -1e-9)
    np.testing.assert_allclose(pair, seed.twisted().pair, atol=1e-5)


def test_growth_towards_horizon(ev):
    lam = 1 - 0.5j
    c = boundary_solution(ev, lam, grid=np.array([-10.0, -8.0, -1.0]))
    n = np.max(np.abs(c.values), axis=1)
    assert n[0] > n[1]
    rate = math.log(n[0] / n[1]) / 2.0
    assert rate == pytest.approx(abs(lam.imag), rel=0.1)


def test_invalid_arguments(ev):
    with pytest.raises(InvalidParameterError):
        boundary_solution(ev, 1j, x0=0.0)
    with pytest.raises(InvalidParameterError):
        boundary_solution(ev, 1j, x0=-1e-4, x_end=-1e-5)
    with pytest.raises(InvalidParameterError):
        boundary_series(ev, 1j, BoundarySeed.canonical(ev), -0.1, 0)
