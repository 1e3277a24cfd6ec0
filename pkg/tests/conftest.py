import numpy as np
import pytest

from sadsdirac.geometry import BlackHoleParams, TortoiseMap
from sadsdirac.potentials import ModeParams, PotentialEvaluator


@pytest.fixture(scope="session")
def bh():
    return BlackHoleParams(1.0, 1.0)


@pytest.fixture(scope="session")
def tmap(bh):
    return TortoiseMap(bh)


@pytest.fixture(scope="session")
def ev(bh, tmap):
    """Reference mode: M = l = 1, s = 0, m = 0.3 (below the mass threshold)."""
    return PotentialEvaluator(bh, ModeParams(0.0, 0.3), tmap)


@pytest.fixture(scope="session")
def ev_super(bh, tmap):
    """M = l = 1, s = 0, m = 1.2 (above the mass threshold)."""
    return PotentialEvaluator(bh, ModeParams(0.0, 1.2), tmap)


def bump(x):
    """Smooth bump supported in [-5, -1]."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    t = (x + 3.0) / 2.0
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def bump_data(x, coeffs=(1.0, 0.5j, -0.25, 1.0 + 0.5j), freq=0.0):
    b = bump(x) * np.exp(1j * freq * np.asarray(x))
    return b[:, None] * np.asarray(coeffs, dtype=complex)[None, :]


ACCEPTANCE_LOG = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    """Print and keep one PASS/FAIL line for an acceptance criterion."""
    line = f"{'PASS' if ok else 'FAIL'} acceptance {number:2d} {title}: {detail}"
    print(line)
    ACCEPTANCE_LOG.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
