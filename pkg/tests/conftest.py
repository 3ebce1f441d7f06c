import time
import warnings

import pytest

from bornground import optimizer
from bornground.errors import TruncationWarning

ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} - {detail}")


def _solve(**kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return optimizer.minimize(optimizer.SolverConfig(**kw), warn=False)


@pytest.fixture(scope="session")
def zero_mass_ground():
    """N=3, p=8 on the default grid (n=4001, R auto)."""
    return _solve(N=3, exponent=8.0, n=4001)


@pytest.fixture(scope="session")
def positive_mass_ground():
    """N=2, q=4 on the default grid."""
    return _solve(regime="positive-mass", N=2, exponent=4.0, n=4001)


@pytest.fixture(scope="session")
def solve():
    return _solve


@pytest.fixture(scope="session")
def shot_ground():
    """Shooting ground state for N=2, q=4 on the default radial grid."""
    from bornground import nonlinearity, radial, shooting

    spec = nonlinearity.make_power_positive_mass(2, 4.0)
    t0 = time.perf_counter()
    shot = shooting.find_ground(spec, radial.RadialGrid(2, 20.0, 4001), 2.0, 2.5)
    shot._elapsed = time.perf_counter() - t0
    return shot
