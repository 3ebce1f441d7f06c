import math

import mpmath
import numpy as np
import pytest

from bornground import pointcharge as pc
from bornground.errors import DomainError


def test_closed_form_against_mpmath():
    # independent high-precision quadrature of the defining integral
    mpmath.mp.dps = 60
    val = 4 * mpmath.pi * mpmath.quad(lambda r: (1 - r**2 / mpmath.sqrt(r**4 + 1)) * r**2, [0, 1, 10, 100])
    # tail beyond 100 from the binomial series of the integrand, r^-2/2 - r^-6/8 + ...
    val += 4 * mpmath.pi * (mpmath.mpf(1) / 200 - mpmath.mpf(3) / (40 * mpmath.mpf(100) ** 5))
    assert pc.exact_energy(1.0) == pytest.approx(float(val), rel=1e-14)


def test_density_asymptotics():
    r = np.array([1e3, 1e4])
    assert np.allclose(pc.energy_density(r, 1.0) * 2 * r**4, 1.0, rtol=1e-6)
    assert pc.energy_density(0.0, 1.0) == 1.0
    d = pc.energy_density(np.linspace(0, 50, 5001), 1.0)
    assert np.all(np.diff(d) < 0)


def test_field_slope_limits():
    assert pc.field_slope(0.0, 2.0) == 1.0
    assert pc.field_slope(1e3, 2.0) * 1e6 == pytest.approx(2.0, rel=1e-9)


def test_tail_matches_quadrature():
    from scipy.integrate import quad

    for R in (10.0, 20.0):
        ref, _ = quad(lambda r: float(pc.energy_density(r, 1.0)) * r * r, R, np.inf, epsabs=0, epsrel=1e-13)
        assert pc.tail(R, 1.0) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("R", [10.0, 20.0, 40.0])
def test_energy_converges_with_tail(R):
    assert pc.energy(1.0, R) == pytest.approx(pc.exact_energy(1.0), rel=1e-10)


def test_truncation_without_tail_is_first_order():
    exact = pc.exact_energy(1.0)
    errs = [exact - e0 for _, _, e0 in pc.convergence_table(1.0, (10.0, 20.0, 40.0))]
    # missing tail is 2 pi b^2 / R to leading order
    for (R, err) in zip((10.0, 20.0, 40.0), errs):
        assert err == pytest.approx(2 * math.pi / R, rel=1e-2)


@pytest.mark.parametrize("b", [0.25, 0.5, 2.0, 4.0])
def test_scaling_law(b):
    assert pc.energy(b) / pc.energy(1.0) == pytest.approx(b**1.5, rel=1e-9)


@pytest.mark.parametrize("b", [0.0, -1.0, float("nan")])
def test_nonpositive_b(b):
    with pytest.raises(DomainError):
        pc.energy(b)
    with pytest.raises(DomainError):
        pc.field_slope(1.0, b)
