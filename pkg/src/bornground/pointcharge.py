"""Field energy of a Born-Infeld point charge in R^3.

The radial field has slope ``b / sqrt(r^4 + b^2)`` and energy density
``1 - r^2 / sqrt(r^4 + b^2)`` per unit volume, so

    E(b) = 4 pi int_0^inf (1 - r^2 / sqrt(r^4 + b^2)) r^2 dr

is finite, unlike the Coulomb field energy.  The substitution ``r = sqrt(b) s``
gives ``E(b) = b^(3/2) E(1)``.
"""

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from .errors import DomainError


def _check_b(b):
    if not (np.isfinite(b) and b > 0):
        raise DomainError(f"field parameter b must be positive, got {b!r}")


def field_slope(r, b):
    """``b / sqrt(r^4 + b^2)``; tends to 1 at the origin and decays like ``b / r^2``."""
    _check_b(b)
    r = np.asarray(r, dtype=float)
    return b / np.sqrt(r**4 + b * b)


def energy_density(r, b):
    """``1 - r^2 / sqrt(r^4 + b^2)`` written without cancellation."""
    _check_b(b)
    r = np.asarray(r, dtype=float)
    q = np.sqrt(r**4 + b * b)
    return b * b / (q * (q + r * r))


def tail(R, b):
    """``int_R^inf energy_density(r) r^2 dr`` from the large-r expansion (error O(R^-13))."""
    return b**2 / (2 * R) - 3 * b**4 / (40 * R**5) + 5 * b**6 / (144 * R**9)


def energy(b, R_max=40.0, tol=1e-12, with_tail=True):
    """``E(b)``: adaptive quadrature on ``[0, R_max]`` plus the analytic tail."""
    _check_b(b)
    if not R_max > 0:
        raise DomainError(f"R_max must be positive, got {R_max!r}")
    # split at the crossover scale sqrt(b) where the density changes behaviour
    s = math.sqrt(b)
    pts = [p for p in (s, 4 * s) if p < R_max]
    val, _ = quad(lambda r: float(energy_density(r, b)) * r * r, 0.0, R_max,
                  epsabs=0.0, epsrel=tol, limit=500, points=pts or None)
    if with_tail:
        val += tail(R_max, b)
    return 4.0 * math.pi * val


def exact_energy(b):
    """Closed form ``4 pi b^(3/2) Gamma(1/4)^2 / (12 sqrt(pi))``."""
    _check_b(b)
    return 4.0 * math.pi * b**1.5 * gamma(0.25) ** 2 / (12.0 * math.sqrt(math.pi))


def convergence_table(b=1.0, radii=(10.0, 20.0, 40.0), tol=1e-12):
    """Rows ``(R_max, E with tail, E without tail)``."""
    return [(R, energy(b, R, tol), energy(b, R, tol, with_tail=False)) for R in radii]
