"""Scaling projection onto the discrete Pohozaev manifold.

For ``u_theta(r) = theta * u(r / theta)`` the change of variables gives

    I(u_theta) = theta^N (Psi(u) - Phi(theta u))
    M(u_theta) = theta^N (Psi(u) - int H(theta u))

so the projection only needs the root of ``Psi(u) = int H(theta u)`` and no
resampling.  The same identities hold exactly for the discrete functionals
when the grid is scaled together with the profile, which is why they are
used for line-search decisions.
"""

from dataclasses import dataclass

import numpy as np

from . import radial
from .errors import DegenerateInputError, NoRootError

THETA_GUARD = 1e12
DEFAULT_TOL_ROOT = 1e-12


@dataclass(frozen=True)
class ProjectionResult:
    theta: float
    energy_at_theta: float
    residual: float
    bracket: float
    iterations: int


def target_H(u, spec, theta):
    """``int H(theta u) dx``; in the positive-mass regime this is the mass-including target."""
    grid, v = radial._vals(u)
    radial._check_dim(grid, spec)
    return grid.integrate(spec.H(theta * v))


def scaled_energy(u, spec, theta):
    """``I(u_theta)`` evaluated from ``u`` without resampling."""
    grid, v = radial._vals(u)
    radial._check_dim(grid, spec)
    return theta**grid.N * (radial._psi(grid, v) - grid.integrate(spec.F(theta * v)))


def scaled_pohozaev(u, spec, theta):
    """``M(u_theta)`` evaluated from ``u`` without resampling."""
    grid, v = radial._vals(u)
    radial._check_dim(grid, spec)
    return theta**grid.N * (radial._psi(grid, v) - grid.integrate(spec.H(theta * v)))


def solve_theta(target, P, tol_root=DEFAULT_TOL_ROOT, dtarget=None, newton=False, start=1.0):
    """Root of ``target(theta) = P`` on the increasing branch.

    ``target`` is any callable of ``theta``; it must be below ``P`` for small
    theta and above it for large theta, with a single crossing.  Returns
    ``(theta, residual, bracket_width, iterations)``.
    """
    scale = tol_root * max(1.0, abs(P))
    it = 0
    hi = start
    t_hi = target(hi)
    while t_hi <= P:
        lo, t_lo = hi, t_hi
        hi *= 2.0
        it += 1
        if hi > THETA_GUARD:
            raise NoRootError(
                f"no scaling root below theta = {THETA_GUARD:g}; "
                "the nonlinearity may violate its growth assumptions"
            )
        t_hi = target(hi)
    if hi == start:
        lo = start
        t_lo = t_hi
        while t_lo >= P:
            hi, t_hi = lo, t_lo
            lo *= 0.5
            it += 1
            if lo < 1.0 / THETA_GUARD:
                raise NoRootError(f"no scaling root above theta = {1.0 / THETA_GUARD:g}")
            t_lo = target(lo)
    best, best_res = (lo, abs(t_lo - P)) if abs(t_lo - P) < abs(t_hi - P) else (hi, abs(t_hi - P))
    while best_res > scale:
        mid = 0.5 * (lo + hi)
        if newton and dtarget is not None:
            slope = dtarget(best)
            if slope > 0:
                cand = best - (target(best) - P) / slope
                if lo < cand < hi:
                    mid = cand
        if mid <= lo or mid >= hi:
            break
        t_mid = target(mid)
        it += 1
        if abs(t_mid - P) < best_res:
            best, best_res = mid, abs(t_mid - P)
        if t_mid < P:
            lo = mid
        else:
            hi = mid
        if it > 400:
            break
    return best, best_res, hi - lo, it


def _theta_arrays(grid, spec, v, tol_root=DEFAULT_TOL_ROOT, newton=False, P=None):
    if P is None:
        P = radial._psi(grid, v)
    if not np.any(v):
        raise DegenerateInputError("the zero profile has no scaling projection")
    if not P > 0:
        raise DegenerateInputError("projection needs Psi(u) > 0")
    w = grid.sphere_area * grid.weights

    def target(th):
        return float(np.dot(w, spec.H(th * v)))

    def dtarget(th):
        return float(np.dot(w, spec.Hprime(th * v) * v))

    return solve_theta(target, P, tol_root, dtarget, newton)


def theta_of(u, spec, tol_root=DEFAULT_TOL_ROOT, newton=False):
    """Unique ``theta`` with ``M(u_theta) = 0``, by bracket expansion and bisection.

    Raises
    ------
    DegenerateInputError
        For the zero profile.
    NoRootError
        If bracket expansion reaches ``theta = 1e12``.
    """
    grid, v = radial._vals(u)
    radial._check_dim(grid, spec)
    P = radial._psi(grid, v)
    theta, res, width, it = _theta_arrays(grid, spec, v, tol_root, newton, P)
    E = theta**grid.N * (P - grid.integrate(spec.F(theta * v)))
    return ProjectionResult(theta=theta, energy_at_theta=E, residual=res, bracket=width, iterations=it)


def project(u, spec, tol_root=DEFAULT_TOL_ROOT):
    """``m(u) = u_theta(u)`` resampled onto the grid of ``u``."""
    return radial.resample_scaled(u, theta_of(u, spec, tol_root).theta)


def closed_form_theta_power(u, N, p):
    """Zero-mass power case: ``theta = (N p Psi / (N + p))^(1/p) / ||u||_p``."""
    return (N * p * radial.psi(u) / (N + p)) ** (1.0 / p) / radial.lp_norm(u, p)
