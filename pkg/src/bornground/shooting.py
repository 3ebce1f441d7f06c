"""Radial shooting for ``(r^(N-1) w(u'))' = -r^(N-1) f(u)``, ``u(0) = s0``, ``u'(0) = 0``.

The state is ``(u, v)`` with ``v = w(u') = u' / sqrt(1 - u'^2)``, so that
``u' = v / sqrt(1 + v^2)`` is smooth and bounded by 1 for every ``v``.
Integration is classical RK4 on a fixed step, started at ``r = h`` from a
Taylor expansion about the origin.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import radial
from .errors import BracketError, DomainError, NumericalFailure

CROSSES = "crosses-zero"
DECAYS = "decays"
SINGULAR = "stays-positive-unbounded-slope"


def w_inverse(v):
    """Inverse of the flux map: ``t`` with ``t / sqrt(1 - t^2) = v``."""
    v = np.asarray(v, dtype=float)
    out = v / np.sqrt(1.0 + v * v)
    return float(out) if out.ndim == 0 else out


@dataclass
class ShootResult:
    s0: float
    classification: str
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    r_stop: float
    profile: Optional[radial.Profile] = None
    energy: Optional[float] = None
    pohozaev_residual: Optional[float] = None
    psi: Optional[float] = None

    @property
    def slope(self):
        return w_inverse(self.v)


def _series_start(s0, spec, h):
    N = spec.dimension
    f0 = float(spec.f(s0))
    fp0 = float(spec.fprime(s0))
    a1 = -f0 / N
    a3 = -fp0 * a1 / (2.0 * (N + 2))
    u = s0 + 0.5 * a1 * h * h + 0.25 * (a3 - 0.5 * a1**3) * h**4
    v = a1 * h + a3 * h**3
    return u, v


def integrate(s0, spec, R, h=None, slope_guard=1e-6, stop=True):
    """Shoot from height ``s0`` out to ``R``.

    Parameters
    ----------
    s0 : float
        Initial height, positive.
    spec : NonlinearitySpec
    R : float
        Final radius.
    h : float, optional
        RK4 step; default ``R / 1e5``.
    slope_guard : float
        Classify as singular once ``|u'| >= 1 - slope_guard``.
    stop : bool
        Stop at the first event that decides the classification.  With
        ``stop=False`` the trajectory runs to ``R`` unless it crosses zero or
        becomes singular; used for order checks.

    Returns
    -------
    ShootResult
        ``profile`` is not filled in; see :func:`shot_profile`.
    """
    if not s0 > 0:
        raise DomainError(f"initial height must be positive, got {s0!r}")
    h = R / 1e5 if h is None else float(h)
    N = spec.dimension
    f = spec.f
    nsteps = int(math.ceil(R / h - 1e-9))
    rs = np.empty(nsteps + 1)
    us = np.empty(nsteps + 1)
    vs = np.empty(nsteps + 1)
    rs[0], us[0], vs[0] = 0.0, s0, 0.0
    u, v = _series_start(s0, spec, h)
    r = h
    rs[1], us[1], vs[1] = r, u, v
    k = 1
    cls = DECAYS
    lim = 1.0 - slope_guard

    def rhs(r, u, v):
        return v / math.sqrt(1.0 + v * v), -float(f(u)) - (N - 1) * v / r

    while k < nsteps:
        k1u, k1v = rhs(r, u, v)
        k2u, k2v = rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v)
        k3u, k3v = rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v)
        k4u, k4v = rhs(r + h, u + h * k3u, v + h * k3v)
        u += h * (k1u + 2 * k2u + 2 * k3u + k4u) / 6.0
        v += h * (k1v + 2 * k2v + 2 * k3v + k4v) / 6.0
        r = (k + 1) * h
        k += 1
        rs[k], us[k], vs[k] = r, u, v
        if not (math.isfinite(u) and math.isfinite(v)):
            raise NumericalFailure(f"non-finite shooting state at r = {r:g} (s0 = {s0!r})")
        if u < 0:
            cls = CROSSES
            break
        if abs(v) / math.sqrt(1.0 + v * v) >= lim:
            cls = SINGULAR
            break
        if stop and v > 0:
            cls = DECAYS
            break
    return ShootResult(
        s0=float(s0),
        classification=cls,
        r=rs[: k + 1].copy(),
        u=us[: k + 1].copy(),
        v=vs[: k + 1].copy(),
        r_stop=float(r),
    )


def shot_profile(shot, grid):
    """Interpolate a shot onto ``grid``, cut at its minimum and zero beyond."""
    u = shot.u
    i = int(np.argmin(u)) if shot.classification == DECAYS else len(u) - 1
    r_cut, u_cut = shot.r[: i + 1], np.maximum(u[: i + 1], 0.0)
    vals = np.interp(grid.nodes, r_cut, u_cut, right=0.0)
    vals[-1] = 0.0
    return radial.Profile(grid, vals)


def _side(cls):
    return "under" if cls == DECAYS else "over"


def find_ground(spec, grid, s_lo, s_hi, tol_s=1e-13, h=None, slope_guard=1e-6):
    """Bisection on the initial height between an undershoot and an overshoot.

    The undershoot side is ``decays``; ``crosses-zero`` and the singular
    slope case form the overshoot side.  The returned shot is the last
    undershoot, with its grid profile, energy and Pohozaev residual filled in.

    Raises
    ------
    BracketError
        If both heights land on the same side.
    """
    R = grid.R
    lo = integrate(s_lo, spec, R, h, slope_guard)
    hi = integrate(s_hi, spec, R, h, slope_guard)
    if _side(lo.classification) == _side(hi.classification):
        raise BracketError(
            f"s0 = {s_lo:g} and s0 = {s_hi:g} both give {lo.classification!r}/{hi.classification!r}; "
            "widen the sweep of initial heights"
        )
    if _side(lo.classification) == "over":
        lo, hi = hi, lo
    while abs(hi.s0 - lo.s0) > tol_s * max(1.0, abs(lo.s0)):
        mid = 0.5 * (lo.s0 + hi.s0)
        if mid in (lo.s0, hi.s0):
            break
        shot = integrate(mid, spec, R, h, slope_guard)
        if _side(shot.classification) == "under":
            lo = shot
        else:
            hi = shot
    prof = shot_profile(lo, grid)
    lo.profile = prof
    lo.psi = radial.psi(prof)
    lo.energy = radial.energy(prof, spec)
    lo.pohozaev_residual = radial.pohozaev(prof, spec)
    return lo
