"""Radial discretization of R^N on a uniform grid over [0, R].

Profiles are continuous piecewise-linear functions of r with a homogeneous
Dirichlet condition at r = R.  Two quadratures are used:

* the gradient term integrates ``W(|u'|)`` cell by cell with the exact cell
  volume ``V_i = int_{r_i}^{r_{i+1}} r^(N-1) dr``, since ``u'`` is constant
  on a cell;
* the potential terms use lumped nodal weights
  ``w_i = int phi_i(r) r^(N-1) dr`` of the hat functions ``phi_i``.

Both are positive, both sum to ``R^N / N``, and the discrete energy is a
smooth function of the nodal values whose gradient is computed exactly.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from . import lagrangian as lg
from .errors import ConfigurationError, ConstraintViolation, DomainError, PreconditionError

PSI_MARGIN = 1e-12


def sphere_area(N):
    """Surface area ``2 pi^(N/2) / Gamma(N/2)`` of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / gamma(N / 2.0)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid with nodes ``r_i = i R / (n - 1)``.

    Attributes
    ----------
    N : int
        Space dimension.
    R : float
        Truncation radius.
    n : int
        Number of nodes, including ``r = 0`` and ``r = R``.
    nodes : ndarray
        The radii ``r_i``.
    weights : ndarray
        Nodal weights for ``int_0^R (.) r^(N-1) dr``.
    cell_volumes : ndarray
        ``int_{r_i}^{r_{i+1}} r^(N-1) dr`` for each of the ``n - 1`` cells.
    sphere_area : float
        ``omega_N``; multiply radial integrals by it to get integrals over R^N.
    """

    N: int
    R: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    cell_volumes: np.ndarray = field(init=False, repr=False, compare=False)
    sphere_area: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigurationError(f"dimension N must be a positive integer, got {self.N!r}")
        if not (np.isfinite(self.R) and self.R > 0):
            raise ConfigurationError(f"truncation radius R must be positive, got {self.R!r}")
        if int(self.n) != self.n or self.n < 3:
            raise ConfigurationError(f"grid needs at least 3 nodes, got n={self.n!r}")
        N, R, n = int(self.N), float(self.R), int(self.n)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "n", n)
        r = np.linspace(0.0, R, n)
        h = r[1] - r[0]
        # Gauss-Legendre with N//2 + 3 points integrates r^(N-1) times a
        # linear hat exactly on each cell.
        x, gw = np.polynomial.legendre.leggauss(N // 2 + 3)
        t = 0.5 * (x + 1.0)
        gw = 0.5 * gw
        rq = r[:-1, None] + t * h
        wq = gw * h * rq ** (N - 1)
        V = wq.sum(axis=1)
        w = np.zeros(n)
        w[:-1] += (wq * (1.0 - t)).sum(axis=1)
        w[1:] += (wq * t).sum(axis=1)
        for a in (r, V, w):
            a.setflags(write=False)
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "cell_volumes", V)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "sphere_area", sphere_area(N))

    @property
    def h(self):
        return self.R / (self.n - 1)

    @property
    def midpoints(self):
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    def integrate(self, values):
        """``omega_N * sum_i w_i values_i``, the discrete integral over R^N."""
        return self.sphere_area * float(np.dot(self.weights, values))

    def profile(self, fn):
        """Sample ``fn`` at the nodes and impose the Dirichlet condition."""
        v = np.asarray(fn(self.nodes), dtype=float).copy()
        v[-1] = 0.0
        return Profile(self, v)


class Profile:
    """Immutable nodal values of a radial function on a :class:`RadialGrid`.

    The last value must be exactly zero.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        v = np.array(values, dtype=float)
        if v.shape != (grid.n,):
            raise ConfigurationError(f"profile has shape {v.shape}, grid expects ({grid.n},)")
        if v[-1] != 0.0:
            raise DomainError(f"profile must vanish at r = R, got u(R) = {v[-1]!r}")
        v.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("Profile is immutable")

    def __len__(self):
        return self.grid.n

    @property
    def derivative(self):
        """Cell slopes ``(u_{i+1} - u_i) / h``."""
        return np.diff(self.values) / self.grid.h

    @property
    def sup_gradient(self):
        return float(np.max(np.abs(self.derivative)))

    @property
    def admissible(self):
        return self.sup_gradient <= 1.0

    def with_values(self, values):
        return Profile(self.grid, values)

    def __mul__(self, a):
        return Profile(self.grid, float(a) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return Profile(self.grid, -self.values)


# ---------------------------------------------------------------------------
# array-level kernels (no validation beyond the gradient constraint)


def _slopes(grid, u, margin):
    d = np.diff(u) / grid.h
    m = float(np.max(np.abs(d)))
    if not m <= 1.0 - margin:
        raise ConstraintViolation(m, 1.0 - margin)
    return d


def _psi(grid, u, margin=PSI_MARGIN):
    d = _slopes(grid, u, margin)
    return grid.sphere_area * float(np.dot(grid.cell_volumes, lg.eval_W(np.abs(d))))


def _grad_psi(grid, u, margin=PSI_MARGIN):
    d = _slopes(grid, u, margin)
    c = grid.cell_volumes * np.sign(d) * lg.eval_w(np.abs(d)) / grid.h
    g = np.zeros(grid.n)
    g[:-1] -= c
    g[1:] += c
    g *= grid.sphere_area
    g[-1] = 0.0
    return g


def _check_dim(grid, spec):
    if spec.dimension != grid.N:
        raise ConfigurationError(
            f"nonlinearity is set up for N={spec.dimension} but the grid has N={grid.N}"
        )


def _vals(u):
    if not isinstance(u, Profile):
        raise TypeError(f"expected a Profile, got {type(u).__name__}")
    return u.grid, u.values


# ---------------------------------------------------------------------------
# functionals


def psi(u, margin=PSI_MARGIN):
    """Born-Infeld gradient energy ``int 1 - sqrt(1 - |grad u|^2) dx``.

    Raises
    ------
    ConstraintViolation
        If some cell slope exceeds ``1 - margin`` in magnitude.
    """
    grid, v = _vals(u)
    return _psi(grid, v, margin)


def phi(u, spec):
    """``int F(u) dx``."""
    grid, v = _vals(u)
    _check_dim(grid, spec)
    return grid.integrate(spec.F(v))


def phi_prime_u(u, spec):
    """``int f(u) u dx``, the derivative of :func:`phi` at ``u`` applied to ``u``."""
    grid, v = _vals(u)
    _check_dim(grid, spec)
    return grid.integrate(spec.f(v) * v)


def energy(u, spec):
    """``I(u) = psi(u) - phi(u)``."""
    return psi(u) - phi(u, spec)


def integral_H(u, spec):
    grid, v = _vals(u)
    _check_dim(grid, spec)
    return grid.integrate(spec.H(v))


def pohozaev(u, spec):
    """``M(u) = psi(u) - int H(u) dx`` (same shape in both regimes)."""
    return psi(u) - integral_H(u, spec)


def grad_energy(u, spec, margin=PSI_MARGIN):
    """Exact nodal gradient of the discrete :func:`energy`.

    The entry for the Dirichlet node is zero.
    """
    grid, v = _vals(u)
    _check_dim(grid, spec)
    g = _grad_psi(grid, v, margin) - grid.sphere_area * grid.weights * spec.f(v)
    g[-1] = 0.0
    return g


def grad_pohozaev(u, spec, margin=PSI_MARGIN):
    """Exact nodal gradient of the discrete :func:`pohozaev`."""
    grid, v = _vals(u)
    _check_dim(grid, spec)
    g = _grad_psi(grid, v, margin) - grid.sphere_area * grid.weights * spec.Hprime(v)
    g[-1] = 0.0
    return g


def psi_hessian_banded(grid, u, mass=0.0):
    """Tridiagonal Hessian of the discrete ``psi`` on the free nodes.

    Returned in the ``(3, n - 1)`` layout of :func:`scipy.linalg.solve_banded`.
    ``mass * omega_N * w_i`` is added to the diagonal when ``mass`` is nonzero.
    """
    u = u.values if isinstance(u, Profile) else np.asarray(u)
    d = np.abs(np.diff(u)) / grid.h
    k = grid.sphere_area * grid.cell_volumes * lg.eval_wp(d) / grid.h**2
    diag = np.zeros(grid.n)
    diag[:-1] += k
    diag[1:] += k
    if mass:
        diag += mass * grid.sphere_area * grid.weights
    m = grid.n - 1
    ab = np.zeros((3, m))
    ab[0, 1:] = -k[: m - 1]
    ab[1] = diag[:m]
    ab[2, :-1] = -k[: m - 1]
    return ab


# ---------------------------------------------------------------------------
# norms


def lp_norm(u, p):
    """``(int |u|^p dx)^(1/p)``, or the max norm for ``p = inf``."""
    grid, v = _vals(u)
    if p == np.inf:
        return float(np.max(np.abs(v)))
    return grid.integrate(np.abs(v) ** p) ** (1.0 / p)


def grad_lp_norm(u, p):
    """``(int |u'|^p dx)^(1/p)`` using cell volumes; diagnostics only."""
    grid, v = _vals(u)
    d = np.abs(np.diff(v)) / grid.h
    if p == np.inf:
        return float(np.max(d))
    return (grid.sphere_area * float(np.dot(grid.cell_volumes, d**p))) ** (1.0 / p)


# ---------------------------------------------------------------------------
# scaling and rearrangement


def _resample(grid, v, theta):
    out = theta * np.interp(grid.nodes / theta, grid.nodes, v, right=0.0)
    out[-1] = 0.0
    return out


def resample_scaled(u, theta):
    """The profile ``theta * u(r / theta)`` on the same grid.

    Linear interpolation; values beyond the original support are zero.
    """
    if not (np.isfinite(theta) and theta > 0):
        raise DomainError(f"scale factor theta must be positive, got {theta!r}")
    grid, v = _vals(u)
    if theta == 1.0:
        return u
    return Profile(grid, _resample(grid, v, float(theta)))


def _monotone_runs(v):
    """Split indices into maximal runs on which ``v`` is monotone."""
    runs = []
    start, sign = 0, 0
    for i, s in enumerate(np.sign(np.diff(v)).astype(int).tolist()):
        if s == 0 or sign == 0 or s == sign:
            sign = sign or s
            continue
        runs.append((start, i, sign))
        start, sign = i, s
    runs.append((start, len(v) - 1, sign))
    return runs


def _superlevel_volume(r, v, runs, lam, N):
    """``sum over runs of |{u > lam}|`` in units of ``r^N`` (omega_N / N dropped)."""
    mu = np.zeros_like(lam)
    for a, b, sign in runs:
        rr, vv = r[a : b + 1], v[a : b + 1]
        if sign >= 0:
            # increasing run: {u > lam} = (rho(lam), r_b]
            rho = np.interp(lam, vv, rr, left=rr[0], right=rr[-1])
            mu += np.where(lam < vv[-1], rr[-1] ** N - rho**N, 0.0)
        else:
            rho = np.interp(lam, vv[::-1], rr[::-1], left=rr[-1], right=rr[0])
            mu += np.where(lam < vv[0], rho**N - rr[0] ** N, 0.0)
    return mu


def rearrange_decreasing(u, sign_tol=1e-12):
    """Symmetric decreasing rearrangement of a sign-definite radial profile.

    The rearranged nodal value at ``r_i`` is the level ``lam`` whose
    superlevel set of the piecewise-linear ``|u|`` has the volume of the
    ball of radius ``r_i``.  Nonincreasing inputs are returned unchanged.

    Raises
    ------
    PreconditionError
        If ``u`` takes both signs beyond ``sign_tol * max|u|``.
    """
    grid, v = _vals(u)
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return u
    pos, neg = float(v.max()), float(-v.min())
    if pos > sign_tol * scale and neg > sign_tol * scale:
        raise PreconditionError("rearrangement needs a sign-definite profile; u changes sign")
    sgn = 1.0 if pos >= neg else -1.0
    a = np.maximum(sgn * v, 0.0)
    if np.all(np.diff(a) <= 0.0):
        return u
    r, N = grid.nodes, grid.N
    runs = _monotone_runs(a)
    target = r**N
    lo = np.zeros(grid.n)
    hi = np.full(grid.n, a.max())
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        big = _superlevel_volume(r, a, runs, mid, N) > target
        lo = np.where(big, mid, lo)
        hi = np.where(big, hi, mid)
    out = 0.5 * (lo + hi)
    out[0] = a.max()
    out[-1] = 0.0
    out = np.minimum.accumulate(out)
    return Profile(grid, sgn * out)


def is_nonincreasing(u, tol=0.0):
    """True if ``|u|`` does not increase along the grid beyond ``tol * max|u|``."""
    a = np.abs(u.values)
    return bool(np.all(np.diff(a) <= tol * a.max()))


def sign_flag(u, tol=1e-10):
    v = u.values
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return "zero"
    if v.min() >= -tol * scale:
        return "positive"
    if v.max() <= tol * scale:
        return "negative"
    return "sign-changing"


# ---------------------------------------------------------------------------
# CSV


def write_profile_csv(path, u):
    """Write ``r,u,du`` rows; ``du`` is the slope of the cell to the right (last row repeats)."""
    grid, v = _vals(u)
    d = np.diff(v) / grid.h
    du = np.append(d, d[-1])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("r,u,du\n")
        for ri, ui, di in zip(grid.nodes, v, du):
            fh.write(f"{ri:.17g},{ui:.17g},{di:.17g}\n")


def read_profile_csv(path, N):
    """Read a file written by :func:`write_profile_csv` back into a :class:`Profile`."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["r", "u", "du"]:
        raise ConfigurationError("profile CSV must start with header r,u,du", line=1)
    try:
        data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
    except ValueError as exc:
        raise ConfigurationError(f"non-numeric entry in profile CSV: {exc}") from None
    r, v = data[:, 0], data[:, 1]
    grid = RadialGrid(N, float(r[-1]), len(r))
    if not np.allclose(r, grid.nodes, rtol=0, atol=1e-12 * grid.R):
        raise ConfigurationError("profile CSV nodes are not a uniform grid starting at 0")
    return Profile(grid, v)
