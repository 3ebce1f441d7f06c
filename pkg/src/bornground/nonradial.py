"""Block-radial reduction ``R^N = R^k1 x R^k2`` and tau-antisymmetric ground states.

Functions invariant under ``O(k1) x O(k2)`` are functions of
``(r1, r2) in [0, R]^2`` and integrals carry the weight
``omega_k1 omega_k2 r1^(k1-1) r2^(k2-1)``.  The swap
``(tau u)(r1, r2) = -u(r2, r1)`` has fixed points that are odd across the
diagonal; minimizing over them yields sign-changing, nonradial solutions.

Discretization: P1 elements on a uniform square grid, each square split
along its main diagonal.  The mesh is mapped to itself by the swap, so
antisymmetric nodal data give exactly antisymmetric discrete functionals.
Dirichlet conditions hold on ``r1 = R`` and ``r2 = R``.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import List

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import lagrangian as lg
from . import nonlinearity as nl
from . import pohozaev
from .errors import (
    ConfigurationError,
    ConstraintStallError,
    ConstraintViolation,
    NumericalFailure,
    PreconditionError,
)
from .radial import PSI_MARGIN, sphere_area

_QUAD_POINTS = 5
# local gradient operators: rows give (u_r1, u_r2) * h from the 3 vertex values
_B_LOWER = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
_B_UPPER = np.array([[0.0, -1.0, 1.0], [-1.0, 1.0, 0.0]])


@dataclass(frozen=True)
class BlockRadialGrid:
    """Square grid on ``[0, R]^2`` with weights for ``R^k1 x R^k2`` integrals.

    ``weights`` are the lumped nodal weights (hat-function integrals against
    ``r1^(k1-1) r2^(k2-1)``) flattened row-major, ``u[i, j] = u(r1_i, r2_j)``.
    Multiply by ``omega`` to integrate over R^N.
    """

    k1: int
    k2: int
    R: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    omega: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("k1", "k2"):
            k = getattr(self, name)
            if int(k) != k or k < 2:
                raise ConfigurationError(f"block dimension {name} must be an integer >= 2, got {k!r}")
        if not self.R > 0:
            raise ConfigurationError(f"R must be positive, got {self.R!r}")
        if int(self.n) != self.n or self.n < 5:
            raise ConfigurationError(f"need at least 5 nodes per axis, got {self.n!r}")
        object.__setattr__(self, "k1", int(self.k1))
        object.__setattr__(self, "k2", int(self.k2))
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "n", int(self.n))
        x = np.linspace(0.0, self.R, self.n)
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "omega", sphere_area(self.k1) * sphere_area(self.k2))
        mesh = _Mesh(self)
        object.__setattr__(self, "_mesh", mesh)
        object.__setattr__(self, "weights", mesh.lumped["all"])

    @property
    def N(self):
        return self.k1 + self.k2

    @property
    def h(self):
        return self.R / (self.n - 1)

    @property
    def shape(self):
        return (self.n, self.n)

    def cylinder_volume(self):
        """Measure of ``B^k1_R x B^k2_R``."""
        return self.omega * (self.R**self.k1 / self.k1) * (self.R**self.k2 / self.k2)

    def integrate(self, values, region="all"):
        return self.omega * float(np.dot(self._mesh.lumped[region], np.ravel(values)))


class _Mesh:
    """Triangle data shared by all functionals on one grid."""

    def __init__(self, grid):
        n, h, k1, k2 = grid.n, grid.h, grid.k1, grid.k2
        gx, gw = np.polynomial.legendre.leggauss(_QUAD_POINTS)
        gx, gw = 0.5 * (gx + 1.0), 0.5 * gw
        S, T = np.meshgrid(gx, gx, indexing="ij")
        # collapsed (Duffy) rule on {0 <= t <= s <= 1}
        qs, qt, qw = S.ravel(), (S * T).ravel(), (np.outer(gw, gw) * S).ravel()
        I, J = np.meshgrid(np.arange(n - 1), np.arange(n - 1), indexing="ij")
        I, J = I.ravel(), J.ravel()
        idx = lambda i, j: i * n + j  # noqa: E731
        self.n, self.h = n, h
        self.verts = {
            "L": np.stack([idx(I, J), idx(I + 1, J), idx(I + 1, J + 1)]),
            "U": np.stack([idx(I, J), idx(I, J + 1), idx(I + 1, J + 1)]),
        }
        self.B = {"L": _B_LOWER, "U": _B_UPPER}
        phis = np.stack([1.0 - qs, qs - qt, qt])
        wl = qw * h * h * ((I[:, None] + qs) * h) ** (k1 - 1) * ((J[:, None] + qt) * h) ** (k2 - 1)
        wu = qw * h * h * ((I[:, None] + qt) * h) ** (k1 - 1) * ((J[:, None] + qs) * h) ** (k2 - 1)
        self.area = {"L": wl.sum(axis=1), "U": wu.sum(axis=1)}
        # lumped weights: vertex v of each triangle receives int phi_v * weight
        self.local = {"L": wl @ phis.T, "U": wu @ phis.T}  # (ntri, 3)
        self.region_mask = {
            "all": {"L": np.ones(I.size, bool), "U": np.ones(I.size, bool)},
            "lower": {"L": I >= J, "U": I > J},
            "upper": {"L": I < J, "U": I <= J},
        }
        self.lumped = {}
        for region, masks in self.region_mask.items():
            acc = np.zeros(n * n)
            for t in ("L", "U"):
                m = masks[t]
                for a in range(3):
                    acc += np.bincount(self.verts[t][a][m], self.local[t][m, a], minlength=n * n)
            acc.setflags(write=False)
            self.lumped[region] = acc

    def slopes(self, u):
        out = {}
        for t in ("L", "U"):
            v = self.verts[t]
            B = self.B[t]
            uu = u[v]  # (3, ntri)
            out[t] = (B @ uu) / self.h  # (2, ntri)
        return out

    def max_grad(self, u):
        g = self.slopes(u)
        return math.sqrt(max(float(np.max(np.sum(g[t] ** 2, axis=0))) for t in g))


# ---------------------------------------------------------------------------
# profiles


class BlockProfile:
    """Nodal values ``u[i, j] = u(r1_i, r2_j)`` on a :class:`BlockRadialGrid`."""

    def __init__(self, grid, values):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ConfigurationError(f"block profile must be a square array, got shape {v.shape}")
        if v.shape != grid.shape:
            raise ConfigurationError(f"block profile has shape {v.shape}, grid expects {grid.shape}")
        v.setflags(write=False)
        self.grid = grid
        self.values = v

    @property
    def flat(self):
        return self.values.ravel()

    @property
    def sup_gradient(self):
        return self.grid._mesh.max_grad(self.flat)


class TauProfile(BlockProfile):
    """A block profile with ``u(r1, r2) = -u(r2, r1)``; the diagonal is zero."""

    def __init__(self, grid, values, atol=0.0):
        super().__init__(grid, values)
        v = self.values
        bad = float(np.max(np.abs(v + v.T)))
        if bad > atol:
            raise PreconditionError(f"profile is not tau-antisymmetric (max |u + u o swap| = {bad:g})")


def tau_apply(u):
    """``(tau u)(r1, r2) = -u(r2, r1)``."""
    vals = u.values if isinstance(u, BlockProfile) else np.asarray(u, dtype=float)
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise ConfigurationError(f"tau needs a square grid, got shape {vals.shape}")
    out = -vals.T
    return BlockProfile(u.grid, out) if isinstance(u, BlockProfile) else out


def tau_project(u):
    """``(u + tau u) / 2``, which is exactly tau-fixed."""
    vals = u.values if isinstance(u, BlockProfile) else np.asarray(u, dtype=float)
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise ConfigurationError(f"tau needs a square grid, got shape {vals.shape}")
    out = 0.5 * (vals - vals.T)
    return TauProfile(u.grid, out) if isinstance(u, BlockProfile) else out


# ---------------------------------------------------------------------------
# functionals


@dataclass(frozen=True)
class Functionals2:
    psi: float
    phi: float
    energy: float
    pohozaev: float


def _psi2(mesh, omega, u, region="all", margin=PSI_MARGIN):
    g = mesh.slopes(u)
    total = 0.0
    lim = (1.0 - margin) ** 2
    for t in ("L", "U"):
        t2 = np.sum(g[t] ** 2, axis=0)
        m = float(t2.max())
        if m > lim:
            raise ConstraintViolation(math.sqrt(m), 1.0 - margin)
        mask = mesh.region_mask[region][t]
        total += float(np.dot(mesh.area[t][mask], lg.eval_W(np.sqrt(t2[mask]))))
    return omega * total


def _grad_psi2(mesh, omega, u):
    g = mesh.slopes(u)
    out = np.zeros(u.size)
    for t in ("L", "U"):
        gt = g[t]
        q = mesh.area[t] / np.sqrt(1.0 - np.sum(gt**2, axis=0)) / mesh.h
        local = mesh.B[t].T @ (q * gt)  # (3, ntri)
        for a in range(3):
            out += np.bincount(mesh.verts[t][a], local[a], minlength=u.size)
    return omega * out


def _hess_psi2(mesh, omega, u):
    g = mesh.slopes(u)
    rows, cols, vals = [], [], []
    for t in ("L", "U"):
        g1, g2 = g[t]
        s = np.sqrt(1.0 - g1 * g1 - g2 * g2)
        c0, c1 = 1.0 / s, 1.0 / s**3
        Hm = np.empty((g1.size, 2, 2))
        Hm[:, 0, 0] = c0 + c1 * g1 * g1
        Hm[:, 1, 1] = c0 + c1 * g2 * g2
        Hm[:, 0, 1] = Hm[:, 1, 0] = c1 * g1 * g2
        Bh = mesh.B[t] / mesh.h
        K = np.einsum("ai,nab,bj->nij", Bh, Hm, Bh) * mesh.area[t][:, None, None]
        v = mesh.verts[t]
        for a in range(3):
            for b in range(3):
                rows.append(v[a])
                cols.append(v[b])
                vals.append(K[:, a, b])
    N2 = u.size
    return omega * sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N2, N2)
    )


def _check(grid, spec):
    if spec.dimension != grid.N:
        raise ConfigurationError(
            f"nonlinearity is set up for N={spec.dimension} but k1 + k2 = {grid.N}"
        )


def functionals2(u, spec, region="all"):
    """``(Psi, Phi, I, M)`` of a block profile over ``region`` in {"all", "lower", "upper"}.

    ``lower`` is ``{r1 > r2}``; for tau-antisymmetric ``u``, odd ``f`` and
    ``k1 = k2`` each half carries exactly half of every functional.
    """
    grid = u.grid
    _check(grid, spec)
    if region not in ("all", "lower", "upper"):
        raise ConfigurationError(f"unknown region {region!r}")
    mesh = grid._mesh
    v = u.flat
    P = _psi2(mesh, grid.omega, v, region)
    Phi = grid.integrate(spec.F(v), region)
    Hint = grid.integrate(spec.H(v), region)
    return Functionals2(psi=P, phi=Phi, energy=P - Phi, pohozaev=P - Hint)


def interpolate(grid, values, X, Y):
    """P1 interpolant of nodal ``values`` at points ``(X, Y)``; zero outside ``[0, R)^2``."""
    n, h = grid.n, grid.h
    U = np.asarray(values).reshape(n, n)
    X = np.asarray(X, dtype=float) / h
    Y = np.asarray(Y, dtype=float) / h
    out = np.zeros(X.shape)
    ok = (X >= 0) & (Y >= 0) & (X < n - 1) & (Y < n - 1)
    i = np.floor(X[ok]).astype(int)
    j = np.floor(Y[ok]).astype(int)
    s, t = X[ok] - i, Y[ok] - j
    low = t <= s
    lower = U[i, j] + s * (U[i + 1, j] - U[i, j]) + t * (U[i + 1, j + 1] - U[i + 1, j])
    upper = U[i, j] + t * (U[i, j + 1] - U[i, j]) + s * (U[i + 1, j + 1] - U[i, j + 1])
    out[ok] = np.where(low, lower, upper)
    return out


def radialize(grid, radial_profile):
    """Evaluate a radial profile at ``r = sqrt(r1^2 + r2^2)`` on the block grid."""
    x = grid.nodes
    rr = np.sqrt(x[:, None] ** 2 + x[None, :] ** 2)
    vals = np.interp(rr, radial_profile.grid.nodes, radial_profile.values, right=0.0)
    vals[-1, :] = 0.0
    vals[:, -1] = 0.0
    return BlockProfile(grid, vals)


# ---------------------------------------------------------------------------
# tau-constrained minimization


@dataclass
class TauConfig:
    k1: int = 2
    k2: int = 2
    exponent: float = 8.0
    regime: str = nl.ZERO_MASS
    R: float = 10.0
    n: int = 201
    margin: float = 1e-3
    max_iter: int = 5000
    tol_grad: float = 1e-7
    tol_energy: float = 1e-10
    stall_window: int = 20
    tol_pohozaev: float = 1e-6
    tol_root: float = 1e-12
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    init_amplitude: float = 2.0
    init_width: float = 2.0
    seed: int = 0

    @property
    def N(self):
        return self.k1 + self.k2

    def validate(self):
        if self.regime not in nl.REGIMES:
            raise ConfigurationError(f"unknown regime {self.regime!r}")
        if self.k1 != self.k2:
            raise ConfigurationError(f"tau symmetry needs k1 == k2, got k1={self.k1}, k2={self.k2}")
        for name in ("tol_grad", "tol_energy", "tol_pohozaev", "tol_root", "armijo", "min_step", "R"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0 < self.margin < 1:
            raise ConfigurationError(f"margin must lie in (0, 1), got {self.margin!r}")
        if not 0 < self.backtrack < 1:
            raise ConfigurationError(f"backtrack factor must lie in (0, 1), got {self.backtrack!r}")
        if int(self.n) != self.n or self.n < 5:
            raise ConfigurationError(f"n must be an integer >= 5, got {self.n!r}")
        if not (self.init_amplitude > 0 and self.init_width > 0):
            raise ConfigurationError("initial amplitude and width must be positive")
        return self

    def make_spec(self):
        try:
            return nl.make_spec(self.regime, self.N, self.exponent)
        except PreconditionError as exc:
            raise ConfigurationError(str(exc)) from None

    def make_grid(self):
        return BlockRadialGrid(self.k1, self.k2, self.R, self.n)

    def to_dict(self):
        return asdict(self)


@dataclass
class TauResult:
    profile: TauProfile
    energy: float
    pohozaev_residual: float
    psi: float
    sup_gradient: float
    theta_history: List[float]
    energy_history: List[float]
    iterations: int
    converged: bool
    termination: str
    grad_norm: float
    max_value: float
    min_value: float
    diagonal_max: float
    lower_energy: float
    edge_ratio: float

    @property
    def sign(self):
        return "sign-changing" if self.max_value > 0 > self.min_value else "constant-sign"

    def summary(self):
        return {
            "energy": self.energy,
            "pohozaev_residual": self.pohozaev_residual,
            "psi": self.psi,
            "sup_gradient": self.sup_gradient,
            "iterations": self.iterations,
            "converged": self.converged,
            "termination": self.termination,
            "grad_norm": self.grad_norm,
            "max_value": self.max_value,
            "min_value": self.min_value,
            "diagonal_max": self.diagonal_max,
            "lower_energy": self.lower_energy,
            "edge_ratio": self.edge_ratio,
        }


class _TauProblem:
    """Unknowns ``z`` are the values strictly below the diagonal and off the Dirichlet edge."""

    def __init__(self, grid, spec):
        _check(grid, spec)
        self.grid, self.spec = grid, spec
        self.mesh = grid._mesh
        self.om = grid.omega
        self.wv = grid.omega * grid.weights
        n = grid.n
        II, JJ = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        mask = (II > JJ) & (II < n - 1)
        self.zi = np.flatnonzero(mask.ravel())
        self.zt = (JJ.ravel()[self.zi] * n + II.ravel()[self.zi]).astype(int)
        m = self.zi.size
        self.E = sp.csr_matrix(
            (
                np.concatenate([np.ones(m), -np.ones(m)]),
                (np.concatenate([self.zi, self.zt]), np.concatenate([np.arange(m)] * 2)),
            ),
            shape=(n * n, m),
        )
        self.ET = self.E.T.tocsr()
        x = grid.nodes
        self.X = np.repeat(x, n)
        self.Y = np.tile(x, n)
        self.N = grid.N

    def full(self, z):
        u = np.zeros(self.grid.n**2)
        u[self.zi] = z
        u[self.zt] = -z
        return u

    def psi(self, u):
        return _psi2(self.mesh, self.om, u)

    def energy(self, u):
        return self.psi(u) - float(np.dot(self.wv, self.spec.F(u)))

    def pohozaev(self, u):
        return self.psi(u) - float(np.dot(self.wv, self.spec.H(u)))

    def theta(self, u, tol_root, P=None):
        P = self.psi(u) if P is None else P
        wv, H = self.wv, self.spec.H
        return pohozaev.solve_theta(lambda th: float(np.dot(wv, H(th * u))), P, tol_root)[0]

    def manifold_energy(self, u, theta, P):
        return theta**self.N * (P - float(np.dot(self.wv, self.spec.F(theta * u))))

    def resample(self, z, theta):
        u = self.full(z)
        v = theta * interpolate(self.grid, u, self.X[self.zi] / theta, self.Y[self.zi] / theta)
        return v

    def gradients(self, u):
        gp = _grad_psi2(self.mesh, self.om, u)
        g = self.ET @ (gp - self.wv * self.spec.f(u))
        nM = self.ET @ (gp - self.wv * self.spec.Hprime(u))
        return g, nM

    def factor(self, u):
        K = (self.ET @ _hess_psi2(self.mesh, self.om, u) @ self.E).tocsc()
        if self.spec.regime == nl.POSITIVE_MASS:
            K = K + sp.diags(self.wv[self.zi] + self.wv[self.zt])
        # tiny diagonal shift guards against exactly singular factors on coarse grids
        K = K + sp.diags(np.full(K.shape[0], 1e-12 * float(K.diagonal().mean())))
        return splu(K.tocsc())

    def max_slope(self, u):
        return self.mesh.max_grad(u)


def _initial_tau(grid, a, w):
    x = grid.nodes
    X, Y = x[:, None], x[None, :]
    v = a * (X * X - Y * Y) / (w * w) * np.exp(-(X * X + Y * Y) / (w * w))
    v[-1, :] = 0.0
    v[:, -1] = 0.0
    return v


def minimize_tau(config, spec=None, callback=None):
    """Minimize the energy over tau-antisymmetric profiles on the Pohozaev manifold.

    Same iteration as :func:`bornground.optimizer.minimize`, in the variables
    below the diagonal; values above are their negatives, so every iterate is
    exactly tau-fixed and vanishes on the diagonal.

    Raises
    ------
    PreconditionError
        If ``f`` is not odd on the sampled set.
    """
    config.validate()
    spec = spec or config.make_spec()
    if not spec.is_odd():
        raise PreconditionError("tau-antisymmetric minimization needs an odd nonlinearity")
    grid = config.make_grid()
    prob = _TauProblem(grid, spec)

    a, w = config.init_amplitude, config.init_width
    v0 = _initial_tau(grid, a, w)
    if prob.max_slope(v0.ravel()) >= 1.0 - config.margin:
        raise ConfigurationError("initial tau profile violates the gradient bound; lower init_amplitude")
    z = v0.ravel()[prob.zi]
    for _ in range(60):
        th = prob.theta(prob.full(z), config.tol_root)
        a, w = a * th, w * th
        z = _initial_tau(grid, a, w).ravel()[prob.zi]
        if abs(th - 1.0) < 1e-12:
            break

    thetas, energies = [], [prob.energy(prob.full(z))]
    alpha, gn, reason, it = 1.0, np.inf, "max-iterations", 0
    limit = 1.0 - config.margin
    for it in range(1, config.max_iter + 1):
        u = prob.full(z)
        g, nM = prob.gradients(u)
        lu = prob.factor(u)
        pg, pn = lu.solve(g), lu.solve(nM)
        nn = float(nM @ pn)
        s = pg - (float(nM @ pg) / nn) * pn
        gs = float(g @ s)
        gn = math.sqrt(abs(gs))
        if not math.isfinite(gn):
            raise NumericalFailure("non-finite gradient in tau minimization")
        if gn < config.tol_grad:
            reason = "gradient-norm"
            it -= 1
            break
        corr = (prob.pohozaev(u) / nn) * pn
        E0 = prob.energy(u)
        step = min(1.0, 2.0 * alpha)
        admissible = False
        accepted = False
        while step >= config.min_step:
            zv = z - step * s - corr
            v = prob.full(zv)
            if prob.max_slope(v) < limit:
                admissible = True
                P = prob.psi(v)
                thv = prob.theta(v, config.tol_root, P)
                Ev = prob.manifold_energy(v, thv, P)
                if Ev <= E0 - config.armijo * step * gs + 1e-13 * abs(E0):
                    accepted = True
                    break
            step *= config.backtrack
        if not accepted:
            if not admissible:
                raise ConstraintStallError(f"no interior step (max|grad u| = {prob.max_slope(u):.6g})")
            reason = "line-search-exhausted"
            it -= 1
            break
        z = prob.resample(zv, thv)
        alpha = step
        thetas.append(thv)
        energies.append(prob.energy(prob.full(z)))
        if callback is not None:
            callback(it, energies[-1], gn)
        W = config.stall_window
        if len(energies) > W and abs(energies[-1 - W] - energies[-1]) <= config.tol_energy * abs(energies[-1]):
            reason = "energy-stall"
            break

    # Newton polish of M along the preconditioned normal
    for _ in range(4):
        u = prob.full(z)
        Mv = prob.pohozaev(u)
        if abs(Mv) <= 1e-15 * max(1.0, prob.psi(u)):
            break
        _, nM = prob.gradients(u)
        pn = prob.factor(u).solve(nM)
        z = z - Mv / float(nM @ pn) * pn

    u = prob.full(z)
    U = u.reshape(grid.shape)
    prof = TauProfile(grid, U)
    lower = functionals2(prof, spec, "lower").energy
    P = prob.psi(u)
    E = prob.energy(u)
    Mres = prob.pohozaev(u)
    scale = float(np.max(np.abs(U)))
    edge = float(max(np.max(np.abs(U[int(0.9 * (grid.n - 1)) :, :])), np.max(np.abs(U[:, int(0.9 * (grid.n - 1)) :]))))
    return TauResult(
        profile=prof,
        energy=E,
        pohozaev_residual=Mres,
        psi=P,
        sup_gradient=prob.max_slope(u),
        theta_history=thetas,
        energy_history=energies,
        iterations=it,
        converged=reason != "max-iterations" and abs(Mres) <= config.tol_pohozaev * max(1.0, P),
        termination=reason,
        grad_norm=gn,
        max_value=float(U.max()),
        min_value=float(U.min()),
        diagonal_max=float(np.max(np.abs(np.diag(U)))),
        lower_energy=lower,
        edge_ratio=edge / scale if scale else 0.0,
    )


@dataclass
class DoublingReport:
    tau_energy: float
    tau_energy_coarse: float
    radial_energy: float
    radial_energy_coarse: float
    tau_error: float
    radial_error: float
    margin: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def richardson_error(fine, coarse, order=2):
    """Error estimate of ``fine`` from one refinement by a factor of 2."""
    return abs(fine - coarse) / (2**order - 1)


def doubling_check(tau_fine, tau_coarse, radial_fine, radial_coarse):
    """Compare ``inf_tau I`` with twice the radial level, margin versus discretization error."""
    et = richardson_error(tau_fine, tau_coarse)
    er = richardson_error(radial_fine, radial_coarse)
    margin = tau_fine - 2.0 * radial_fine
    return DoublingReport(
        tau_energy=tau_fine,
        tau_energy_coarse=tau_coarse,
        radial_energy=radial_fine,
        radial_energy_coarse=radial_coarse,
        tau_error=et,
        radial_error=er,
        margin=margin,
        passed=bool(margin > et + 2.0 * er),
    )


def write_block_csv(path, u):
    """Row-major ``r1,r2,u`` rows."""
    x = u.grid.nodes
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r1,r2,u\n")
        for i, r1 in enumerate(x):
            for j, r2 in enumerate(x):
                fh.write(f"{r1:.17g},{r2:.17g},{u.values[i, j]:.17g}\n")


def read_block_csv(path, k1, k2):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = int(round(math.sqrt(data.shape[0])))
    if n * n != data.shape[0]:
        raise ConfigurationError("block CSV does not hold a square grid")
    grid = BlockRadialGrid(k1, k2, float(data[-1, 0]), n)
    return BlockProfile(grid, data[:, 2].reshape(n, n))
