"""Ground states by descent on the discrete Pohozaev manifold.

Each iteration

1. forms the energy gradient ``g`` and the Pohozaev normal ``n`` at ``u``;
2. removes the normal component of ``g`` in the inner product given by the
   Hessian ``P`` of ``Psi`` (a Sobolev-type metric; the plain Euclidean
   gradient is useless here because its conditioning grows like ``n^2``);
3. takes a backtracking step along the projected direction plus a first-order
   correction of ``M``, keeping every cell slope below ``1 - margin``;
4. accepts the trial only if the energy *on the manifold*,
   ``theta^N (Psi(v) - Phi(theta v))`` with ``theta = theta(v)``, decreases;
5. retracts onto the manifold by resampling ``v_theta``.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
from scipy.linalg import solve_banded

from . import nonlinearity as nl
from . import pohozaev, radial
from .errors import (
    AuditWarning,
    ConfigurationError,
    ConstraintStallError,
    ConstraintViolation,
    MultiStartFailure,
    NumericalFailure,
    PreconditionError,
    StepFailure,
    TruncationWarning,
)

AUTO_R = {nl.ZERO_MASS: 40.0, nl.POSITIVE_MASS: 20.0}
DECAY_TARGET = 1e-4


@dataclass
class SolverConfig:
    """Parameters of a ground-state run.

    ``R = None`` selects a regime-dependent truncation radius (40 for zero
    mass, 20 for positive mass).
    """

    regime: str = nl.ZERO_MASS
    N: int = 3
    exponent: float = 8.0
    R: Optional[float] = None
    n: int = 4001
    margin: float = 1e-3
    max_iter: int = 50_000
    tol_grad: float = 1e-7
    tol_energy: float = 1e-10
    stall_window: int = 20
    tol_pohozaev: float = 1e-6
    tol_root: float = 1e-12
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    init_family: str = "gaussian"
    init_amplitude: float = 1.0
    init_width: float = 2.0
    seed: int = 0

    @property
    def radius(self):
        return AUTO_R[self.regime] if self.R is None else float(self.R)

    def validate(self):
        if self.regime not in nl.REGIMES:
            raise ConfigurationError(f"unknown regime {self.regime!r}; expected one of {nl.REGIMES}")
        for name in ("tol_grad", "tol_energy", "tol_pohozaev", "tol_root", "armijo", "min_step"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0 < self.margin < 1:
            raise ConfigurationError(f"margin must lie in (0, 1), got {self.margin!r}")
        if not 0 < self.backtrack < 1:
            raise ConfigurationError(f"backtrack factor must lie in (0, 1), got {self.backtrack!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if int(self.stall_window) != self.stall_window or self.stall_window < 1:
            raise ConfigurationError(f"stall_window must be a positive integer, got {self.stall_window!r}")
        if self.R is not None and not self.R > 0:
            raise ConfigurationError(f"R must be positive, got {self.R!r}")
        if int(self.n) != self.n or self.n < 11:
            raise ConfigurationError(f"n must be an integer >= 11, got {self.n!r}")
        if self.init_family not in ("gaussian", "sign-changing"):
            raise ConfigurationError(f"unknown initial family {self.init_family!r}")
        if not (self.init_amplitude > 0 and self.init_width > 0):
            raise ConfigurationError("initial amplitude and width must be positive")
        slope = _family_max_slope(self.init_family) * self.init_amplitude / self.init_width
        if slope >= 1.0 - self.margin:
            raise ConfigurationError(
                f"initial profile slope {slope:.3g} exceeds the admissible bound {1 - self.margin:g}"
            )
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        return self

    def make_spec(self):
        try:
            return nl.make_spec(self.regime, self.N, self.exponent)
        except PreconditionError as exc:
            raise ConfigurationError(str(exc)) from None

    def make_grid(self):
        return radial.RadialGrid(self.N, self.radius, self.n)

    def to_dict(self):
        d = asdict(self)
        d["R"] = self.radius
        return d


@dataclass(frozen=True)
class StepControls:
    alpha0: float = 1.0
    margin: float = 1e-3
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-12
    tol_root: float = 1e-12


@dataclass(frozen=True)
class StepOutcome:
    profile: radial.Profile
    energy: float
    energy_before: float
    theta: float
    step: float
    grad_norm: float


@dataclass
class GroundStateResult:
    profile: radial.Profile
    energy: float
    pohozaev_residual: float
    psi: float
    sup_gradient: float
    theta_history: List[float]
    energy_history: List[float]
    iterations: int
    sign: str
    monotone: bool
    converged: bool
    termination: str
    grad_norm: float
    decay_ratio: float
    diagnostics: dict = field(default_factory=dict)

    def summary(self):
        return {
            "energy": self.energy,
            "pohozaev_residual": self.pohozaev_residual,
            "psi": self.psi,
            "sup_gradient": self.sup_gradient,
            "iterations": self.iterations,
            "sign": self.sign,
            "monotone": self.monotone,
            "converged": self.converged,
            "termination": self.termination,
            "grad_norm": self.grad_norm,
            "decay_ratio": self.decay_ratio,
        }


# ---------------------------------------------------------------------------


def _family_max_slope(family):
    # max |d/dx e^{-x^2}| = sqrt(2/e); for (1 - 2x^2) e^{-x^2} it is attained near x = 1.5
    if family == "gaussian":
        return math.sqrt(2.0 / math.e)
    x = np.linspace(0, 5, 20001)
    return float(np.max(np.abs(np.gradient((1 - 2 * x * x) * np.exp(-x * x), x))))


def initial_values(grid, family="gaussian", amplitude=1.0, width=2.0):
    x = grid.nodes / width
    if family == "gaussian":
        v = amplitude * np.exp(-x * x)
    elif family == "sign-changing":
        v = amplitude * (1.0 - 2.0 * x * x) * np.exp(-x * x)
    else:
        raise ConfigurationError(f"unknown initial family {family!r}")
    v[-1] = 0.0
    return v


class _Problem:
    """Array-level view of the discrete functionals for one grid and spec."""

    def __init__(self, grid, spec):
        radial._check_dim(grid, spec)
        self.grid, self.spec = grid, spec
        self.wv = grid.sphere_area * grid.weights
        self.mass = 1.0 if spec.regime == nl.POSITIVE_MASS else 0.0
        self.N = grid.N

    def psi(self, u, margin=radial.PSI_MARGIN):
        return radial._psi(self.grid, u, margin)

    def energy(self, u):
        return self.psi(u) - float(np.dot(self.wv, self.spec.F(u)))

    def pohozaev(self, u):
        return self.psi(u) - float(np.dot(self.wv, self.spec.H(u)))

    def gradients(self, u):
        gp = radial._grad_psi(self.grid, u)
        g = gp - self.wv * self.spec.f(u)
        nM = gp - self.wv * self.spec.Hprime(u)
        g[-1] = nM[-1] = 0.0
        return g, nM

    def preconditioner(self, u):
        ab = radial.psi_hessian_banded(self.grid, u, self.mass)
        m = self.grid.n - 1

        def apply(x):
            return np.append(solve_banded((1, 1), ab, x[:m]), 0.0)

        return apply

    def theta(self, u, tol_root, P=None):
        return pohozaev._theta_arrays(self.grid, self.spec, u, tol_root, P=P)[0]

    def manifold_energy(self, u, theta, P):
        return theta**self.N * (P - float(np.dot(self.wv, self.spec.F(theta * u))))

    def resample(self, u, theta):
        return radial._resample(self.grid, u, theta)

    def max_slope(self, u):
        return float(np.max(np.abs(np.diff(u)))) / self.grid.h

    def normal_correction(self, u, iterations=4, tol=1e-15):
        """Newton steps on ``M`` along ``P^{-1} n``; leaves the energy level unchanged to first order."""
        for _ in range(iterations):
            Mv = self.pohozaev(u)
            if not math.isfinite(Mv):
                raise NumericalFailure(f"non-finite Pohozaev value M={Mv}")
            if abs(Mv) <= tol * max(1.0, self.psi(u)):
                break
            _, nM = self.gradients(u)
            pn = self.preconditioner(u)(nM)
            u = u - Mv / float(nM @ pn) * pn
        return u


def _step(prob, u, controls, alpha):
    """One projected descent step; returns ``(v_resampled, E_new, E0, theta, alpha, gn)``."""
    g, nM = prob.gradients(u)
    E0 = prob.energy(u)
    if not math.isfinite(E0) or not np.all(np.isfinite(g)):
        raise NumericalFailure(f"non-finite energy or gradient (E={E0})")
    Pinv = prob.preconditioner(u)
    pg, pn = Pinv(g), Pinv(nM)
    nn = float(nM @ pn)
    lam = float(nM @ pg) / nn
    s = pg - lam * pn
    gs = float(g @ s)
    gn = math.sqrt(abs(gs))
    Mv = prob.pohozaev(u)
    corr = (Mv / nn) * pn
    if not math.isfinite(gn) or not math.isfinite(Mv):
        raise NumericalFailure(f"non-finite gradient norm or Pohozaev value (|g|={gn}, M={Mv})")
    limit = 1.0 - controls.margin
    a = min(controls.alpha0, alpha)
    ever_admissible = False
    while a >= controls.min_step:
        v = u - a * s - corr
        if prob.max_slope(v) < limit:
            ever_admissible = True
            P = prob.psi(v)
            th = prob.theta(v, controls.tol_root, P)
            Ev = prob.manifold_energy(v, th, P)
            if not math.isfinite(Ev):
                raise NumericalFailure(f"non-finite trial energy at step {a:g}")
            if Ev <= E0 - controls.armijo * a * gs + 1e-13 * abs(E0):
                return prob.resample(v, th), Ev, E0, th, a, gn
        a *= controls.backtrack
    if not ever_admissible:
        raise ConstraintStallError(
            f"no step keeps max|du| below {limit:g} (current max|du| = {prob.max_slope(u):.6g}, "
            f"|grad| = {gn:.3g})"
        )
    raise StepFailure(f"backtracking exhausted at step {a:g} (|grad| = {gn:.3g})")


def descend_and_project(u, spec, controls=None):
    """One descent step followed by reprojection onto the manifold.

    Raises :class:`StepFailure` when backtracking finds no acceptable step and
    :class:`ConstraintStallError` when no trial step stays interior.
    """
    controls = controls or StepControls()
    prob = _Problem(u.grid, spec)
    v = u.values
    if prob.max_slope(v) >= 1.0 - controls.margin:
        raise ConstraintViolation(prob.max_slope(v), 1.0 - controls.margin)
    new, Ev, E0, th, a, gn = _step(prob, v, controls, controls.alpha0)
    return StepOutcome(radial.Profile(u.grid, new), Ev, E0, th, a, gn)


def _project_in_family(prob, cfg):
    a, sig = cfg.init_amplitude, cfg.init_width
    v = initial_values(prob.grid, cfg.init_family, a, sig)
    for _ in range(60):
        th = prob.theta(v, cfg.tol_root)
        a, sig = a * th, sig * th
        v = initial_values(prob.grid, cfg.init_family, a, sig)
        if abs(th - 1.0) < 1e-12:
            break
    return v


def decay_ratio(u):
    """``max |u|`` over the outer tenth of the domain relative to ``max |u|``."""
    v = np.abs(u.values)
    r = u.grid.nodes
    scale = v.max()
    return float(v[r >= 0.9 * u.grid.R].max() / scale) if scale > 0 else 0.0


def minimize(config, spec=None, initial=None, warn=True):
    """Minimize the energy over the discrete Pohozaev manifold.

    Parameters
    ----------
    config : SolverConfig
    spec : NonlinearitySpec, optional
        Defaults to the power nonlinearity named by ``config``.
    initial : array_like, optional
        Starting nodal values; default is the configured bump family,
        rescaled within the family onto the manifold.

    Returns
    -------
    GroundStateResult
    """
    config.validate()
    spec = spec or config.make_spec()
    grid = config.make_grid()
    prob = _Problem(grid, spec)
    if warn:
        report = nl.audit_assumptions(spec)
        if not report.passed:
            warnings.warn(f"{spec.name}: sampled hypothesis checks failed: {report.failures()}", AuditWarning)

    if initial is None:
        u = _project_in_family(prob, config)
    else:
        u = np.array(initial, dtype=float)
        u[-1] = 0.0
        u = prob.resample(u, prob.theta(u, config.tol_root))
    u = prob.normal_correction(u)

    controls = StepControls(
        margin=config.margin,
        armijo=config.armijo,
        backtrack=config.backtrack,
        min_step=config.min_step,
        tol_root=config.tol_root,
    )
    thetas, energies = [], [prob.energy(u)]
    alpha, gn, reason, it = 1.0, np.inf, "max-iterations", 0
    for it in range(1, config.max_iter + 1):
        try:
            u_new, Ev, E0, th, a, gn = _step(prob, u, controls, 2.0 * alpha)
        except StepFailure:
            reason = "line-search-exhausted"
            it -= 1
            break
        if gn < config.tol_grad:
            reason = "gradient-norm"
            it -= 1
            break
        u, alpha = u_new, a
        thetas.append(th)
        energies.append(prob.energy(u))
        w = config.stall_window
        if len(energies) > w:
            ref = energies[-1 - w]
            if abs(ref - energies[-1]) <= config.tol_energy * abs(energies[-1]):
                reason = "energy-stall"
                break

    u = prob.normal_correction(u)
    prof = radial.Profile(grid, u)
    P = prob.psi(u)
    E = prob.energy(u)
    Mres = prob.pohozaev(u)
    dr = decay_ratio(prof)
    if dr > DECAY_TARGET and warn:
        warnings.warn(
            f"profile at r >= 0.9 R is {dr:.3g} of its maximum (target {DECAY_TARGET:g}); "
            "increase R for a smaller truncation error",
            TruncationWarning,
        )
    flux = radial.phi_prime_u(prof, spec)
    return GroundStateResult(
        profile=prof,
        energy=E,
        pohozaev_residual=Mres,
        psi=P,
        sup_gradient=prof.sup_gradient,
        theta_history=thetas,
        energy_history=energies,
        iterations=it,
        sign=radial.sign_flag(prof),
        monotone=radial.is_nonincreasing(prof, 1e-12),
        converged=reason in ("gradient-norm", "energy-stall", "line-search-exhausted")
        and abs(Mres) <= config.tol_pohozaev * max(1.0, P),
        termination=reason,
        grad_norm=gn,
        decay_ratio=dr,
        diagnostics={
            "R": grid.R,
            "n": grid.n,
            "spec": spec.name,
            "energy_identity_gap": abs(E - flux / grid.N) / abs(E) if E else np.nan,
            "u0": float(u[0]),
        },
    )


def path_scan(u, spec, thetas=None, tol=1e-6):
    """``(theta, I(u_theta))`` along the scaling path through a manifold point ``u``.

    Uses the exact scaling identity, so no resampling is involved.
    """
    thetas = np.logspace(-1.0, 1.0, 101) if thetas is None else np.asarray(thetas, dtype=float)
    if not (thetas.min() <= 1.0 <= thetas.max()):
        raise ConfigurationError("theta grid must bracket 1")
    if np.any(thetas <= 0):
        raise ConfigurationError("theta grid must be positive")
    P = radial.psi(u)
    if abs(radial.pohozaev(u, spec)) > tol * max(1.0, P):
        raise PreconditionError("path scan needs a point on the Pohozaev manifold")
    vals = np.array([pohozaev.scaled_energy(u, spec, t) for t in thetas])
    return np.column_stack([thetas, vals])


@dataclass
class MultiStartReport:
    best: GroundStateResult
    results: list
    energies: list
    spread: float
    failures: list
    starts: list


def _start_params(config, k, include_sign_changing):
    rng = np.random.default_rng(config.seed)
    starts = [(config.init_family, config.init_amplitude, config.init_width)]
    cap = (1.0 - config.margin) * 0.8
    for i in range(1, k):
        fam = "sign-changing" if include_sign_changing and i == k - 1 else "gaussian"
        width = float(rng.uniform(1.0, 4.0))
        amp = float(rng.uniform(0.5, 1.5))
        amp = min(amp, cap * width / _family_max_slope(fam))
        starts.append((fam, amp, width))
    return starts


def multi_start(config, spec=None, k=5, include_sign_changing=False, workers=1):
    """Run :func:`minimize` from ``k`` seeded starts and keep the lowest energy.

    Ties are broken by start order.  Raises :class:`MultiStartFailure` when
    every start fails.
    """
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    config.validate()
    spec = spec or config.make_spec()
    starts = _start_params(config, k, include_sign_changing)

    def run(params):
        fam, amp, width = params
        cfg = SolverConfig(**{**asdict(config), "init_family": fam, "init_amplitude": amp, "init_width": width})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            return minimize(cfg, spec, warn=False)

    outcomes = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(run, s) for s in starts]
            for f in futs:
                try:
                    outcomes.append(f.result())
                except Exception as exc:  # collected and reported
                    outcomes.append(exc)
    else:
        for s in starts:
            try:
                outcomes.append(run(s))
            except Exception as exc:
                outcomes.append(exc)

    failures = [(i, o) for i, o in enumerate(outcomes) if isinstance(o, Exception)]
    results = [o for o in outcomes if not isinstance(o, Exception)]
    if not results:
        raise MultiStartFailure(failures)
    energies = [r.energy for r in results]
    best = results[int(np.argmin(energies))]
    lo = min(energies)
    spread = (max(energies) - lo) / abs(lo)
    return MultiStartReport(best, results, energies, spread, failures, starts)
