"""Sobolev-type inequality ``Psi(u) >= C (int |u|^p)^(N/(N+p))`` for the zero-mass power case.

The best constant is expressed through the ground-state level ``c0``:

    C = ((N + p) / (N p)) * N^(p/(N+p)) * c0^(p/(N+p)),

and equality holds at ground states.  Both sides scale like ``theta^N``
under ``u -> theta u(. / theta)``, so the ratio is scale invariant.
"""

from dataclasses import dataclass, field

import numpy as np

from . import nonlinearity as nl
from . import radial
from .errors import DegenerateInputError, PreconditionError

MAX_TRIAL_SLOPE = 0.95


def best_constant(N, p, c0):
    """``((N+p)/(Np)) N^(p/(N+p)) c0^(p/(N+p))``."""
    if N < 3:
        raise PreconditionError(f"need N >= 3, got N={N}")
    if not p > nl.critical_exponent(N):
        raise PreconditionError(f"need p > 2N/(N-2) = {nl.critical_exponent(N):g}, got p={p:g}")
    if not c0 > 0:
        raise PreconditionError(f"ground-state level must be positive, got c0={c0!r}")
    e = p / (N + p)
    return (N + p) / (N * p) * N**e * c0**e


def _power(spec):
    if spec.regime != nl.ZERO_MASS or "p" not in spec.params:
        raise PreconditionError("the Sobolev audit is defined for the zero-mass power nonlinearity")
    return spec.dimension, spec.params["p"]


def audit_trial(u, spec, constant=None):
    """``Psi(u) / (int |u|^p)^(N/(N+p))`` for one admissible trial profile.

    ``constant`` is accepted for interface symmetry with :func:`batch_audit`
    and otherwise unused.
    """
    N, p = _power(spec)
    if not np.any(u.values):
        raise DegenerateInputError("the zero profile has no Sobolev ratio")
    up = radial.lp_norm(u, p) ** p
    return radial.psi(u) / up ** (N / (N + p))


@dataclass
class SobolevAudit:
    N: int
    p: float
    c0: float
    constant: float
    trials: list = field(default_factory=list)  # (ratio, margin) pairs
    tol: float = 0.0

    @property
    def min_ratio(self):
        return min(r for r, _ in self.trials) if self.trials else np.nan

    @property
    def violations(self):
        return [i for i, (_, m) in enumerate(self.trials) if m < -self.tol]

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return {
            "N": self.N,
            "p": self.p,
            "c0": self.c0,
            "constant": self.constant,
            "min_ratio": self.min_ratio,
            "trial_count": len(self.trials),
            "violations": self.violations,
        }


def random_trial(rng, grid, max_slope=MAX_TRIAL_SLOPE):
    """Sum of 1 to 4 Gaussian bumps with random centres, widths and amplitudes.

    The sum is rescaled in amplitude so that its steepest cell slope equals
    ``max_slope * U`` with ``U`` uniform in (0.2, 1).
    """
    R = grid.R
    r = grid.nodes
    k = int(rng.integers(1, 5))
    v = np.zeros(grid.n)
    for _ in range(k):
        c = rng.uniform(0.0, 0.4 * R)
        s = rng.uniform(0.03 * R, 0.2 * R)
        a = rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0])
        v += a * np.exp(-(((r - c) / s) ** 2))
    # taper to zero at R
    v *= np.clip((R - r) / (0.1 * R), 0.0, 1.0)
    v[-1] = 0.0
    slope = np.max(np.abs(np.diff(v))) / grid.h
    if slope == 0:
        return random_trial(rng, grid, max_slope)
    v *= max_slope * rng.uniform(0.2, 1.0) / slope
    return radial.Profile(grid, v)


def batch_audit(seed, count, spec, constant, c0=None, grid=None, profiles=(), tol=1e-9):
    """Audit the inequality on ``count`` random trials plus any given ``profiles``.

    A trial violates when its ratio falls below ``constant`` by more than
    ``tol`` relative.
    """
    if count < 0 or (count == 0 and not profiles):
        raise PreconditionError("need at least one trial profile")
    N, p = _power(spec)
    grid = grid or radial.RadialGrid(N, 20.0, 1001)
    rng = np.random.default_rng(seed)
    audit = SobolevAudit(N=N, p=p, c0=np.nan if c0 is None else c0, constant=constant, tol=tol)
    for u in list(profiles) + [random_trial(rng, grid) for _ in range(count)]:
        ratio = audit_trial(u, spec, constant)
        audit.trials.append((ratio, (ratio - constant) / constant))
    return audit
