"""Nonlinearities ``f`` for the zero-mass and positive-mass regimes.

A :class:`NonlinearitySpec` is an immutable bundle of callables.  Every
callable must accept both floats and numpy arrays.  In the positive-mass
regime ``f(s) = -s + g(s)`` and the spec also carries ``g``, ``g'`` and ``G``.

The hypothesis audit is sample based; it can show that an assumption fails
on the samples, never that it holds on all of R.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import PreconditionError

ZERO_MASS = "zero-mass"
POSITIVE_MASS = "positive-mass"
REGIMES = (ZERO_MASS, POSITIVE_MASS)

Scalar = Callable[[np.ndarray], np.ndarray]


def critical_exponent(N):
    """Sobolev exponent ``2N/(N-2)`` (infinite for N <= 2)."""
    return np.inf if N <= 2 else 2.0 * N / (N - 2)


@dataclass(frozen=True)
class NonlinearitySpec:
    regime: str
    dimension: int
    f: Scalar
    fprime: Scalar
    F: Scalar
    g: Optional[Scalar] = None
    gprime: Optional[Scalar] = None
    G: Optional[Scalar] = None
    params: dict = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise PreconditionError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.regime == POSITIVE_MASS and (self.g is None or self.G is None):
            raise PreconditionError("positive-mass specs must supply g and G")

    @property
    def N(self):
        return self.dimension

    def H(self, s):
        """``F(s) + f(s) s / N``; in the positive-mass case this absorbs the mass term."""
        return self.F(s) + self.f(s) * s / self.dimension

    def Hprime(self, s):
        return self.f(s) + (self.fprime(s) * s + self.f(s)) / self.dimension

    def h(self, s):
        """Positive-mass only: ``g(s) s / 2 - G(s)``, nonnegative under (G2)."""
        if self.regime != POSITIVE_MASS:
            raise PreconditionError("h(s) is defined only in the positive-mass regime")
        return 0.5 * self.g(s) * s - self.G(s)

    def is_odd(self, samples=None, rtol=1e-12):
        s = default_samples() if samples is None else np.asarray(samples, dtype=float)
        fp, fm = self.f(s), self.f(-s)
        return bool(np.all(np.abs(fp + fm) <= rtol * np.maximum(1.0, np.abs(fp))))


def make_power_zero_mass(N, p):
    """``f(s) = |s|^(p-2) s`` with ``p`` above the Sobolev exponent ``2N/(N-2)``."""
    if N < 3:
        raise PreconditionError(f"zero-mass regime needs N >= 3, got N={N}")
    pc = critical_exponent(N)
    if not p > pc:
        raise PreconditionError(
            f"zero-mass power needs a supercritical exponent p > 2N/(N-2) = {pc:g}, got p={p:g}"
        )
    p = float(p)
    return NonlinearitySpec(
        regime=ZERO_MASS,
        dimension=int(N),
        f=lambda s: np.abs(s) ** (p - 2.0) * s,
        fprime=lambda s: (p - 1.0) * np.abs(s) ** (p - 2.0),
        F=lambda s: np.abs(s) ** p / p,
        params={"p": p},
        name=f"power-zero-mass(p={p:g})",
    )


def make_power_positive_mass(N, q):
    """``f(s) = -s + |s|^(q-2) s`` with ``q > 2``."""
    if N < 1:
        raise PreconditionError(f"positive-mass regime needs N >= 1, got N={N}")
    if not q > 2:
        raise PreconditionError(f"positive-mass power needs q > 2 for (G2)/(G3), got q={q:g}")
    q = float(q)

    def g(s):
        return np.abs(s) ** (q - 2.0) * s

    def gprime(s):
        return (q - 1.0) * np.abs(s) ** (q - 2.0)

    def G(s):
        return np.abs(s) ** q / q

    return NonlinearitySpec(
        regime=POSITIVE_MASS,
        dimension=int(N),
        f=lambda s: -s + g(s),
        fprime=lambda s: -1.0 + gprime(s),
        F=lambda s: -0.5 * s * s + G(s),
        g=g,
        gprime=gprime,
        G=G,
        params={"q": q},
        name=f"power-positive-mass(q={q:g})",
    )


def make_log_zero_mass(N, k0):
    """``F(s) = log(1 + s^(2 k0))``: satisfies (F1)-(F5) but not (F6).

    Kept as a negative control for the audit; the solver's behaviour on it
    is not covered by the existence theory.
    """
    if N < 3:
        raise PreconditionError(f"zero-mass regime needs N >= 3, got N={N}")
    if not 2 * k0 > critical_exponent(N):
        raise PreconditionError(f"need 2*k0 > 2N/(N-2), got k0={k0}")
    m = 2 * int(k0)

    def f(s):
        sm = s**m
        return m * s ** (m - 1) / (1.0 + sm)

    def fprime(s):
        sm = s**m
        return m * s ** (m - 2) * ((m - 1) - sm) / (1.0 + sm) ** 2

    return NonlinearitySpec(
        regime=ZERO_MASS,
        dimension=int(N),
        f=f,
        fprime=fprime,
        F=lambda s: np.log1p(s**m),
        params={"k0": int(k0)},
        name=f"log-zero-mass(k0={k0})",
    )


def make_spec(regime, N, exponent):
    if regime == ZERO_MASS:
        return make_power_zero_mass(N, exponent)
    if regime == POSITIVE_MASS:
        return make_power_positive_mass(N, exponent)
    raise PreconditionError(f"unknown regime {regime!r}; expected one of {REGIMES}")


# ---------------------------------------------------------------------------
# sampled hypothesis audit


def default_samples(lo=1e-3, hi=1e3, per_sign=61):
    pos = np.logspace(np.log10(lo), np.log10(hi), per_sign)
    return np.concatenate([-pos[::-1], pos])


def default_t_pairs(samples=None, ts=(1.1, 2.0, 4.0)):
    s = default_samples() if samples is None else np.asarray(samples, dtype=float)
    S, T = np.meshgrid(s, np.asarray(ts, dtype=float), indexing="ij")
    return np.column_stack([S.ravel(), T.ravel()])


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str = ""
    value: Optional[float] = None


@dataclass(frozen=True)
class AuditReport:
    spec_name: str
    regime: str
    checks: tuple

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c.name for c in self.checks if not c.passed]


def _monotone(values, increasing=True, strict=False, rtol=1e-12):
    d = np.diff(values)
    scale = rtol * np.maximum(np.abs(values[1:]), np.abs(values[:-1]))
    if not increasing:
        d = -d
    return bool(np.all(d > 0)) if strict else bool(np.all(d >= -scale))


def _halves(s):
    """Positive samples ascending, and |negative samples| ascending as the matching s values."""
    pos = np.sort(s[s > 0])
    neg = -np.sort(-s[s < 0])  # ascending in |s|: -1e-3, ..., -1e3
    return pos, neg


def _top_decade(x):
    a = np.abs(x)
    return x[a >= a.max() / 10.0]


def _growth(fn, half):
    """Is ``fn`` strictly increasing over the top decade of ``half`` (ordered by |s|)?"""
    top = _top_decade(half)
    vals = fn(top)
    return _monotone(vals, strict=True) and vals[-1] > vals[0], vals


def audit_assumptions(spec, sample_set=None, t_pairs=None):
    """Check the regime's hypotheses on finite samples and return an :class:`AuditReport`.

    Never raises on a failed hypothesis; failures are entries of the report.
    """
    s = default_samples() if sample_set is None else np.asarray(sample_set, dtype=float)
    s = s[s != 0.0]
    pairs = default_t_pairs(s) if t_pairs is None else np.asarray(t_pairs, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        finite = np.isfinite(spec.f(s)) & np.isfinite(spec.F(s))
    s = s[finite]
    if spec.regime == ZERO_MASS:
        checks = _audit_zero_mass(spec, s, pairs)
    else:
        checks = _audit_positive_mass(spec, s, pairs)
    return AuditReport(spec_name=spec.name, regime=spec.regime, checks=tuple(checks))


def _audit_zero_mass(spec, s, pairs):
    N = spec.dimension
    pos, neg = _halves(s)
    out = []

    f0, F0 = float(spec.f(0.0)), float(spec.F(0.0))
    out.append(HypothesisCheck("F1", f0 == 0.0 and F0 == 0.0, f"f(0)={f0:g}, F(0)={F0:g}"))

    a = np.abs(s)
    ratio = spec.fprime(s) / a ** (critical_exponent(N) - 2.0)
    low = ratio[a <= a.min() * 10.0]
    nxt = ratio[(a > a.min() * 10.0) & (a <= a.min() * 100.0)]
    ref = np.max(np.abs(nxt)) if nxt.size else np.inf
    low_max = float(np.max(low))
    out.append(
        HypothesisCheck(
            "F2",
            low_max <= max(1e-8, 0.5 * ref),
            "f'(s)/|s|^(2*-2) over the smallest decade vs the next",
            low_max,
        )
    )

    sHp = s * spec.Hprime(s)
    out.append(HypothesisCheck("F3", bool(np.all(sHp > 0)), "s H'(s) > 0 on samples", float(sHp.min())))

    gp, _ = _growth(spec.H, pos)
    gn, _ = _growth(spec.H, neg)
    Hmax = float(min(spec.H(pos[-1]), spec.H(neg[-1])))
    out.append(HypothesisCheck("F4", gp and gn and Hmax > 0, "H increasing over the top decade", Hmax))

    fs_pos = spec.f(pos) * pos
    fs_neg = spec.f(neg) * neg  # ordered by increasing |s|, i.e. decreasing s
    f5 = _monotone(fs_pos) and _monotone(fs_neg)
    out.append(HypothesisCheck("F5", f5, "s -> f(s)s monotone on each half-line"))

    sp, tp = pairs[:, 0], pairs[:, 1]
    keep = (sp != 0) & (tp > 1)
    sp, tp = sp[keep], tp[keep]
    with np.errstate(over="ignore", invalid="ignore"):
        lhs = spec.f(tp * sp) * tp * sp
        rhs = spec.f(sp) * sp
    ok = np.isfinite(lhs)
    f5p = bool(np.all(lhs[ok] >= rhs[ok] - 1e-12 * np.abs(rhs[ok])))
    out.append(HypothesisCheck("F5-pairs", f5p, "f(ts)ts >= f(s)s for sampled t > 1"))

    fs = np.abs(spec.f(s) * s)
    Fa = np.abs(spec.F(s))
    if np.any((fs == 0) & (Fa > 0)):
        out.append(HypothesisCheck("F6", False, "F(s) != 0 where f(s)s = 0", np.inf))
    else:
        C = float(np.max(np.where(fs > 0, Fa / np.where(fs > 0, fs, 1.0), 0.0)))
        grow_p, _ = _growth(lambda x: np.abs(spec.F(x)) / np.abs(spec.f(x) * x), pos)
        grow_n, _ = _growth(lambda x: np.abs(spec.F(x)) / np.abs(spec.f(x) * x), neg)
        top = _top_decade(pos)
        r = np.abs(spec.F(top)) / np.abs(spec.f(top) * top)
        unbounded = (grow_p or grow_n) and r[-1] > 1.01 * r[0]
        out.append(
            HypothesisCheck(
                "F6",
                not unbounded,
                "|F| <= C|f s| with C = max sampled ratio" + ("; ratio still growing" if unbounded else ""),
                C,
            )
        )
    return out


def _audit_positive_mass(spec, s, pairs):
    pos, neg = _halves(s)
    out = []

    g0, gp0 = float(spec.g(0.0)), float(spec.gprime(0.0))
    out.append(HypothesisCheck("G1", g0 == 0.0 and gp0 == 0.0, f"g(0)={g0:g}, g'(0)={gp0:g}"))

    srt = np.sort(s)
    q = spec.g(srt) / np.abs(srt)
    out.append(HypothesisCheck("G2", _monotone(q, strict=True), "g(s)/|s| strictly increasing"))

    ratio = lambda x: spec.g(x) / x  # noqa: E731
    gp, _ = _growth(ratio, pos)
    gn, _ = _growth(ratio, neg)
    out.append(HypothesisCheck("G3", gp and gn, "g(s)/s growing over the top decade", float(ratio(pos[-1]))))

    h_pos, h_neg = spec.h(pos), spec.h(neg)
    h0 = float(spec.h(0.0))
    hmin = float(min(h_pos.min(), h_neg.min()))
    out.append(HypothesisCheck("h>=0", hmin >= 0 and h0 == 0.0, "g(s)s/2 - G(s) >= 0", hmin))
    out.append(
        HypothesisCheck(
            "h-monotone",
            _monotone(h_pos) and _monotone(h_neg),
            "g(s)s/2 - G(s) nondecreasing in |s|",
        )
    )

    k = lambda x: spec.g(x) * x - 2.0 * spec.G(x)  # noqa: E731
    kp, _ = _growth(k, pos)
    kn, _ = _growth(k, neg)
    out.append(
        HypothesisCheck(
            "g2G-infinity",
            kp and kn and _monotone(k(pos)) and _monotone(k(neg)),
            "g(s)s - 2G(s) increasing toward +infinity",
            float(min(k(pos[-1]), k(neg[-1]))),
        )
    )

    sp, tp = pairs[:, 0], pairs[:, 1]
    keep = (sp != 0) & (tp > 1)
    sp, tp = sp[keep], tp[keep]
    with np.errstate(over="ignore", invalid="ignore"):
        val = spec.gprime(tp * sp) + spec.g(tp * sp) / (tp * sp) - 2.0 * spec.g(sp) / sp
    ok = np.isfinite(val)
    out.append(
        HypothesisCheck(
            "nehari-pointwise",
            bool(np.all(val[ok] >= 0)),
            "g'(ts) + g(ts)/(ts) - 2g(s)/s >= 0 for sampled t > 1",
            float(val[ok].min()) if ok.any() else None,
        )
    )
    return out


@dataclass(frozen=True)
class NehariReport:
    tested: int
    skipped: int
    violations: tuple

    @property
    def passed(self):
        return self.tested > 0 and not self.violations


def nehari_check(spec, weights, profiles, ts=(1.1, 2.0, 4.0)):
    """Check ``int f(tu)tu > int f(u)u`` for ``t > 1`` whenever ``int f(u)u > 0``.

    ``weights`` are quadrature weights (volume factor included) matching the
    nodal arrays in ``profiles``.  Profiles with ``int f(u)u <= 0`` fall outside
    the hypothesis and are counted as skipped.
    """
    weights = np.asarray(weights, dtype=float)
    tested = skipped = 0
    bad = []
    for idx, u in enumerate(profiles):
        u = np.asarray(u, dtype=float)
        beta = float(np.sum(weights * spec.f(u) * u))
        if beta <= 0:
            skipped += 1
            continue
        tested += 1
        for t in ts:
            if t <= 1:
                raise PreconditionError(f"nehari check needs t > 1, got {t}")
            val = float(np.sum(weights * spec.f(t * u) * t * u))
            if not val > beta:
                bad.append((idx, float(t), beta, val))
    return NehariReport(tested=tested, skipped=skipped, violations=tuple(bad))
