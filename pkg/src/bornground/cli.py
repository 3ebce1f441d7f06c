"""Command-line interface.

Usage::

    bornground SUBCOMMAND --config PATH [--out DIR] [--seed U64] [--check-only]

Subcommands: solve, shoot, audit-sobolev, nonradial, pointcharge, check-only.

The config file is flat ``key = value`` text.  Keys before the first
``[section]`` header apply to every subcommand; a ``[solve]``, ``[shoot]``,
... section overrides them for that subcommand.  ``#`` starts a comment.

Exit status: 0 when every check passes, 1 on a runtime or numerical failure
(or a failed check), 2 on a configuration error.
"""

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import nonlinearity as nl
from . import nonradial, optimizer, pointcharge, radial, shooting, sobolev
from .errors import BornInfeldError, ConfigurationError, DomainError, PreconditionError

SUBCOMMANDS = ("solve", "shoot", "audit-sobolev", "nonradial", "pointcharge", "check-only")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------------------
# config file


@dataclass
class ConfigFile:
    path: str
    sections: dict = field(default_factory=dict)  # name -> {key: (value, line)}

    def view(self, section):
        merged = dict(self.sections.get("", {}))
        merged.update(self.sections.get(section, {}))
        return merged


def parse_config(text, path="<config>"):
    """Parse ``key = value`` lines with optional ``[section]`` headers."""
    cfg = ConfigFile(path=path, sections={"": {}})
    current = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigurationError(f"malformed section header {raw.strip()!r}", line=lineno)
            current = line[1:-1].strip()
            if current not in SUBCOMMANDS:
                raise ConfigurationError(f"unknown section [{current}]", line=lineno)
            cfg.sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigurationError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigurationError("empty key", line=lineno)
        if key in cfg.sections[current]:
            raise ConfigurationError(f"duplicate key {key!r}", line=lineno)
        cfg.sections[current][key] = (value, lineno)
    return cfg


def read_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc.strerror}") from None
    return parse_config(text, path)


def _bool(s):
    v = s.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _optfloat(s):
    return None if s.lower() in ("auto", "none") else float(s)


def _uint64(s):
    v = int(s, 0)
    if not 0 <= v < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return v


# key -> converter, per subcommand
_COMMON = {"regime": str, "N": int, "exponent": float, "seed": _uint64}
_SCHEMA = {
    "solve": {
        **_COMMON,
        "R": _optfloat,
        "n": int,
        "margin": float,
        "max_iter": int,
        "tol_grad": float,
        "tol_energy": float,
        "tol_pohozaev": float,
        "init_amplitude": float,
        "init_width": float,
        "multi_start": int,
    },
    "shoot": {**_COMMON, "R": _optfloat, "n": int, "s_lo": float, "s_hi": float, "tol_s": float, "step": float},
    "audit-sobolev": {
        **_COMMON,
        "c0": float,
        "summary": str,
        "profile": str,
        "count": int,
        "R": float,
        "n": int,
        "inflate": float,
    },
    "nonradial": {
        **_COMMON,
        "k1": int,
        "k2": int,
        "R": float,
        "n": int,
        "margin": float,
        "max_iter": int,
        "doubling": _bool,
        "coarse_n": int,
        "radial_n": int,
        "radial_R": _optfloat,
    },
    "pointcharge": {"b": float, "R_max": float, "tol": float, "seed": _uint64},
}


def typed_section(cfg, section):
    """Convert the merged key/value view of ``section`` against its schema."""
    schema = _SCHEMA[section]
    all_keys = set().union(*_SCHEMA.values())
    out = {}
    for key, (value, line) in cfg.view(section).items():
        if key not in all_keys:
            raise ConfigurationError(f"unknown key {key!r}", line=line)
        if key not in schema:
            if key in cfg.sections.get(section, {}):
                raise ConfigurationError(f"key {key!r} is not used by {section}", line=line)
            continue  # global key meant for another subcommand
        try:
            out[key] = schema[key](value)
        except ValueError as exc:
            raise ConfigurationError(f"bad value for {key!r}: {exc}", line=line) from None
    return out


def _line_of(cfg, section, key):
    entry = cfg.view(section).get(key)
    return entry[1] if entry else None


# ---------------------------------------------------------------------------
# summaries


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


@dataclass
class RunSummary:
    subcommand: str
    config: dict
    headline: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    wall_time_s: float = 0.0
    tool_version: str = __version__

    def check(self, name, value, tolerance, passed, relation="<="):
        self.checks.append(
            {"name": name, "value": value, "relation": relation, "tolerance": tolerance, "passed": bool(passed)}
        )

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def to_dict(self):
        return _clean(
            {
                "tool": "bornground",
                "tool_version": self.tool_version,
                "subcommand": self.subcommand,
                "config": self.config,
                "headline": self.headline,
                "checks": self.checks,
                "passed": self.passed,
                "warnings": self.warnings,
                "wall_time_s": self.wall_time_s,
            }
        )

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, ensure_ascii=False)
            fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def _solver_config(opts):
    keys = {k: v for k, v in opts.items() if k in optimizer.SolverConfig.__dataclass_fields__}
    cfg = optimizer.SolverConfig(**keys)
    spec = cfg.make_spec()  # raises ConfigurationError on bad exponents
    cfg.validate()
    return cfg, spec


def _ground_checks(summary, res, cfg):
    tol = cfg.tol_pohozaev * max(1.0, res.psi)
    summary.check("pohozaev_residual", abs(res.pohozaev_residual), tol, abs(res.pohozaev_residual) <= tol)
    summary.check("sup_gradient", res.sup_gradient, 1.0, res.sup_gradient < 1.0, "<")
    summary.check("energy_positive", res.energy, 0.0, res.energy > 0, ">")
    gap = res.diagnostics["energy_identity_gap"]
    summary.check("energy_identity_gap", gap, 1e-6, gap <= 1e-6)
    summary.check("constant_sign", res.sign, "positive|negative", res.sign in ("positive", "negative"), "in")
    summary.check("radially_nonincreasing", res.monotone, True, res.monotone, "==")
    summary.check("converged", res.termination, "not max-iterations", res.converged, "==")


def run_solve(opts, out, check_only=False):
    cfg, spec = _solver_config(opts)
    k = opts.get("multi_start", 1)
    if k < 1:
        raise ConfigurationError("multi_start must be >= 1")
    summary = RunSummary("solve", cfg.to_dict() | {"multi_start": k})
    if check_only:
        return summary
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if k == 1:
            res = optimizer.minimize(cfg, spec)
            spread = 0.0
        else:
            rep = optimizer.multi_start(cfg, spec, k)
            res, spread = rep.best, rep.spread
    summary.warnings = sorted({str(w.message) for w in caught})
    summary.headline = {
        "c": res.energy,
        "psi": res.psi,
        "pohozaev_residual": res.pohozaev_residual,
        "sup_gradient": res.sup_gradient,
        "u0": res.diagnostics["u0"],
        "iterations": res.iterations,
        "termination": res.termination,
        "decay_ratio": res.decay_ratio,
        "multi_start_spread": spread,
    }
    _ground_checks(summary, res, cfg)
    if k > 1:
        summary.check("multi_start_spread", spread, 1e-4, spread <= 1e-4)
    radial.write_profile_csv(os.path.join(out, "solve_profile.csv"), res.profile)
    return summary


def run_shoot(opts, out, check_only=False):
    regime = opts.get("regime", nl.POSITIVE_MASS)
    N = opts.get("N", 2)
    try:
        spec = nl.make_spec(regime, N, opts.get("exponent", 4.0))
    except PreconditionError as exc:
        raise ConfigurationError(str(exc)) from None
    R = opts.get("R") or optimizer.AUTO_R[regime]
    n = opts.get("n", 4001)
    s_lo, s_hi = opts.get("s_lo", 0.5), opts.get("s_hi", 5.0)
    if not (s_lo > 0 and s_hi > 0):
        raise ConfigurationError("s_lo and s_hi must be positive")
    grid = radial.RadialGrid(N, R, n)
    conf = {"regime": regime, "N": N, "exponent": opts.get("exponent", 4.0), "R": R, "n": n,
            "s_lo": s_lo, "s_hi": s_hi, "tol_s": opts.get("tol_s", 1e-13), "step": opts.get("step", R / 1e5)}
    summary = RunSummary("shoot", conf)
    if check_only:
        return summary
    shot = shooting.find_ground(spec, grid, s_lo, s_hi, conf["tol_s"], conf["step"])
    summary.headline = {
        "s0": shot.s0,
        "energy": shot.energy,
        "psi": shot.psi,
        "pohozaev_residual": shot.pohozaev_residual,
        "r_stop": shot.r_stop,
        "classification": shot.classification,
    }
    tol = 1e-3 * shot.psi
    summary.check("pohozaev_residual", abs(shot.pohozaev_residual), tol, abs(shot.pohozaev_residual) <= tol)
    summary.check("energy_positive", shot.energy, 0.0, shot.energy > 0, ">")
    summary.check("positive_profile", float(shot.profile.values[:-1].min()), 0.0,
                  shot.profile.values[:-1].min() > 0, ">")
    radial.write_profile_csv(os.path.join(out, "shoot_profile.csv"), shot.profile)
    return summary


def run_audit_sobolev(opts, out, check_only=False, seed=None):
    N, p = opts.get("N", 3), opts.get("exponent", 8.0)
    c0 = opts.get("c0")
    src = opts.get("summary")
    if src is not None:
        try:
            with open(src, encoding="utf-8") as fh:
                prior = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read prior summary {src!r}: {exc}") from None
        if prior.get("subcommand") != "solve":
            raise ConfigurationError(f"{src!r} is not a solve summary")
        c0 = prior["headline"]["c"]
        N = prior["config"]["N"]
        p = prior["config"]["exponent"]
        if prior["config"]["regime"] != nl.ZERO_MASS:
            raise ConfigurationError("the Sobolev audit needs a zero-mass solve summary")
    if c0 is None:
        raise ConfigurationError("audit-sobolev needs c0 or summary")
    try:
        spec = nl.make_power_zero_mass(N, p)
        C = sobolev.best_constant(N, p, c0)
    except PreconditionError as exc:
        raise ConfigurationError(str(exc)) from None
    inflate = opts.get("inflate", 1.0)
    count = opts.get("count", 100)
    if count < 0:
        raise ConfigurationError("count must be >= 0")
    seed = opts.get("seed", 0) if seed is None else seed
    conf = {"N": N, "exponent": p, "c0": c0, "count": count, "seed": seed, "inflate": inflate,
            "R": opts.get("R", 20.0), "n": opts.get("n", 1001), "profile": opts.get("profile")}
    summary = RunSummary("audit-sobolev", conf)
    if check_only:
        return summary
    profiles = []
    if opts.get("profile"):
        profiles.append(radial.read_profile_csv(opts["profile"], N))
    grid = radial.RadialGrid(N, conf["R"], conf["n"])
    audit = sobolev.batch_audit(seed, count, spec, C * inflate, c0=c0, grid=grid, profiles=profiles)
    summary.headline = {"constant": C, "tested_constant": C * inflate, "min_ratio": audit.min_ratio,
                        "trial_count": len(audit.trials), "violations": audit.violations}
    if profiles:
        gs = audit.trials[0][0]
        rel = abs(gs - C) / C
        summary.headline["ground_state_ratio"] = gs
        summary.check("ground_state_ratio_rel_error", rel, 5e-3, rel <= 5e-3)
    summary.check("violations", len(audit.violations), 0, not audit.violations, "==")
    with open(os.path.join(out, "audit_sobolev.json"), "w", encoding="utf-8") as fh:
        json.dump(_clean(audit.to_dict()), fh, indent=2)
        fh.write("\n")
    return summary


def run_nonradial(opts, cfgfile, out, check_only=False):
    keys = {k: v for k, v in opts.items() if k in nonradial.TauConfig.__dataclass_fields__}
    if "regime" not in keys:
        keys["regime"] = nl.ZERO_MASS
    tcfg = nonradial.TauConfig(**keys)
    if "N" in opts and opts["N"] != tcfg.N:
        raise ConfigurationError(
            f"N = {opts['N']} does not equal k1 + k2 = {tcfg.N}", line=_line_of(cfgfile, "nonradial", "N")
        )
    doubling = opts.get("doubling", True)
    if doubling and tcfg.k1 != tcfg.k2:
        raise ConfigurationError(
            "the energy doubling check is only defined when k1 = k2; set doubling = false",
            line=_line_of(cfgfile, "nonradial", "doubling") or _line_of(cfgfile, "nonradial", "k2"),
        )
    spec = tcfg.make_spec()
    tcfg.validate()
    coarse_n = opts.get("coarse_n", (tcfg.n + 1) // 2)
    radial_n = opts.get("radial_n", 4001)
    radial_R = opts.get("radial_R")
    conf = tcfg.to_dict() | {"doubling": doubling, "coarse_n": coarse_n, "radial_n": radial_n,
                             "radial_R": radial_R if radial_R else optimizer.AUTO_R[tcfg.regime]}
    summary = RunSummary("nonradial", conf)
    if check_only:
        return summary
    res = nonradial.minimize_tau(tcfg, spec)
    summary.headline = {"tau_energy": res.energy, "pohozaev_residual": res.pohozaev_residual,
                        "sup_gradient": res.sup_gradient, "max": res.max_value, "min": res.min_value,
                        "diagonal_max": res.diagonal_max, "iterations": res.iterations,
                        "termination": res.termination}
    tol = tcfg.tol_pohozaev * max(1.0, res.psi)
    summary.check("pohozaev_residual", abs(res.pohozaev_residual), tol, abs(res.pohozaev_residual) <= tol)
    summary.check("sup_gradient", res.sup_gradient, 1.0, res.sup_gradient < 1.0, "<")
    summary.check("sign_changing", res.sign, "sign-changing", res.sign == "sign-changing", "==")
    summary.check("diagonal_max", res.diagonal_max, 1e-12, res.diagonal_max <= 1e-12)
    if doubling:
        coarse = nonradial.minimize_tau(nonradial.TauConfig(**{**tcfg.to_dict(), "n": coarse_n}), spec)
        rcfg = dict(regime=tcfg.regime, N=tcfg.N, exponent=tcfg.exponent, R=radial_R, seed=tcfg.seed)
        fine_r = optimizer.minimize(optimizer.SolverConfig(**rcfg, n=radial_n), warn=False)
        coarse_r = optimizer.minimize(optimizer.SolverConfig(**rcfg, n=(radial_n + 1) // 2), warn=False)
        rep = nonradial.doubling_check(res.energy, coarse.energy, fine_r.energy, coarse_r.energy)
        summary.headline["doubling"] = rep.to_dict()
        summary.check("doubling_margin", rep.margin, rep.tau_error + 2 * rep.radial_error, rep.passed, ">")
    nonradial.write_block_csv(os.path.join(out, "nonradial_profile.csv"), res.profile)
    return summary


def run_pointcharge(opts, out, check_only=False):
    b = opts.get("b", 1.0)
    R_max = opts.get("R_max", 40.0)
    tol = opts.get("tol", 1e-12)
    if not b > 0:
        raise ConfigurationError(f"b must be positive, got {b!r}")
    if not (R_max > 0 and tol > 0):
        raise ConfigurationError("R_max and tol must be positive")
    summary = RunSummary("pointcharge", {"b": b, "R_max": R_max, "tol": tol})
    if check_only:
        return summary
    table = pointcharge.convergence_table(b, (R_max / 4, R_max / 2, R_max), tol)
    E = table[-1][1]
    rel = abs(table[-1][1] - table[-2][1]) / abs(E)
    summary.headline = {"energy": E, "table": [{"R_max": R, "energy": e, "energy_no_tail": e0} for R, e, e0 in table]}
    summary.check("doubling_stability", rel, 1e-6, rel <= 1e-6)
    for bb in (0.5, 2.0):
        ratio = pointcharge.energy(bb, R_max, tol) / pointcharge.energy(1.0, R_max, tol)
        err = abs(ratio / bb**1.5 - 1.0)
        summary.check(f"scaling_b={bb:g}", err, 1e-6, err <= 1e-6)
    return summary


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="bornground", description="Born-Infeld ground states")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="path to key = value config file")
    ap.add_argument("--out", default="./out", help="output directory (default ./out)")
    ap.add_argument("--seed", type=_uint64, default=None, help="override the config seed")
    ap.add_argument("--check-only", action="store_true", help="validate the config and exit")
    return ap


def _dispatch(sub, cfgfile, out, check_only, seed):
    opts = typed_section(cfgfile, sub)
    if seed is not None and sub != "pointcharge":
        opts["seed"] = seed
    if sub == "solve":
        return run_solve(opts, out, check_only)
    if sub == "shoot":
        return run_shoot(opts, out, check_only)
    if sub == "audit-sobolev":
        return run_audit_sobolev(opts, out, check_only)
    if sub == "nonradial":
        return run_nonradial(opts, cfgfile, out, check_only)
    return run_pointcharge(opts, out, check_only)


def main(argv=None):
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfgfile = read_config(args.config)
        if args.subcommand == "check-only":
            present = [s for s in SUBCOMMANDS[:-1] if s in cfgfile.sections]
            if cfgfile.sections[""] and "solve" not in present or not present:
                present.insert(0, "solve")
            for sub in present:
                _dispatch(sub, cfgfile, args.out, True, args.seed)
            print(f"config OK ({', '.join(present)})")
            return EXIT_OK
        if not args.check_only:
            os.makedirs(args.out, exist_ok=True)
        summary = _dispatch(args.subcommand, cfgfile, args.out, args.check_only, args.seed)
    except (ConfigurationError, PreconditionError, DomainError) as exc:
        print(f"{args.config}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BornInfeldError, ArithmeticError) as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.check_only:
        print("config OK")
        return EXIT_OK
    summary.wall_time_s = time.perf_counter() - t0
    name = args.subcommand.replace("-", "_")
    summary.write(os.path.join(args.out, f"{name}_summary.json"))
    for c in summary.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']} {c['relation']} {c['tolerance']}")
    return EXIT_OK if summary.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
