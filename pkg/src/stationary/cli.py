"""Command-line front end: ``stationary {list,check,geodesic,estimate}``.

Exit codes: 0 success, 1 a residual or drift exceeded its tolerance, 2 bad
configuration (unknown entry or key, parameters out of range, point outside
the chart).  A JSON config file may supply any option; command-line flags win.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from . import geometry as geo
from . import oracle
from .catalog import ENTRY_NAMES, entry_parameters, make_entry
from .errors import DomainError, GeometryError, NotStaticError, ParameterError

__all__ = ["main", "build_parser", "run_checks", "TOLERANCES"]

CONFIG_KEYS = {
    "command", "entry", "params", "tol_tier", "seed", "points", "out",
    "kind", "smax", "tol", "circular_r", "radial_r", "x0", "T",
    "center", "center_r", "a", "rays", "per_ray", "monitor",
}

# analytic-partial tier; the pure-FD tier uses max(tol, FD_FLOOR)
TOLERANCES = {
    "oracle_riemann": 1e-5,
    "oracle_ricci": 1e-5,
    "oracle_hat_ricci": 1e-5,
    "oracle_connection": 1e-6,
    "trace_consistency": 1e-8,
    "riemann_symmetry": 1e-8,
    "connection_compat": 1e-8,
    "vacuum": 1e-6,
    "einstein": 1e-6,
    "static": 1e-10,
    "flat": 1e-8,
    "conformal_ricci": 1e-5,
    "laplacian_relation": 1e-7,
    "static_system": 1e-6,
    "static_bochner": 1e-3,
    "twist_norm": 1e-8,
    "twist_divergence": 1e-6,
    "twist_closed": 1e-5,
    "tension": 1e-4,
    "bochner": 1e-3,
}
FD_FLOOR = 1e-3


class ConfigError(Exception):
    pass


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


def _frame_blocks(S, p):
    X = np.concatenate([[0.0], p])
    m = oracle.assembled_metric(S)
    R_or = oracle.frame_transform(oracle.coordinate_riemann(m, X), S, p)
    eta_inv = np.linalg.inv(geo.frame_metric(S, p))
    return R_or, np.einsum("ac,abcd->bd", eta_inv, R_or)


def _point_residuals(entry, p):
    """Residuals of every applicable identity at one point."""
    from . import reduction4d as red
    from .estimates import static_bochner_terms

    S, fl = entry.spacetime, entry.flags
    d = geo.local_data(S, p)
    blocks = geo.curvature_blocks(S, p, d)
    R = blocks.full()
    ric = geo.ricci_blocks(S, p, d).full()
    R_or, ric_or = _frame_blocks(S, p)
    X = np.concatenate([[0.0], p])
    hat_or = oracle.frame_transform(
        oracle.coordinate_ricci(oracle.assembled_metric(geo.hat_metric(S)), X), S, p)
    out = {
        "oracle_riemann": _rel(R, R_or),
        "oracle_ricci": _rel(ric, ric_or),
        "oracle_hat_ricci": _rel(geo.hat_ricci_blocks(S, p, d).full(), hat_or),
        "oracle_connection": _rel(geo.frame_connection(S, p, d),
                                  oracle.oracle_frame_connection(oracle.assembled_metric(S), S, p)),
        "trace_consistency": float(np.max(np.abs(geo.frame_ricci_from_riemann(S, p, blocks) - ric))),
        "riemann_symmetry": float(max(
            np.max(np.abs(R + np.swapaxes(R, 0, 1))),
            np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1)))),
            np.max(np.abs(R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2)))))),
        "connection_compat": max(geo.connection_residuals(S, p, d)),
    }
    if fl.vacuum:
        out["vacuum"] = float(np.max(np.abs(ric)))
    if fl.einstein:
        out["einstein"] = float(np.max(np.abs(ric - entry.lam * geo.frame_metric(S, p))))
    if fl.static:
        out["static"] = float(np.max(np.abs(d.Lambda)))
    if fl.flat:
        out["flat"] = float(np.max(np.abs(R)))
    if S.n >= 3:
        cd = geo.conformal_reduction(S, p, d)
        out["conformal_ricci"] = _rel(cd.ric_til, oracle.coordinate_ricci(oracle.conformal_metric(S), p))
        out["laplacian_relation"] = max(geo.laplacian_relation_residual(S, f, p) for f in _test_fields(S.n))
    if fl.static and fl.einstein:
        out["static_system"] = max(geo.static_system_residual(S, p, entry.lam))
        out["static_bochner"] = static_bochner_terms(S, p).relative
    if S.n == 3:
        ti = red.twist_identities(S, p)
        out["twist_norm"] = ti.norm
        out["twist_divergence"] = ti.divergence
        if fl.einstein:
            out["twist_closed"] = ti.d_omega
            tf = red.tension_field(S, p)
            out["tension"] = tf.residual
            out["bochner"] = red.bochner_terms(S, p).relative
    return out


def _test_fields(n):
    from .fields import Field

    def poly(c):
        c = np.asarray(c, dtype=float)
        return Field(lambda q: float(c @ q + 0.5 * (c @ q) ** 2),
                     lambda q: c * (1 + c @ q),
                     lambda q: np.outer(c, c), (), "poly")

    rng = np.random.default_rng(7)
    return [poly(rng.standard_normal(n) * 0.5) for _ in range(2)]


def run_checks(entry, tier="analytic", points=None, count=4, seed=0):
    """Residual maxima over ``points`` (anchors plus ``count`` seeded samples)."""
    if tier not in ("analytic", "fd"):
        raise ConfigError(f"unknown tolerance tier {tier!r}")
    e = entry if tier == "analytic" else entry.fd_variant()
    if points is None:
        points = list(entry.anchors) + entry.sample_points(count, seed)
    maxima = {}
    for p in points:
        for k, v in _point_residuals(e, np.asarray(p, dtype=float)).items():
            maxima[k] = max(maxima.get(k, 0.0), float(v))
    results = {}
    for k, v in maxima.items():
        tol = TOLERANCES[k] if tier == "analytic" else max(TOLERANCES[k], FD_FLOOR)
        results[k] = {"max": v, "tol": tol, "ok": bool(v <= tol)}
    return results, points


# ---------------------------------------------------------------- argparse

def _add_common(sp, spin_flag="--a"):
    sp.add_argument("entry_pos", nargs="?", metavar="ENTRY", help="catalog entry name")
    sp.add_argument("--entry", dest="entry")
    sp.add_argument("--config", help="JSON run configuration")
    sp.add_argument("--M", type=float)
    sp.add_argument(spin_flag, dest="spin", type=float, help="Kerr spin parameter")
    sp.add_argument("--omega", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol-tier", dest="tol_tier", choices=("analytic", "fd"))
    sp.add_argument("--out")


def build_parser():
    ap = argparse.ArgumentParser(prog="stationary", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list catalog entries")

    c = sub.add_parser("check", help="run residual suites on an entry")
    _add_common(c)
    c.add_argument("--points", type=int, help="number of seeded sample points besides anchors")

    g = sub.add_parser("geodesic", help="integrate a geodesic and write a CSV trajectory")
    _add_common(g)
    g.add_argument("--kind", choices=("lorentzian", "hat"))
    g.add_argument("--smax", type=float)
    g.add_argument("--tol", type=float)
    g.add_argument("--circular-r", dest="circular_r", type=float)
    g.add_argument("--radial-r", dest="radial_r", type=float)
    g.add_argument("--x0", type=float, nargs="+")
    g.add_argument("--T", type=float, nargs="+", help="frame components T^0..T^n")

    e = sub.add_parser("estimate", help="evaluate estimate monitors on a ball")
    _add_common(e, spin_flag="--spin")
    e.add_argument("--a", dest="a", type=float, help="ball radius")
    e.add_argument("--center", type=float, nargs="+")
    e.add_argument("--center-r", dest="center_r", type=float)
    e.add_argument("--rays", type=int)
    e.add_argument("--per-ray", dest="per_ray", type=int)
    e.add_argument("--monitor", choices=("gradient", "curvature", "all"))
    return ap


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def _merge(args):
    cfg = _load_config(getattr(args, "config", None))
    if cfg.get("command", args.command) != args.command:
        raise ConfigError(f"config is for {cfg['command']!r}, not {args.command!r}")
    params = dict(cfg.get("params", {}))
    for flag, key in (("M", "M"), ("spin", "a"), ("omega", "omega"), ("lam", "lam"), ("kappa", "kappa")):
        v = getattr(args, flag, None)
        if v is not None:
            params[key] = v
    run = dict(cfg)
    run["params"] = params
    for k in CONFIG_KEYS - {"params", "command"}:
        v = getattr(args, k, None)
        if v is not None:
            run[k] = v
    if args.entry_pos is not None:
        if args.entry is not None and args.entry != args.entry_pos:
            raise ConfigError("positional entry and --entry disagree")
        run["entry"] = args.entry_pos
    if not run.get("entry"):
        raise ConfigError("no entry given")
    return run


def _make(run):
    name = run["entry"]
    if name not in ENTRY_NAMES:
        raise ConfigError(f"unknown entry {name!r}")
    allowed = entry_parameters(name)
    bad = [k for k in run["params"] if k not in allowed]
    if bad:
        raise ConfigError(f"entry {name!r} does not take {bad}")
    return make_entry(name, **run["params"])


def _emit(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _header(entry, run):
    return {"version": __version__, "entry": entry.describe(), "seed": run.get("seed", 0)}


def cmd_list(_args):
    out = []
    for name in ENTRY_NAMES:
        out.append(make_entry(name).describe())
    _emit(out, None)
    return 0


def cmd_check(args):
    run = _merge(args)
    entry = _make(run)
    tier = run.get("tol_tier", "analytic")
    results, points = run_checks(entry, tier, count=int(run.get("points", 4)), seed=int(run.get("seed", 0)))
    ok = all(r["ok"] for r in results.values())
    rep = _header(entry, run)
    rep.update({"command": "check", "tol_tier": tier, "points": [list(map(float, p)) for p in points],
                "residuals": results, "ok": ok})
    _emit(rep, run.get("out"))
    return 0 if ok else 1


def _geodesic_init(entry, run):
    from .geodesics import GeodesicState, circular_orbit_state

    S = entry.spacetime
    if run.get("circular_r") is not None:
        if entry.name != "schwarzschild":
            raise ConfigError("--circular-r is available for schwarzschild only")
        r = float(run["circular_r"])
        if r <= 3 * entry.params["M"]:
            raise ConfigError("circular timelike orbits need r > 3M")
        return circular_orbit_state(entry.params["M"], r)
    if run.get("radial_r") is not None:
        if entry.spacetime.coords[:2] != ("r", "theta"):
            raise ConfigError("--radial-r needs a spherical-coordinate entry")
        x0 = np.array([float(run["radial_r"]), np.pi / 2, 0.0])
        S.check(x0)
        # released from rest relative to the Killing observers
        return GeodesicState(0.0, x0, np.r_[1.0 / float(S.u(x0)), np.zeros(S.n)])
    if run.get("x0") is None or run.get("T") is None:
        raise ConfigError("give --circular-r, --radial-r, or both --x0 and --T")
    return GeodesicState(0.0, np.array(run["x0"], dtype=float), np.array(run["T"], dtype=float))


def cmd_geodesic(args):
    from .geodesics import integrate_geodesic

    run = _merge(args)
    entry = _make(run)
    init = _geodesic_init(entry, run)
    smax = float(run.get("smax", 100.0))
    tol = float(run.get("tol", 1e-11))
    kind = run.get("kind", "lorentzian")
    tr = integrate_geodesic(entry.spacetime, kind, init, smax, tol)
    out = run.get("out")
    if out:
        tr.to_csv(out)
    drift_tol = max(10 * tol * smax, 1e-12)
    rep = _header(entry, run)
    rep.update({"command": "geodesic", "kind": kind, "exit": tr.exit, "s_exit": tr.s_exit,
                "c": tr.c, "max_c_drift": tr.max_c_drift, "max_norm_drift": tr.max_norm_drift,
                "drift_tol": drift_tol, "steps": tr.steps, "samples": int(tr.s.size),
                "csv": out})
    ok = tr.max_c_drift <= drift_tol and tr.max_norm_drift <= drift_tol
    rep["ok"] = bool(ok)
    _emit(rep, None)
    return 0 if ok else 1


def cmd_estimate(args):
    from . import estimates as est

    run = _merge(args)
    entry = _make(run)
    S = entry.spacetime
    if run.get("center") is not None:
        center = np.array(run["center"], dtype=float)
    elif run.get("center_r") is not None:
        center = np.array(entry.anchors[0], dtype=float)
        center[0] = float(run["center_r"])
        if S.coords[:2] == ("r", "theta"):
            center[1] = np.pi / 2
    else:
        center = np.array(entry.anchors[0], dtype=float)
    a = float(run.get("a", 1.0))
    if not a > 0:
        raise ConfigError("ball radius must be positive")
    monitor = run.get("monitor") or ("gradient" if entry.flags.static else "curvature")
    if monitor == "gradient" and not entry.flags.static:
        raise ConfigError("gradient monitor needs a static entry")
    kw = {"ray_count": int(run.get("rays", 64)), "per_ray": int(run.get("per_ray", 16)),
          "seed": int(run.get("seed", 0))}
    sample = est.sample_ball(S, center, a, **kw)
    reports = []
    if monitor in ("gradient", "all") and entry.flags.static:
        reports.append(est.gradient_estimate_ratio(S, center, a, sample=sample))
    if monitor in ("curvature", "all") and S.n == 3:
        reports.extend(est.curvature_estimate_ratio(S, center, a, sample=sample))
    ok = all(np.isfinite(r.implied_constant) for r in reports)
    rep = _header(entry, run)
    rep.update({"command": "estimate", "reports": [r.to_dict() for r in reports], "ok": bool(ok)})
    _emit(rep, run.get("out"))
    return 0 if ok else 1


COMMANDS = {"list": cmd_list, "check": cmd_check, "geodesic": cmd_geodesic, "estimate": cmd_estimate}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ParameterError, DomainError, NotStaticError) as exc:
        print(f"stationary: error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"stationary: geometry error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
