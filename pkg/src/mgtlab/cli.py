"""Command-line front end: ``mgtlab <command> [--config FILE] [flags]``.

Parameters come from a flat TOML file and are overridden by flags. Every
report echoes the fully resolved configuration, defaults included. Exit
codes: 0 when all checks pass, 1 when a rate or accuracy check fails, and
2 for configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np
import tomli

from . import conservative as cons
from . import dissipative as diss
from .errors import (ConfigError, DegenerateConfigurationError, DomainError, FitError, IntegrationFailure,
                     ResolutionError, UsageError)
from .kernels import oracle_deviation
from .lab import GridPolicy
from .radial import _atomic_write
from .roots import (ExpansionOrder, MgtParams, Zone, expansion_order_check, large_freq_expansion,
                    small_freq_expansion, solve_characteristic)

__all__ = ["main", "build_parser", "ExperimentConfig", "load_config"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

_KEYS = {
    "tau", "delta", "n", "p", "q", "s", "refined", "equation", "zone", "region", "vertex",
    "t_min", "t_max", "levels", "data_width", "order", "freq_margin", "space_oversample",
    "tolerance", "workers", "out_dir", "name", "rho_min", "rho_max", "points", "terms",
    "ell", "rho", "t_points", "beta", "c1", "c2", "oscillation", "g0", "sided",
}


class ExperimentConfig:
    """Merged file and flag values, with typed getters that record what was used."""

    def __init__(self, command: str, values: dict):
        unknown = sorted(set(values) - _KEYS)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        self.command = command
        self.values = dict(values)
        self.echo = {"command": command}

    def _raw(self, key, default, required):
        if key in self.values and self.values[key] is not None:
            return self.values[key]
        if required:
            raise ConfigError(f"missing required parameter '{key}'")
        return default

    def number(self, key, default=None, required=False, integer=False):
        v = self._raw(key, default, required)
        if v is None:
            self.echo[key] = None
            return None
        try:
            x = float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"'{key}' must be a number, got {v!r}") from None
        if integer:
            if not (math.isfinite(x) and x == int(x)):
                raise ConfigError(f"'{key}' must be an integer, got {v!r}")
            x = int(x)
        self.echo[key] = x
        return x

    def numbers(self, key, default=None, required=False, integer=False):
        v = self._raw(key, default, required)
        items = v if isinstance(v, (list, tuple)) else [v]
        if not items:
            raise ConfigError(f"'{key}' must be a non-empty list")
        out = []
        for item in items:
            self.values[key] = item
            out.append(self.number(key, integer=integer))
        self.values[key] = v
        self.echo[key] = out
        return out

    def choice(self, key, options, default):
        v = str(self._raw(key, default, False)).lower()
        if v not in options:
            raise ConfigError(f"'{key}' must be one of {', '.join(options)}, got {v!r}")
        self.echo[key] = v
        return v

    def flag(self, key, default=False):
        v = self._raw(key, default, False)
        if isinstance(v, str):
            v = v.lower() in ("1", "true", "yes", "on")
        self.echo[key] = bool(v)
        return bool(v)

    def text(self, key, default):
        v = str(self._raw(key, default, False))
        self.echo[key] = v
        return v

    # composite settings

    def params(self, need_delta=True) -> MgtParams:
        tau = self.number("tau", required=True)
        delta = self.number("delta", required=need_delta, default=0.0)
        try:
            return MgtParams(tau, delta)
        except (DomainError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def times(self) -> np.ndarray:
        lo = self.number("t_min", 16.0)
        hi = self.number("t_max", 1024.0)
        k = self.number("levels", 7, integer=True)
        if not (0 < lo < hi) or k < 2:
            raise ConfigError("time window needs 0 < t_min < t_max and levels >= 2")
        return np.geomspace(lo, hi, k)

    def policy(self) -> GridPolicy:
        base = GridPolicy()
        pol = GridPolicy(order=self.number("order", base.order, integer=True),
                         freq_margin=self.number("freq_margin", base.freq_margin),
                         space_oversample=self.number("space_oversample", base.space_oversample))
        if pol.order < 2 or pol.freq_margin < 1 or pol.space_oversample < 1:
            raise ConfigError("grid controls need order >= 2, freq_margin >= 1, space_oversample >= 1")
        self.echo["grid_policy"] = pol.as_dict()
        return pol

    def workers(self) -> int:
        w = self.number("workers", 1, integer=True)
        if w < 1:
            raise ConfigError("'workers' must be >= 1")
        return w

    def outputs(self, stem):
        out_dir = self.text("out_dir", "mgtlab-out")
        name = self.text("name", stem)
        return os.path.join(out_dir, name + ".json"), os.path.join(out_dir, name + ".csv")


def load_config(path) -> dict:
    """Read a flat TOML file of key/value pairs."""
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config must be flat key/value pairs; found table(s) {', '.join(nested)}")
    return data


def _ensure_dir(path):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)


def _write(path, text):
    _ensure_dir(path)
    _atomic_write(path, text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    x = float(x)
    return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else repr(x))


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=str) + "\n"


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _emit_report(cfg, rep, stem):
    json_path, csv_path = cfg.outputs(stem)
    _ensure_dir(json_path)
    rep.write(json_path, csv_path, config_echo=cfg.echo)
    print(rep.summary())
    for w in rep.warnings:
        print(f"  warning: {w}")
    return EXIT_OK if rep.passed else EXIT_FAIL


# ----------------------------------------------------------------- commands

def cmd_roots(cfg: ExperimentConfig) -> int:
    params = cfg.params()
    lo = cfg.number("rho_min", 1e-3)
    hi = cfg.number("rho_max", 1e3)
    k = cfg.number("points", 61, integer=True)
    terms = cfg.number("terms", 2, integer=True)
    if not (0 <= lo < hi) or k < 2:
        raise ConfigError("rho sweep needs 0 <= rho_min < rho_max and points >= 2")
    rhos = np.geomspace(lo, hi, k) if lo > 0 else np.linspace(lo, hi, k)
    ex = solve_characteristic(params, rhos)
    small = small_freq_expansion(params, rhos, ExpansionOrder(Zone.SMALL, terms))
    pos = rhos > 0
    large = {c: np.full_like(rhos, np.nan) for c in ("lambda1", "muR", "muI")}
    if np.any(pos):
        lt = large_freq_expansion(params, rhos[pos], ExpansionOrder(Zone.LARGE, terms))
        for c in large:
            large[c][pos] = np.asarray(getattr(lt, c))
    comps = ("lambda1", "muR", "muI")
    rows = []
    for i, r in enumerate(rhos):
        row = [r, ex.lambda1[i], ex.muR[i], ex.muI[i], ex.discriminant[i]]
        row += [abs(getattr(ex, c)[i] - getattr(small, c)[i]) for c in comps]
        row += [abs(getattr(ex, c)[i] - large[c][i]) for c in comps]
        rows.append([_fmt(v) for v in row])
    header = ["rho", "lambda1", "muR", "muI", "discriminant"] + \
        [f"small_residual_{c}" for c in comps] + [f"large_residual_{c}" for c in comps]
    slopes = {}
    for zone in (Zone.SMALL, Zone.LARGE):
        slopes[zone.value] = {}
        for c in comps:
            chk = expansion_order_check(params, zone, c, terms)
            slopes[zone.value][c] = {"slope": chk.slope, "saturated": chk.saturated}
    json_path, csv_path = cfg.outputs("roots")
    _write(csv_path, _csv_text(header, rows))
    _write(json_path, _json({"experiment": "roots", "config_echo": cfg.echo, "slopes": slopes,
                             "pass": True, "warnings": []}))
    for zone, d in slopes.items():
        parts = [f"{c}={'saturated' if v['saturated'] else format(v['slope'], '.3f')}" for c, v in d.items()]
        print(f"{zone}-frequency expansion slopes: {', '.join(parts)}")
    return EXIT_OK


def cmd_kernels(cfg: ExperimentConfig) -> int:
    params = cfg.params()
    ells = cfg.numbers("ell", [0, 1, 2], integer=True)
    rhos = cfg.numbers("rho", [0.05, 0.5, 4.0])
    t_max = cfg.number("t_max", 10.0)
    pts = cfg.number("t_points", 201, integer=True)
    tol = cfg.number("tolerance", 1e-6)
    if any(e not in (0, 1, 2) for e in ells):
        raise ConfigError("'ell' entries must be 0, 1 or 2")
    if any(r < 0 for r in rhos) or t_max <= 0 or pts < 2:
        raise ConfigError("kernels need rho >= 0, t_max > 0 and t_points >= 2")
    rows, ok = [], True
    for ell in ells:
        for rho in rhos:
            dev, ic = oracle_deviation(ell, rho, params, t_max, pts)
            good = dev < tol and ic < 1e-8
            ok &= good
            rows.append([str(ell), _fmt(rho), _fmt(dev), _fmt(ic), str(good).lower()])
            print(f"{'PASS' if good else 'FAIL'} K_{ell} rho={rho:g}: deviation {dev:.2e}, initial conditions {ic:.2e}")
    json_path, csv_path = cfg.outputs("kernels")
    _write(csv_path, _csv_text(["ell", "rho", "max_rel_deviation", "ic_error", "pass"], rows))
    worst = max(float(r[2]) for r in rows)
    _write(json_path, _json({"experiment": "kernels", "config_echo": cfg.echo, "predicted": 0.0,
                             "measured": _finite(worst), "tolerance": tol, "pass": bool(ok), "warnings": []}))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_decay(cfg: ExperimentConfig) -> int:
    eq = cfg.choice("equation", ("dissipative", "conservative"), "dissipative")
    if eq == "conservative":
        return cmd_conservative(cfg)
    params = cfg.params()
    if params.delta <= 0:
        raise ConfigError("the dissipative equation needs delta > 0 (use equation = 'conservative')")
    try:
        query = diss.ExponentQuery(cfg.number("n", 3, integer=True), cfg.number("p", required=True),
                                   cfg.number("q", required=True), cfg.number("s", 0.0),
                                   cfg.flag("refined"))
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    zone = cfg.choice("zone", ("small", "full"), "small")
    times = cfg.times()
    width = cfg.number("data_width", 1.0)
    tol = cfg.number("tolerance", diss.TOLERANCE)
    pol, workers = cfg.policy(), cfg.workers()
    cutoff = None
    if zone == "small":
        cutoff, _ = diss.lab_cutoff(params, float(times[0]))
        cfg.echo["cutoff"] = {"eps0": cutoff.eps0, "N0": cutoff.N0}
    rep = diss.run_decay_experiment(params, diss.gaussian_data(width), query, times, zone, cutoff, pol,
                                    tol, workers)
    return _emit_report(cfg, rep, "decay")


def _conservative_point(cfg, n):
    vertex = cfg._raw("vertex", None, False)
    if vertex is not None:
        label = str(vertex).upper()
        cfg.echo["vertex"] = label
        for region in cons.Region:
            try:
                verts = cons.vertices(n, region)
            except DomainError as exc:
                raise ConfigError(str(exc)) from None
            if label in verts:
                a, b = verts[label]
                return cons.ExponentPair(a, b, n)
        raise ConfigError(f"unknown vertex {vertex!r}; expected one of P1..P5")
    p = cfg.number("p", required=True)
    q = cfg.number("q", required=True)
    if p < 1 or q < 1:
        raise ConfigError("p and q must be >= 1")
    return cons.ExponentPair.from_pq(p, q, n)


def cmd_conservative(cfg: ExperimentConfig) -> int:
    tau = cfg.number("tau", required=True)
    if not tau > 0:
        raise ConfigError(f"'tau' must be positive, got {tau}")
    cfg.echo["delta"] = 0.0
    n = cfg.number("n", 3, integer=True)
    region = cfg.choice("region", ("triangle", "trapezoid"), "triangle")
    try:
        point = _conservative_point(cfg, n)
        if not cons.admissible_region(point, region):
            raise ConfigError(f"(1/p, 1/q) = ({point.inv_p}, {point.inv_q}) lies outside the admissible "
                              f"{region} for n={n}")
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    s = cfg.number("s", 0.0)
    times = cfg.times()
    width = cfg.number("data_width", 0.5)
    tol = cfg.number("tolerance", diss.TOLERANCE)
    pol, workers = cfg.policy(), cfg.workers()
    rep = cons.run_conservative_experiment(tau, diss.gaussian_data(width), point, s, times, pol, tol,
                                           region, workers)
    return _emit_report(cfg, rep, "conservative")


def cmd_table(cfg: ExperimentConfig) -> int:
    ns = cfg.numbers("n", required=True, integer=True)
    ps = cfg.numbers("p", required=True)
    qs = cfg.numbers("q", required=True)
    ss = cfg.numbers("s", required=True)
    refined = cfg.flag("refined")
    rows = []
    for n in ns:
        for p in ps:
            for q in qs:
                for s in ss:
                    try:
                        query = diss.ExponentQuery(n, p, q, s, refined)
                        branch = diss.exponent_branch(query)
                        d = diss.predicted_exponent_exact(query)
                        dv, dx = _fmt(float(d)), str(d)
                    except DomainError:
                        branch, dv, dx = "n/a", "n/a", "n/a"
                    try:
                        pt = cons.ExponentPair.from_pq(p, q, n)
                        c = cons.conservative_predicted_exponent_exact(pt)
                        cv, cx = _fmt(float(c)), str(c)
                    except DomainError:
                        cv, cx = "n/a", "n/a"
                    rows.append([str(n), _fmt(p), _fmt(q), _fmt(s), branch, dv, dx, cv, cx])
    header = ["n", "p", "q", "s", "branch", "dissipative", "dissipative_exact", "conservative",
              "conservative_exact"]
    text = _csv_text(header, rows)
    _, csv_path = cfg.outputs("table")
    _write(csv_path, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_lemmas(cfg: ExperimentConfig) -> int:
    osc = cfg.choice("oscillation", ("sinc", "sincos", "exp"), "sinc")
    try:
        query = diss.LemmaQuery(cfg.number("n", 3, integer=True), cfg.number("beta", 0.0),
                                cfg.number("c1", 0.5), cfg.number("c2", 1.0 if osc != "exp" else 0.0),
                                diss.Oscillation(osc), cfg.choice("g0", ("sin", "cos"), "cos"))
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    sided = cfg.choice("sided", ("upper", "two-sided"), "upper")
    times = None
    if any(k in cfg.values for k in ("t_min", "t_max", "levels")):
        times = cfg.times()
    tol = cfg.number("tolerance", diss.TOLERANCE)
    pol, workers = cfg.policy(), cfg.workers()
    rep = diss.lemma_l1_check(query, times, None, pol, sided, tol, workers)
    cfg.echo["eps0"] = rep.metadata.get("eps0")
    return _emit_report(cfg, rep, "lemmas")


COMMANDS = {
    "roots": cmd_roots,
    "kernels": cmd_kernels,
    "decay": cmd_decay,
    "conservative": cmd_conservative,
    "table": cmd_table,
    "lemmas": cmd_lemmas,
}


# ----------------------------------------------------------------- parser

def _add(p, *names, **kw):
    p.add_argument(*names, default=argparse.SUPPRESS, **kw)


def _common(p):
    _add(p, "--config", help="flat TOML file of key/value pairs; flags override it")
    _add(p, "--tau", type=float, help="relaxation time tau > 0")
    _add(p, "--out-dir", dest="out_dir", help="directory for reports (default mgtlab-out)")
    _add(p, "--name", help="file stem for the reports")
    _add(p, "--workers", type=int, help="worker threads for time levels (default 1)")


def _window(p):
    _add(p, "--t-min", dest="t_min", type=float, help="first time (default 16)")
    _add(p, "--t-max", dest="t_max", type=float, help="last time (default 1024)")
    _add(p, "--levels", type=int, help="number of geometrically spaced times (default 7)")
    _add(p, "--order", type=int, help="Gauss-Legendre order per panel")
    _add(p, "--freq-margin", dest="freq_margin", type=float, help="frequency-grid oversampling")
    _add(p, "--space-oversample", dest="space_oversample", type=float, help="physical-grid oversampling")
    _add(p, "--tolerance", type=float, help="slope tolerance (default 0.15)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mgtlab", description="Decay-rate laboratory for the MGT equation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="characteristic roots and expansion residuals over a rho sweep")
    _common(p)
    _add(p, "--delta", type=float, help="diffusivity delta >= 0")
    _add(p, "--rho-min", dest="rho_min", type=float)
    _add(p, "--rho-max", dest="rho_max", type=float)
    _add(p, "--points", type=int)
    _add(p, "--terms", type=int, help="expansion terms (default 2)")

    p = sub.add_parser("kernels", help="closed-form kernels against the ODE oracle")
    _common(p)
    _add(p, "--delta", type=float)
    _add(p, "--ell", type=int, nargs="+")
    _add(p, "--rho", type=float, nargs="+")
    _add(p, "--t-max", dest="t_max", type=float)
    _add(p, "--t-points", dest="t_points", type=int)
    _add(p, "--tolerance", type=float)

    p = sub.add_parser("decay", help="measured decay slope against the theorem")
    _common(p)
    _window(p)
    _add(p, "--equation", choices=("dissipative", "conservative"))
    _add(p, "--delta", type=float)
    _add(p, "--n", type=int)
    _add(p, "--p", type=float)
    _add(p, "--q", type=float)
    _add(p, "--s", type=float)
    _add(p, "--refined", action="store_true", help="subtract the diffusion-wave profile")
    _add(p, "--zone", choices=("small", "full"))
    _add(p, "--region", choices=("triangle", "trapezoid"))
    _add(p, "--vertex", help="conservative point by vertex label (P1..P5)")
    _add(p, "--data-width", dest="data_width", type=float, help="width of the Gaussian data")

    p = sub.add_parser("conservative", help="conservative case (delta = 0) decay slope")
    _common(p)
    _window(p)
    _add(p, "--n", type=int)
    _add(p, "--p", type=float)
    _add(p, "--q", type=float)
    _add(p, "--s", type=float)
    _add(p, "--region", choices=("triangle", "trapezoid"))
    _add(p, "--vertex", help="vertex label P1..P5")
    _add(p, "--data-width", dest="data_width", type=float)

    p = sub.add_parser("table", help="predicted exponents for both equations")
    _common(p)
    _add(p, "--n", type=int, nargs="*")
    _add(p, "--p", type=float, nargs="*")
    _add(p, "--q", type=float, nargs="*")
    _add(p, "--s", type=float, nargs="*")
    _add(p, "--refined", action="store_true")

    p = sub.add_parser("lemmas", help="L^1 growth of the oscillatory lemma multipliers")
    _common(p)
    _window(p)
    _add(p, "--n", type=int)
    _add(p, "--beta", type=float)
    _add(p, "--c1", type=float)
    _add(p, "--c2", type=float)
    _add(p, "--oscillation", choices=("sinc", "sincos", "exp"))
    _add(p, "--g0", choices=("sin", "cos"))
    _add(p, "--sided", choices=("upper", "two-sided"))
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = vars(ap.parse_args(argv))
    command = ns.pop("command")
    path = ns.pop("config", None)
    try:
        values = load_config(path) if path else {}
        values.update(ns)
        cfg = ExperimentConfig(command, values)
        return COMMANDS[command](cfg)
    except (ConfigError, DomainError, UsageError, DegenerateConfigurationError) as exc:
        print(f"mgtlab {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, ResolutionError, IntegrationFailure) as exc:
        print(f"mgtlab {command}: check could not be completed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
