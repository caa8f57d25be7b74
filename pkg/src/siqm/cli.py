"""Command-line front end.

Exit codes: 0 pass, 1 check failure, 2 usage error, 3 physics-domain error
(non-normalizable state, pole on the grid, unbound level, inadmissible
parameters).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import catalog as cat
from . import hbarseries as hs
from . import oracle
from . import symexpr as sx
from .grid import Grid, PoleError
from .partner import (BoundStateError, GridDomainError, NotNormalizableError,
                      excited_states, partner_potentials, superpotential_on)
from .sicheck import SCHEMA_VERSION, analytic_spectrum, si_residual

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PHYSICS = 0, 1, 2, 3

GRID_ENV = "SIQM_DEFAULT_GRID"
DEFAULT_N = 4001
# (xmin, xmax) per entry; the Morse family box keeps bound states well inside
DEFAULT_RANGE = {
    "harmonic": (-10.0, 10.0),
    "coulomb": (0.01, 80.0),
    "oscillator3d": (0.01, 10.0),
    "morse": (-8.0, 12.0),
    "extended-morse": (-8.0, 12.0),
    "rosen-morse-1": (0.001, math.pi - 0.001),
    "rosen-morse-2": (-12.0, 12.0),
    "eckart": (0.01, 20.0),
    "scarf-1": (-math.pi / 2 + 0.001, math.pi / 2 - 0.001),
    "scarf-2": (-12.0, 12.0),
    "gen-poschl-teller": (0.01, 20.0),
}
# eigenfunctions near the threshold decay slowly; give them room
WAVEFUNCTION_RANGE = {"morse": (-25.0, 25.0), "extended-morse": (-25.0, 25.0)}
WAVEFUNCTION_N = 50001
SERIES_SAMPLES = 100
SERIES_TOL = 1e-9


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    entry: str
    params: dict = field(default_factory=dict)
    a: float | None = None
    hbar: float = 1.0
    grid: Grid | None = None
    levels: int = 3
    fmt: str = "csv"
    out: str | None = None
    tol: float | None = None

    def __post_init__(self):
        if self.levels < 1:
            raise UsageError("levels must be >= 1")
        if self.grid is not None and self.grid.n < 50:
            raise UsageError("grid needs at least 50 points")


# ---------------------------------------------------------------------------
# config assembly


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def _parse_grid(text):
    try:
        xmin, xmax, n = (s.strip() for s in text.split(","))
        return Grid(float(xmin), float(xmax), int(n))
    except ValueError as err:
        raise UsageError(f"bad grid {text!r}: expected 'xmin,xmax,n' ({err})") from None


def _grid_from_json(obj):
    if isinstance(obj, str):
        return _parse_grid(obj)
    try:
        return Grid(float(obj["xmin"]), float(obj["xmax"]), int(obj["n"]))
    except (KeyError, TypeError, ValueError) as err:
        raise UsageError(f"bad grid in config: {err}") from None


def build_config(args, wide=False) -> RunConfig:
    try:
        params = sx.parse_binding(args.param or [])
    except ValueError as err:
        raise UsageError(str(err)) from None
    values = {"entry": args.entry, "a": args.a, "hbar": args.hbar,
              "grid": _parse_grid(args.grid) if args.grid else None,
              "levels": getattr(args, "levels", None), "tol": getattr(args, "tol", None)}
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise UsageError(f"cannot read config {args.config}: {err}") from None
        for name, v in (file_cfg.get("params") or {}).items():
            if name in params and params[name] != float(v):
                _warn(f"config file overrides --param {name}={params[name]:g} with {float(v):g}")
            params[name] = float(v)
        for key in ("entry", "a", "hbar", "levels", "tol", "grid"):
            if key not in file_cfg:
                continue
            v = _grid_from_json(file_cfg[key]) if key == "grid" else file_cfg[key]
            if values[key] is not None and values[key] != v:
                _warn(f"config file overrides {key}={values[key]} with {v}")
            values[key] = v
    if values["entry"] is None:
        raise UsageError("no entry given (use --entry or a config file)")
    # a and hbar may also arrive as ordinary parameters
    for key in ("a", "hbar"):
        if key in params:
            v = params.pop(key)
            if values[key] is None:
                values[key] = v
    grid = values["grid"] or _default_grid(values["entry"], wide)
    return RunConfig(
        entry=values["entry"], params=params, a=values["a"],
        hbar=1.0 if values["hbar"] is None else float(values["hbar"]),
        grid=grid, levels=int(values["levels"] or 3),
        out=getattr(args, "out", None), tol=values["tol"],
    )


def _default_grid(name, wide):
    env = os.environ.get(GRID_ENV)
    if env:
        return _parse_grid(env)
    if wide and name in WAVEFUNCTION_RANGE:
        return Grid(*WAVEFUNCTION_RANGE[name], WAVEFUNCTION_N)
    xmin, xmax = DEFAULT_RANGE.get(name, (-10.0, 10.0))
    return Grid(xmin, xmax, DEFAULT_N)


def _entry(cfg: RunConfig, w_expr=None, g_expr=None):
    params = dict(cfg.params)
    if cfg.entry == "extended-morse":
        params.setdefault("hbar", cfg.hbar)
    entry = cat.get_entry(cfg.entry, params)
    if w_expr or g_expr:
        entry = cat.custom_entry(
            f"{entry.name} (modified)",
            w_expr or entry.W, g_expr or entry.g,
            aux=entry.aux, domain=entry.domain, hbar_dependent=entry.hbar_dependent,
            default_a=entry.default_a,
        )
    return entry


def _a(cfg, entry):
    return entry.default_a if cfg.a is None else float(cfg.a)


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    return format(float(v), ".17g")


def write_csv(path, header, columns):
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    _emit(path, "\n".join(lines) + "\n")


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def write_json(path, obj):
    _emit(path, json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_catalog(args):
    if args.action == "list":
        write_json(args.out, {"schema_version": SCHEMA_VERSION, "entries": cat.catalog_document()})
        return EXIT_OK
    if args.all:
        names = cat.CONVENTIONAL
    elif args.name:
        if args.name not in cat.NAMES:
            raise UsageError(f"unknown catalog entry {args.name!r}")
        names = (args.name,)
    else:
        raise UsageError("catalog validate needs --name or --all")
    rng = np.random.default_rng(args.seed)
    reports = []
    for name in names:
        entry = cat.get_entry(name)
        if entry.hbar_dependent:
            reports.append({"name": name, "skipped": "hbar-dependent; use check --series",
                            "passed": True})
            continue
        reports.append(cat.validate_conventional(entry, entry.sample_points(rng, args.samples)).to_json())
    ok = all(r["passed"] for r in reports)
    write_json(args.out, {"schema_version": SCHEMA_VERSION, "kind": "catalog_validate",
                          "reports": reports, "passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_potential(args):
    cfg = build_config(args)
    entry = _entry(cfg)
    a = _a(cfg, entry)
    w = superpotential_on(entry, a, cfg.hbar, cfg.grid)
    vm, vp = partner_potentials(entry, a, cfg.hbar, cfg.grid)
    write_csv(cfg.out, ["x", "W", "V_minus", "V_plus"], [cfg.grid.x, w.values, vm.values, vp.values])
    return EXIT_OK


def cmd_wavefunctions(args):
    cfg = build_config(args, wide=True)
    entry = _entry(cfg)
    a = _a(cfg, entry)
    states = excited_states(entry, a, cfg.hbar, cfg.levels - 1, cfg.grid)
    header = ["x"] + [f"psi_{n}" for n in range(cfg.levels)]
    write_csv(cfg.out, header, [cfg.grid.x] + [s.values for s in states.states])
    return EXIT_OK


def cmd_spectrum(args):
    cfg = build_config(args)
    entry = _entry(cfg)
    a = _a(cfg, entry)
    report = analytic_spectrum(entry, a, cfg.hbar, cfg.levels - 1)
    if report.bound_count < len(report.energies):
        dropped = report.energies[report.bound_count:]
        report.warnings.append(
            f"requested {cfg.levels} levels, {report.bound_count} bound; "
            f"dropped {', '.join(f'{e:g}' for e in dropped)} "
            f"(threshold {report.threshold:g})"
        )
        report.energies = report.energies[: report.bound_count]
    if args.oracle:
        vm, _ = partner_potentials(entry, a, cfg.hbar, cfg.grid)
        k = max(1, report.bound_count)
        numeric = oracle.solve(vm, cfg.hbar, k)
        report = oracle.compare_spectra(report, numeric, 1e-3 if cfg.tol is None else cfg.tol)
    out = report.to_json()
    out["grid"] = {"xmin": cfg.grid.xmin, "xmax": cfg.grid.xmax, "n": cfg.grid.n}
    write_json(cfg.out, out)
    return EXIT_FAIL if report.passed is False else EXIT_OK


def cmd_check(args):
    cfg = build_config(args)
    entry = _entry(cfg, args.w_expr, args.g_expr)
    a = _a(cfg, entry)
    if args.si:
        report = si_residual(entry, a, cfg.hbar, cfg.grid, tol=cfg.tol or 1e-10)
        write_json(cfg.out, report.to_json())
        return EXIT_OK if report.passed else EXIT_FAIL

    tol = cfg.tol or SERIES_TOL
    rng = np.random.default_rng(args.seed)
    out = {"schema_version": SCHEMA_VERSION, "kind": "series_check", "entry": entry.name,
           "tol": tol}
    if cfg.entry == "extended-morse" and not (args.w_expr or args.g_expr):
        P, Q, alpha = entry.aux["P"], entry.aux["Q"], entry.aux["alpha"]
        terms = hs.exact_terms(args.orders, P, Q, alpha)
        g = sx.substitute(entry.g, {"alpha": alpha})
        xs = rng.uniform(-0.5, 5.0, SERIES_SAMPLES)
        avals = rng.uniform(alpha - 5.0, alpha - 0.5, SERIES_SAMPLES)
        orders = range(1, args.orders + 1)
    else:
        # conventional kernels: the order-1 equation is the only one available
        fixed = {**entry.aux, "hbar": cfg.hbar}
        terms = [sx.substitute(entry.W, fixed)]
        g = sx.substitute(entry.g, fixed)
        pts = entry.sample_points(rng, SERIES_SAMPLES)
        xs, avals = (np.array(v) for v in zip(*pts))
        orders = range(1, 2)
        out["note"] = "only the order-1 equation (W0 = W) applies to entries without hbar terms"
    samples = list(zip(xs.tolist(), avals.tolist()))
    rows = []
    for j in orders:
        r = hs.pde_residual(j, terms, samples, g=g)
        rows.append({"order": j, "max_residual": r, "passed": r < tol})
    out["orders"] = rows
    out["passed"] = all(r["passed"] for r in rows)
    write_json(cfg.out, out)
    return EXIT_OK if out["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def _common(p, levels=False, tol=False):
    p.add_argument("--entry", help="catalog entry name")
    p.add_argument("--param", action="append", metavar="NAME=VALUE",
                   help="auxiliary parameter (repeatable); a= and hbar= are accepted too")
    p.add_argument("--config", help="JSON run config; its values win over flags")
    p.add_argument("--a", type=float, help="additive parameter a")
    p.add_argument("--hbar", type=float, help="hbar (default 1)")
    p.add_argument("--grid", help=f"xmin,xmax,n (default per entry or ${GRID_ENV})")
    p.add_argument("--out", "-o", help="output path (default stdout)")
    if levels:
        p.add_argument("--levels", type=int, help="number of levels (default 3)")
    if tol:
        p.add_argument("--tol", type=float, help="tolerance override")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="siqm",
        description="Shape-invariant superpotentials: partner potentials, spectra, checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list or validate catalog entries")
    p.add_argument("action", choices=["list", "validate"])
    p.add_argument("--name")
    p.add_argument("--all", action="store_true")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("potential", help="CSV of x, W, V_minus, V_plus")
    _common(p)
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("wavefunctions", help="CSV of ladder-built bound states")
    _common(p, levels=True)
    p.set_defaults(func=cmd_wavefunctions)

    p = sub.add_parser("spectrum", help="JSON analytic spectrum, optionally checked by the oracle")
    _common(p, levels=True, tol=True)
    p.add_argument("--oracle", action="store_true", help="compare with the finite-difference solver")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("check", help="shape-invariance or series residual report")
    _common(p, tol=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--si", action="store_true", help="shape-invariance residual on the grid")
    mode.add_argument("--series", action="store_true", help="order-by-order hbar equations")
    p.add_argument("--orders", type=int, default=8, help="highest order j for --series")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--w-expr", help="replace W by this expression")
    p.add_argument("--g-expr", help="replace g(a) by this expression")
    p.set_defaults(func=cmd_check)
    return parser


def _join_grid(argv):
    # "--grid -8,12,4001" would otherwise read the value as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--grid":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--grid={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_grid(sys.argv[1:] if argv is None else argv))
    try:
        return args.func(args)
    except (UsageError, cat.CatalogError, sx.ExpressionSyntaxError, sx.UnboundParameterError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (NotNormalizableError, BoundStateError, PoleError, GridDomainError,
            cat.ConstraintError, sx.DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PHYSICS
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
