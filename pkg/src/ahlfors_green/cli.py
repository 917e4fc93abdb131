"""Command line front end: solve, verify, export-field.

A run config is a domain config with optional extra keys::

    {"curves": [...], "nodes_per_curve": 256,
     "a": [0.72, 0], "w": [[0.75, 0]],
     "probe_grid": {"nx": 41, "ny": 41},
     "tolerances": {"green.decomposition": 1e-5}, "n_probes": 25, "out": "run"}

Exit codes: 0 all identities pass, 1 some identity fails, 2 bad config,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import (BoundaryGrid, DomainSpec, GeometryError, contains, discretize,
                       domain_from_dict, inside_mask)
from .green import CalibrationError, SingularityError, default_base_point, green_direct, poisson_field
from .harmonic import DirichletError, harmonic_frame, harmonic_lambda_many
from .paths import QuadratureError, RoutingError
from .szego import SzegoError, ahlfors, solve_szego
from .verify import DEFAULT_TOLERANCES, probe_points, run_suite, summarize

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_M = 128
QUANTITIES = ("green", "omega_j", "lambda_j", "mu_j", "ahlfors_abs", "poisson")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    spec: DomainSpec
    m: int
    a: complex | None = None
    ws: list = field(default_factory=list)
    probe_grid: dict = field(default_factory=lambda: {"nx": 41, "ny": 41})
    tolerances: dict = field(default_factory=dict)
    n_probes: int = 25
    out: Path = Path("out")
    name: str = "domain"
    source: str | None = None

    def __post_init__(self):
        if self.m < 8:
            raise ConfigError("nodes_per_curve must be at least 8")
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {k!r}")
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ConfigError(f"tolerance {k!r} must be a non-negative number")
        for p in ([self.a] if self.a is not None else []) + list(self.ws):
            if not contains(self.spec, p):
                raise GeometryError("point not in domain")

    def grid(self) -> BoundaryGrid:
        if not hasattr(self, "_grid"):
            self._grid = discretize(self.spec, self.m)
        return self._grid

    def base_point(self) -> complex:
        return complex(self.a) if self.a is not None else default_base_point(self.grid())

    def sources(self):
        if self.ws:
            return [complex(w) for w in self.ws]
        return [complex(p) for p in probe_points(self.grid(), avoid=[self.base_point()], count=2)]


def _point(v, what):
    try:
        if isinstance(v, str):
            re_, im = v.split(",")
            return complex(float(re_), float(im))
        if isinstance(v, (int, float)):
            return complex(v)
        re_, im = v
        return complex(float(re_), float(im))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be [re, im] or 're,im', got {v!r}") from exc


def load_run_config(path, m=None, a=None, ws=None, out=None) -> RunConfig:
    """Read a run config; command line values override the file."""
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    spec, m_cfg = domain_from_dict(d)
    pts = ws if ws else d.get("w", [])
    pg = dict(d.get("probe_grid", {}))
    grid_spec = {"nx": int(pg.get("nx", 41)), "ny": int(pg.get("ny", 41))}
    if min(grid_spec.values()) < 2:
        raise ConfigError("probe_grid needs at least 2 points per axis")
    return RunConfig(
        spec=spec,
        m=int(m if m is not None else (m_cfg or DEFAULT_M)),
        a=_point(a if a is not None else d["a"], "a") if (a is not None or "a" in d) else None,
        ws=[_point(w, "w") for w in pts],
        probe_grid=grid_spec,
        tolerances=dict(d.get("tolerances", {})),
        n_probes=int(d.get("n_probes", 25)),
        out=Path(out if out is not None else d.get("out", "out")),
        name=str(d.get("name", Path(path).stem)),
        source=str(path),
    )


# ------------------------------------------------------------------ output

def _dump_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def probe_grid(cfg: RunConfig):
    """Rectangular lattice over the outer curve's bounding box and its inside mask."""
    t = 2 * np.pi * np.arange(512) / 512
    zo = cfg.spec.curves[-1].z(t)
    xs = np.linspace(zo.real.min(), zo.real.max(), cfg.probe_grid["nx"])
    ys = np.linspace(zo.imag.min(), zo.imag.max(), cfg.probe_grid["ny"])
    X, Y = np.meshgrid(xs, ys)
    Z = (X + 1j * Y).ravel()
    mask = inside_mask(cfg.spec, Z)
    # stay off the boundary layer where interior evaluation loses accuracy
    grid = cfg.grid()
    mask[mask] &= grid.nearest(Z[mask])[2] > 0.5 * grid.spacing()
    return Z, mask


# ---------------------------------------------------------------- commands

def cmd_solve(cfg: RunConfig):
    grid = cfg.grid()
    a = cfg.base_point()
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)

    f = ahlfors(grid, a)
    k = f.kernel
    rows = [(int(grid.curve[i]), grid.t[i], grid.z[i].real, grid.z[i].imag,
             k.S[i].real, k.S[i].imag, k.L[i].real, k.L[i].imag,
             f.values[i].real, f.values[i].imag) for i in range(grid.N)]
    _write_csv(out / "kernels.csv",
               ["curve", "t", "x", "y", "S_re", "S_im", "L_re", "L_im", "f_re", "f_im"], rows)

    frame = {"n": grid.n, "m": grid.m, "a": [a.real, a.imag]}
    if grid.n > 1:
        fr = harmonic_frame(grid)
        frame.update(fr.to_dict())
        frame["P_11"] = frame["periods"][0][0]
    else:
        frame.update(periods=[], sigma=[], i_sigma=[], i_sigma_max_imag=0.0, period_purity=0.0)
    _dump_json(frame, out / "frame.json")

    Z, mask = probe_grid(cfg)
    rows = []
    for j, w in enumerate(cfg.sources()):
        vals = np.full(Z.shape, np.nan)
        ok = mask & (np.abs(Z - w) > 1e-10)
        vals[ok] = green_direct(grid, Z[ok], w)
        rows += [(j, w.real, w.imag, z.real, z.imag, v) for z, v in zip(Z, vals)]
    _write_csv(out / "green_grid.csv", ["w_index", "w_re", "w_im", "x", "y", "value"], rows)
    return {"kernels": str(out / "kernels.csv"), "frame": str(out / "frame.json"),
            "green_grid": str(out / "green_grid.csv")}


def cmd_verify(cfg: RunConfig):
    """Run the identity suite; returns (report dict, exit code)."""
    grid = cfg.grid()
    a = cfg.base_point()
    ws = cfg.sources()
    records = run_suite(grid, a, ws, cfg.name, cfg.tolerances, n_probes=cfg.n_probes)
    ok = summarize(records)
    report = {"domain": cfg.name, "m": cfg.m, "a": [a.real, a.imag],
              "w": [[w.real, w.imag] for w in ws], "pass": ok,
              "failed": [r["identity"] for r in records if not r["pass"]],
              "records": records}
    cfg.out.mkdir(parents=True, exist_ok=True)
    _dump_json(report, cfg.out / "verify.json")
    return report, (EXIT_OK if ok else EXIT_FAIL)


def _parse_quantity(name, n):
    base, _, idx = name.rpartition("_")
    if name in ("green", "ahlfors_abs", "poisson"):
        return name, None
    if base in ("omega", "lambda", "mu") and idx.isdigit():
        j = int(idx)
        top = n - 1 if base == "mu" else n
        if not 1 <= j <= top:
            raise ConfigError(f"{name}: index must lie in 1..{top}")
        return base, j - 1
    raise ConfigError(f"unknown quantity {name!r}; choose from {', '.join(QUANTITIES)}")


def cmd_export_field(cfg: RunConfig, quantity: str, node: int = 0):
    grid = cfg.grid()
    kind, j = _parse_quantity(quantity, grid.n)
    if kind in ("omega", "mu") and grid.n < 2 and not (kind == "omega" and j == 0):
        raise ConfigError(f"{quantity} needs a multiply connected domain")
    Z, mask = probe_grid(cfg)
    vals = np.full(Z.shape, np.nan)
    pts = Z[mask]
    if kind == "green":
        w = cfg.sources()[0]
        keep = np.abs(pts - w) > 1e-10
        sub = np.full(pts.shape, np.nan)
        sub[keep] = green_direct(grid, pts[keep], w)
        vals[mask] = sub
    elif kind == "omega":
        vals[mask] = harmonic_frame(grid).omega_at(pts, j) if grid.n > 1 else 1.0
    elif kind == "mu":
        vals[mask] = harmonic_frame(grid).mu_at(pts, j)
    elif kind == "lambda":
        # the kernel solve needs sources at least one node spacing inside
        d = grid.nearest(pts)[2]
        far = d > 1.5 * grid.spacing()
        sub = np.full(pts.shape, np.nan)
        if np.any(far):
            sub[far] = harmonic_lambda_many(grid, pts[far])[:, j]
        vals[mask] = sub
    elif kind == "ahlfors_abs":
        vals[mask] = np.abs(ahlfors(grid, cfg.base_point())(pts))
    else:
        vals[mask] = poisson_field(grid, node)(pts)
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / f"{quantity}.csv"
    _write_csv(path, ["x", "y", "value"], [(z.real, z.imag, v) for z, v in zip(Z, vals)])
    return str(path)


# -------------------------------------------------------------------- main

def _error(kind, exc, code):
    print(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc),
                      "exit_code": code}, sort_keys=True), file=sys.stderr)
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="ahlfors-green",
                                description="Kernel, harmonic measure and Green's function solver.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "verify", "export-field"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, metavar="PATH")
        s.add_argument("--out", metavar="DIR")
        s.add_argument("--m", type=int, help="nodes per curve")
        s.add_argument("--a", metavar="RE,IM", help="base point of the Ahlfors map")
        s.add_argument("--w", action="append", metavar="RE,IM", help="source point (repeatable)")
        if name == "export-field":
            s.add_argument("--quantity", required=True, metavar="NAME",
                           help="green, omega_J, lambda_J, mu_J, ahlfors_abs or poisson")
            s.add_argument("--node", type=int, default=0, help="boundary node for poisson")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config, m=args.m, a=args.a, ws=args.w, out=args.out)
        if args.command == "solve":
            print(json.dumps(cmd_solve(cfg), sort_keys=True))
            return EXIT_OK
        if args.command == "verify":
            report, code = cmd_verify(cfg)
            for r in report["records"]:
                flag = "PASS" if r["pass"] else "FAIL"
                print(f"{flag} {r['identity']:<28} {r['max_residual']:.3e} (tol {r['tolerance']:.1e})")
            return code
        print(json.dumps({"field": cmd_export_field(cfg, args.quantity, args.node)}))
        return EXIT_OK
    except RoutingError as exc:
        return _error("numerical failure", exc, EXIT_NUMERIC)
    except (ConfigError, GeometryError) as exc:
        return _error("config error", exc, EXIT_CONFIG)
    except (SzegoError, DirichletError, QuadratureError, CalibrationError, SingularityError,
            np.linalg.LinAlgError) as exc:
        return _error("numerical failure", exc, EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
