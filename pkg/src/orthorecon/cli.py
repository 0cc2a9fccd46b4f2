"""Command line front-end: unisolvence queries, reconstructions, convergence tables.

Exit codes: 0 success (or unisolvent), 1 usage/config error, 2 degenerate
configuration.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import functions, mesh as meshes
from .orthopoly import WeightError, WeightSpec
from .reconstruct import (
    DegenerateConfiguration,
    ElementSpec,
    Geometry,
    convergence_study,
    l1_error,
    reconstruct_mesh,
)
from .unisolvence import UnisolvenceQuery, check_general, predicate_bundle

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE = 0, 1, 2
GRID = 200
CONFIG_KEYS = {"weight", "m", "N", "mesh", "fn", "quad_order", "out", "threads", "k"}


class ConfigError(ValueError):
    pass


def parse_weight(text: str) -> WeightSpec:
    """``legendre``, ``gegenbauer:<lambda>`` or ``jacobi:<alpha>,<beta>``."""
    fam, _, params = text.strip().partition(":")
    try:
        if fam == "legendre" and not params:
            return WeightSpec.legendre()
        if fam == "gegenbauer":
            return WeightSpec.gegenbauer(float(params))
        if fam == "jacobi":
            a, b = (float(p) for p in params.split(","))
            return WeightSpec.jacobi(a, b)
    except (ValueError, WeightError) as exc:
        raise ConfigError(f"weight {text!r}: {exc}") from None
    raise ConfigError(f"weight {text!r}: use legendre, gegenbauer:<l> or jacobi:<a>,<b>")


def parse_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not value.strip():
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


@dataclass
class RunConfig:
    command: str
    weight: WeightSpec
    m: int
    N: Optional[int] = None
    mesh: Optional[str] = None
    fn: Optional[str] = None
    quad_order: int = 20
    out: Optional[str] = None
    threads: Optional[int] = None
    k: int = 0


def _int(key: str, value) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def build_config(ns: argparse.Namespace) -> RunConfig:
    merged = parse_config(ns.config) if ns.config else {}
    for key in CONFIG_KEYS:
        val = getattr(ns, key, None)
        if val is not None:
            merged[key] = val
    for key in ("weight", "m"):
        if key not in merged:
            raise ConfigError(f"missing required setting {key!r}")
    cfg = RunConfig(ns.command, parse_weight(str(merged["weight"])), _int("m", merged["m"]))
    if "N" in merged:
        cfg.N = _int("N", merged["N"])
    cfg.mesh = merged.get("mesh")
    cfg.fn = merged.get("fn")
    cfg.quad_order = _int("quad_order", merged.get("quad_order", 20))
    cfg.out = merged.get("out")
    cfg.threads = _int("threads", merged["threads"]) if "threads" in merged else None
    cfg.k = _int("k", merged.get("k", 0))
    if cfg.m < 1:
        raise ConfigError("m must be >= 1")
    return cfg


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def cmd_unisolvence(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    if cfg.N is None:
        raise ConfigError("unisolvence needs N")
    q = UnisolvenceQuery(cfg.weight, cfg.m, cfg.N)
    verdict = check_general(q)
    bundle = predicate_bundle(q, k=min(cfg.k, cfg.m))
    w = csv.writer(stdout, lineterminator="\n")
    w.writerow(["quantity", "value"])
    w.writerow(["unisolvent", _fmt(verdict.unisolvent)])
    w.writerow(["reason", verdict.reason.value])
    w.writerow(["weight", cfg.weight.label])
    for key, val in bundle.as_dict().items():
        w.writerow([key, _fmt(val)])
    return EXIT_OK if verdict.unisolvent else EXIT_DEGENERATE


def _mesh_family(spec: str) -> tuple[str, Geometry]:
    fam = spec.partition(":")[0]
    if fam == "fk":
        return fam, Geometry.TRIANGLE
    if fam == "cart":
        return fam, Geometry.QUAD
    raise ConfigError(f"mesh {spec!r}: family must be fk or cart")


def _function(name: Optional[str], geometry: Geometry):
    if not name:
        raise ConfigError("missing required setting 'fn'")
    try:
        if name.startswith("poly:") and geometry is Geometry.QUAD:
            # reproduction targets on quads use the tensor-degree space
            return functions.by_name("t" + name)
        return functions.by_name(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _element(cfg: RunConfig, geometry: Geometry) -> ElementSpec:
    try:
        return ElementSpec(cfg.m, geometry, cfg.weight)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _degenerate(exc: DegenerateConfiguration, stderr) -> int:
    print(f"degenerate configuration: {exc}", file=stderr)
    print("run the 'unisolvence' subcommand for the full predicate table", file=stderr)
    return EXIT_DEGENERATE


def cmd_reconstruct(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Writes ``<out>.coeffs.csv`` and ``<out>.grid.csv``; prints the L1 error."""
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    if not cfg.mesh:
        raise ConfigError("missing required setting 'mesh'")
    _, geometry = _mesh_family(cfg.mesh)
    try:
        mesh = meshes.by_name(cfg.mesh)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    f = _function(cfg.fn, geometry)
    spec = _element(cfg, geometry)
    try:
        rec = reconstruct_mesh(f, mesh, spec, cfg.quad_order, cfg.threads)
    except DegenerateConfiguration as exc:
        return _degenerate(exc, stderr)
    err = l1_error(f, rec, threads=cfg.threads)

    prefix = cfg.out or "reconstruction"
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    coeff_path, grid_path = f"{prefix}.coeffs.csv", f"{prefix}.grid.csv"
    with open(coeff_path, "w") as fh:
        fh.write("element," + ",".join(f"c{i}" for i in range(spec.dim)) + "\n")
        rec.dump(fh)
    t = np.linspace(-1.0, 1.0, GRID)
    X, Y = np.meshgrid(t, t, indexing="xy")
    fv = f(X, Y)
    rv = rec(X, Y)
    with open(grid_path, "w") as fh:
        fh.write("x,y,f,recon,abs_err\n")
        rows = np.column_stack([X.ravel(), Y.ravel(), fv.ravel(), rv.ravel(), np.abs(fv - rv).ravel()])
        np.savetxt(fh, rows, delimiter=",", fmt="%.17g")

    w = csv.writer(stdout, lineterminator="\n")
    w.writerow(["quantity", "value"])
    for key, val in [("weight", cfg.weight.label), ("m", cfg.m), ("mesh", mesh.label),
                     ("elements", len(mesh)), ("h", f"{mesh.h:.3e}"), ("L1", f"{err.value:.1e}"),
                     ("coefficients", coeff_path), ("grid", grid_path)]:
        w.writerow([key, val])
    return EXIT_OK


def _sizes(spec: str) -> tuple[str, list[int]]:
    fam, _, rest = spec.partition(":")
    try:
        sizes = [int(s) for s in rest.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"mesh {spec!r}: sizes must be integers") from None
    if len(sizes) < 2:
        raise ConfigError("converge needs at least two mesh sizes, e.g. fk:10,20,30")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ConfigError("mesh sizes must be strictly increasing")
    return fam, sizes


def cmd_converge(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """CSV columns: size, elements, h, L1_error, slope (empty when undefined)."""
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    if not cfg.mesh:
        raise ConfigError("missing required setting 'mesh'")
    fam, geometry = _mesh_family(cfg.mesh)
    _, sizes = _sizes(cfg.mesh)
    f = _function(cfg.fn, geometry)
    spec = _element(cfg, geometry)
    try:
        reports = convergence_study(f, fam, sizes, spec, cfg.quad_order, threads=cfg.threads)
    except DegenerateConfiguration as exc:
        return _degenerate(exc, stderr)
    fh = open(cfg.out, "w", newline="") if cfg.out else stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["size", "elements", "h", "L1_error", "slope"])
        for r in reports:
            w.writerow([r.size, r.n_elements, f"{r.h:.17g}", f"{r.value:.17g}",
                        "" if r.slope is None else f"{r.slope:.17g}"])
    finally:
        if fh is not stdout:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file with the same keys as the flags")
    common.add_argument("--weight", help="legendre | gegenbauer:<lambda> | jacobi:<alpha>,<beta>")
    common.add_argument("--m", type=int, help="polynomial degree")

    p = argparse.ArgumentParser(prog="orthorecon", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    u = sub.add_parser("unisolvence", parents=[common], help="decide whether the boundary triple is unisolvent")
    u.add_argument("--N", type=int, help="number of polygon edges")
    u.add_argument("--k", type=int, help="derivative order for the order-k predicates (default 0)")

    for name, helptext, meshhelp in [
        ("reconstruct", "reconstruct a test function on one mesh", "fk:<n> or cart:<n>"),
        ("converge", "L1 errors along a mesh family", "fk:<n1>,<n2>,... or cart:<n1>,<n2>,..."),
    ]:
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--mesh", help=meshhelp)
        s.add_argument("--fn", help="f1..f6 or poly:<degree>")
        s.add_argument("--quad-order", dest="quad_order", type=int, help="edge Gauss points (default 20)")
        s.add_argument("--out", help="output prefix (reconstruct) or CSV path (converge)")
        s.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = build_config(ns)
        handler = {"unisolvence": cmd_unisolvence, "reconstruct": cmd_reconstruct,
                   "converge": cmd_converge}[cfg.command]
        return handler(cfg)
    except (ValueError, OSError) as exc:
        print(f"orthorecon {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
