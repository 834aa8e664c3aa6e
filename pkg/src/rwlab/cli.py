"""rwlab command line: generate meshes, check patches, run the verification suite.

Every subcommand reads one JSON config (``--config``) refined by dotted
``--set key=value`` overrides.  Exit codes: 0 pass, 1 verdict failure,
2 configuration or parameter-domain error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .classa import PREDICATES, TOL_VERDICT, Grid, analyze
from .config import FAMILY_KINDS, FIXTURES, build_family, jsonable, parse_value, resolve_family, set_dotted
from .errors import (CausalDegeneracyError, DegenerateFrameError, DomainError, InvalidInputError,
                     JetError, ParameterDomainError, RWLabError)
from .harness import (ANCHORS, CHECKS, DEFAULT_GRID, DEFAULT_SEED, DEFAULT_TOLS, SCHEMA_VERSION, Fixture,
                      SuiteSpec, default_fixtures, run_suite)
from .harness import DEFAULT_FIXTURE_CHECKS, PERTURBED_CHECKS
from .surface import fundamental_forms

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

POSITION_COLUMNS = ("t", "x", "y", "z")
H_COLUMNS = ("theta", "h311", "h312", "h322", "h411", "h412", "h422", "H3", "H4")


class ConfigError(InvalidInputError):
    pass


# -- io helpers ----------------------------------------------------------------

def atomic_write(path: Path, text: str) -> None:
    """Write to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(doc) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_config(args) -> dict:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        set_dotted(doc, key.strip(), parse_value(value))
    return doc


def _grid(cfg: dict, domain, centered: bool, default_n: int) -> Grid:
    g = dict(cfg.get("grid") or {})
    d = {"u0": domain.u0, "u1": domain.u1, "v0": domain.v0, "v1": domain.v1,
         "n_u": default_n, "n_v": default_n, "centered": centered}
    d.update(g)
    try:
        return Grid.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RWLabError):
            raise
        raise ConfigError(f"bad grid record {g!r}: {exc}") from exc


def _tol(value, what="tolerance") -> float:
    try:
        t = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be a number, got {value!r}") from exc
    if not t > 0:
        raise ConfigError(f"{what} must be positive, got {value!r}")
    return t


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def error_record(exc: BaseException) -> dict:
    rec = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParameterDomainError):
        rec["constraint"] = exc.constraint
        if exc.where is not None:
            rec["where"] = exc.where
    return rec


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (CausalDegeneracyError, DegenerateFrameError, FloatingPointError, ArithmeticError)):
        return EXIT_NUMERIC
    if isinstance(exc, (InvalidInputError, ParameterDomainError, DomainError, JetError, RWLabError)):
        return EXIT_CONFIG
    return EXIT_NUMERIC


# -- generate ------------------------------------------------------------------

def mesh_rows(patch, grid: Grid, with_h: bool = True):
    """(header, rows) with rows in row-major grid order (u outer, v inner)."""
    U, V = grid.mesh()
    P = patch.position(U, V)
    cols = {"u": U, "v": V}
    for k, name in enumerate(POSITION_COLUMNS):
        cols[name] = P[..., k]
    if with_h:
        d = fundamental_forms(patch, U, V, connection=False)
        cols["theta"] = d.theta
        for name in H_COLUMNS[1:7]:
            cols[name] = d.coefficient(name)
        cols["H3"], cols["H4"] = d.H3, d.H4
    header = list(cols)
    data = np.stack([np.broadcast_to(cols[c], U.shape).ravel() for c in header], axis=-1) + 0.0
    if not np.all(np.isfinite(data)):
        raise FloatingPointError("non-finite values in the generated mesh")
    return header, data


def cmd_generate(cfg: dict, args) -> int:
    record = resolve_family(cfg)
    built = build_family(record, cfg.get("integrators"))
    grid = _grid(cfg, built.patch.domain, centered=False, default_n=DEFAULT_GRID)
    with_h = bool(cfg.get("h_columns", True))
    header, data = mesh_rows(built.patch, grid, with_h)
    project = args.project or cfg.get("project")
    if project:
        sel = [c.strip() for c in (project.split(",") if isinstance(project, str) else project)]
        if len(sel) != 3 or any(c not in POSITION_COLUMNS for c in sel):
            raise ConfigError(f"--project takes three of {','.join(POSITION_COLUMNS)}, got {project!r}")
        idx = [header.index(c) for c in sel]
        header, data = sel, data[:, idx]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in data:
        w.writerow([_fmt(x) for x in row])
    out = cfg.get("output") or {}
    mesh_path = Path(args.out or out.get("mesh", "mesh.csv"))
    meta_path = Path(args.meta or out.get("metadata", mesh_path.with_suffix(".json")))
    atomic_write(mesh_path, buf.getvalue())
    meta = {
        "schema_version": SCHEMA_VERSION,
        "command": "generate",
        "family": {"kind": built.kind, "anchor": built.anchor, "record": record},
        "grid": grid.to_dict(),
        "columns": header,
        "rows": int(data.shape[0]),
        "mesh": str(mesh_path),
        "config": cfg,
    }
    spec = built.spec
    if getattr(spec, "exited", False):
        meta["integration_exit"] = {"reason": spec.exit_reason, "u_end": spec.domain.u1}
    atomic_write(meta_path, dump_json(meta))
    print(f"wrote {data.shape[0]} rows to {mesh_path} ({built.kind})")
    return EXIT_PASS


# -- check ---------------------------------------------------------------------

def cmd_check(cfg: dict, args) -> int:
    preds = cfg.get("predicates", ["classA"])
    if isinstance(preds, str):
        preds = [p for p in preds.split(",") if p]
    unknown = [p for p in preds if p not in PREDICATES]
    if unknown:
        raise ConfigError(f"unknown predicates {unknown}; expected a subset of {sorted(PREDICATES)}")
    tol = _tol(cfg.get("tol", TOL_VERDICT))
    out = cfg.get("output") or {}
    report_path = Path(args.out or out.get("report", "check_report.json"))
    doc = {"schema_version": SCHEMA_VERSION, "command": "check", "config": cfg, "reports": {}}
    ok = True
    if preds:
        record = resolve_family(cfg)
        built = build_family(record, cfg.get("integrators"))
        grid = _grid(cfg, built.patch.domain, centered=True, default_n=DEFAULT_GRID)
        ga = analyze(built.patch, grid)
        doc["family"] = {"kind": built.kind, "anchor": built.anchor}
        doc["grid"] = grid.to_dict()
        for p in preds:
            rep = PREDICATES[p](built.patch, grid, tol, ga)
            doc["reports"][p] = rep.to_dict(points=bool(cfg.get("points", False)))
            ok &= rep.verdict
            for key, s in rep.summary().items():
                flag = "ok  " if rep.verdicts()[key] else "FAIL"
                loc = s["argmax"]
                where = f" at (u={loc['u']:.6g}, v={loc['v']:.6g})" if loc else ""
                mx = "n/a" if s["max"] is None else f"{s['max']:.3e}"
                print(f"{flag} {p:12s} {key:16s} max={mx}{where}")
    doc["verdict"] = ok
    atomic_write(report_path, dump_json(doc))
    print(f"{'PASS' if ok else 'FAIL'}: report written to {report_path}")
    return EXIT_PASS if ok else EXIT_FAIL


# -- verify --------------------------------------------------------------------

def suite_from_config(cfg: dict) -> SuiteSpec:
    n = int(cfg.get("grid_n", DEFAULT_GRID))
    if n < 2:
        raise ConfigError("grid_n must be at least 2")
    fixtures = default_fixtures(n, perturbed=bool(cfg.get("perturbed", False)))
    names = cfg.get("fixtures")
    if names is not None:
        if isinstance(names, str):
            names = [x for x in names.split(",") if x]
        known = {fx.name: fx for fx in default_fixtures(n, perturbed=True)}
        bad = [x for x in names if x not in known]
        if bad:
            raise ConfigError(f"unknown fixtures {bad}; expected a subset of {sorted(known)}")
        fixtures = [known[x] for x in names]
    for extra in cfg.get("extra_fixtures", []):
        checks = tuple(extra.get("checks", PERTURBED_CHECKS))
        fixtures.append(Fixture(extra.get("name", "extra"), extra["family"], checks, n))
    checks = cfg.get("checks")
    if isinstance(checks, str):
        checks = [c for c in checks.split(",") if c]
    tols = {}
    raw = cfg.get("tols", {})
    if isinstance(raw, (int, float)):
        raw = {c: raw for c in (checks or CHECKS)}
    for c, t in raw.items():
        tols[c] = _tol(t, f"tolerance for {c}")
    return SuiteSpec(fixtures=fixtures, checks=checks, tols=tols, seed=int(cfg.get("seed", DEFAULT_SEED)),
                     threads=cfg.get("threads"))


def cmd_verify(cfg: dict, args) -> int:
    spec = suite_from_config(cfg)
    report = run_suite(spec)
    for line in report.summary_lines():
        print(line)
    if args.timing:
        print(f"wall time {report.timing['total']:.2f} s")
    out = cfg.get("output") or {}
    path = Path(args.out or out.get("report", "verify_report.json"))
    doc = report.to_dict(include_timing=bool(args.timing))
    doc["command"] = "verify"
    atomic_write(path, dump_json(doc))
    print(f"report written to {path}")
    return EXIT_PASS if report.passed else EXIT_FAIL


# -- list-families -------------------------------------------------------------

def cmd_list(cfg: dict, args) -> int:
    if args.json:
        doc = {"families": FAMILY_KINDS, "fixtures": {k: v for k, v in FIXTURES.items()},
               "checks": ANCHORS, "default_tols": DEFAULT_TOLS,
               "default_fixture_checks": {k: list(v) for k, v in DEFAULT_FIXTURE_CHECKS.items()}}
        sys.stdout.write(dump_json(doc))
        return EXIT_PASS
    print("families:")
    for k, v in FAMILY_KINDS.items():
        print(f"  {k:26s} {v}")
    print("fixtures:")
    for k, v in FIXTURES.items():
        print(f"  {k:26s} {v['kind']}")
    print("checks:")
    for k, v in ANCHORS.items():
        print(f"  {k:26s} {v}")
    return EXIT_PASS


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rwlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"rwlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="dotted-path override, value parsed as JSON when possible (repeatable)")
        sp.add_argument("--out", help="primary output path (overrides output.* in the config)")

    g = sub.add_parser("generate", help="sample a family patch into a CSV mesh plus JSON metadata")
    common(g)
    g.add_argument("--meta", help="metadata JSON path (default: mesh path with .json suffix)")
    g.add_argument("--project", help="write only three position columns, e.g. t,x,y")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", help="run residual predicates on one patch")
    common(c)
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("verify", help="run the verification suite")
    common(v)
    v.add_argument("--timing", action="store_true", help="print and record wall times (report is then not reproducible byte for byte)")
    v.set_defaults(func=cmd_verify)

    lf = sub.add_parser("list-families", help="list family kinds, fixtures and checks")
    lf.add_argument("--json", action="store_true")
    lf.set_defaults(func=cmd_list, config=None, set=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return args.func(cfg, args)
    except (RWLabError, FloatingPointError, ArithmeticError) as exc:
        code = exit_code_for(exc)
        rec = {"schema_version": SCHEMA_VERSION, "error": error_record(exc), "exit_code": code}
        sys.stderr.write(dump_json(rec))
        err_path = getattr(args, "meta", None)
        if err_path:
            atomic_write(Path(err_path), dump_json(rec))
        return code


if __name__ == "__main__":
    sys.exit(main())
