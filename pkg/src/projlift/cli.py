"""Batch front-end: config-driven verification with deterministic reports.

Config files are flat INI-style text with three sections::

    [structure]
    n = 2
    family = einstein            ; einstein | walker | modified | skew
    lambda = 1.0
    gamma_1_11 = "x1*x2"         ; Gamma^k_ij entries, DSL strings, mirrored in (i, j)
    m_11 = "0.5"                 ; modified family only
    f = "x1*x2"                  ; skew family only
    field_K = "x1; neg(x2)"      ; named base vector fields (';'-separated components)

    [sampling]
    points = 20
    seed = 7
    box = -1 1

    [checks]
    run = einstein weyl_plus parallel det_constant killing:K
    tol_einstein = 1e-8          ; optional per-check tolerance overrides

Exit codes: 0 all checks pass, 1 check failure, 2 usage or parse error,
3 numeric domain error (including sample-point exhaustion).
"""

from __future__ import annotations

import argparse
import configparser
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, conventions, gallery, pseudoriemann as pr
from .dsl import DomainError, DslError, parse
from .lift import einstein_lift, modified_walker, skew_ricci_flat, symplectic_form, walker_lift
from .projective import VectorField, connection_from_entries, default_coords
from .report import Report, emit
from .sampling import SamplingError


class ConfigError(ValueError):
    """Malformed or inconsistent job configuration."""


_DEFAULT_TOLS = {
    "scalar_flat": 1e-9,
    "einstein": 1e-8,
    "einstein_tracefree": 1e-7,
    "scalar_constant": 1e-8,
    "ricci_flat": 1e-9,
    "riemann_flat": 1e-10,
    "weyl_plus": 1e-8,
    "mixed_block": 1e-8,
    "weyl_norm": 1e-6,
    "parallel": 1e-9,
    "det_constant": 1e-12,
    "signature": 0.5,
    "closed_symplectic": 1e-10,
    "para_identity": 1e-10,
    "star_square": 1e-12,
    "ode_cubic": 1e-12,
    "twistor_bracket": 1e-9,
    "covanishing_zero": 1e-10,
    "covanishing_nonzero": 1e-3,
    "killing": 1e-8,
    "symplectic": 1e-8,
    "lift_match": 1e-12,
}


@dataclass
class JobConfig:
    n: int = 2
    family: str = "einstein"
    lam: float = 1.0
    coords: tuple[str, ...] = ("x1", "x2")
    gamma_entries: dict = field(default_factory=dict)
    m_entries: dict = field(default_factory=dict)
    f_text: str = ""
    fields: dict = field(default_factory=dict)  # name -> tuple of component texts
    points: int = 20
    seed: int = 7
    box: tuple[float, float] = (-1.0, 1.0)
    checks: tuple = ()
    tolerances: dict = field(default_factory=dict)


def _unquote(text: str) -> str:
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    return text


def parse_config(path: str) -> JobConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    cfg = JobConfig()
    if cp.has_section("structure"):
        for key, raw in cp.items("structure"):
            value = _unquote(raw)
            if key == "n":
                cfg.n = int(value)
            elif key == "family":
                cfg.family = value
            elif key == "lambda":
                cfg.lam = float(value)
            elif key == "coords":
                cfg.coords = tuple(value.split())
            elif key.startswith("gamma_"):
                parts = key.split("_")[1:]
                if len(parts) != 2 or len(parts[1]) != 2:
                    raise ConfigError(f"bad Christoffel key {key!r}; use gamma_k_ij")
                k, ij = parts
                cfg.gamma_entries[(int(k), int(ij[0]), int(ij[1]))] = value
            elif key.startswith("m_"):
                ij = key[2:]
                if len(ij) != 2:
                    raise ConfigError(f"bad M key {key!r}; use m_ij")
                cfg.m_entries[(int(ij[0]), int(ij[1]))] = value
            elif key == "f":
                cfg.f_text = value
            elif key.startswith("field_"):
                cfg.fields[key[len("field_"):]] = tuple(
                    _unquote(c) for c in value.split(";")
                )
            else:
                raise ConfigError(f"unknown [structure] key {key!r}")
    if cp.has_section("sampling"):
        for key, raw in cp.items("sampling"):
            value = _unquote(raw)
            if key == "points":
                cfg.points = int(value)
            elif key == "seed":
                cfg.seed = int(value)
            elif key == "box":
                lo, hi = value.split()
                cfg.box = (float(lo), float(hi))
            else:
                raise ConfigError(f"unknown [sampling] key {key!r}")
    names: list[str] = []
    if cp.has_section("checks"):
        for key, raw in cp.items("checks"):
            value = _unquote(raw)
            if key == "run":
                names = value.split()
            elif key.startswith("tol_"):
                cfg.tolerances[key[4:]] = float(value)
            else:
                raise ConfigError(f"unknown [checks] key {key!r}")
    if not names:
        raise ConfigError("config declares no checks ([checks] run = ...)")
    specs = []
    for name in names:
        base = name.split(":", 1)[0]
        if base not in _DEFAULT_TOLS:
            raise ConfigError(f"unknown check {name!r}")
        tol = cfg.tolerances.get(name, cfg.tolerances.get(base, _DEFAULT_TOLS[base]))
        comparison = ">=" if base in ("covanishing_nonzero",) else "<="
        specs.append(gallery.CheckSpec(name, tol, comparison))
    cfg.checks = tuple(specs)
    return cfg


def build_example(cfg: JobConfig) -> gallery.Example:
    if cfg.n not in (2, 3):
        raise ConfigError("n must be 2 or 3")
    coords = cfg.coords if len(cfg.coords) == cfg.n else default_coords(cfg.n)
    try:
        entries = {
            key: parse(text, coords) for key, text in cfg.gamma_entries.items()
        }
    except DslError as err:
        raise ConfigError(f"bad Christoffel expression: {err}") from err
    for (k, i, j) in entries:
        if not all(1 <= idx <= cfg.n for idx in (k, i, j)):
            raise ConfigError(f"Christoffel index out of range in gamma_{k}_{i}{j}")
    mirrored = dict(entries)
    for (k, i, j), e in entries.items():
        twin = (k, j, i)
        if twin in entries and str(entries[twin]) != str(e):
            probe = {name: 0.37 + 0.11 * idx for idx, name in enumerate(coords)}
            if abs(entries[twin].eval(probe) - e.eval(probe)) > 1e-12:
                raise ConfigError(f"gamma_{k}_{i}{j} and gamma_{k}_{j}{i} disagree")
        mirrored[twin] = e
    conn = connection_from_entries(cfg.n, mirrored, coords)
    conv = conventions.active()
    omega = None
    if cfg.family == "einstein":
        metric = einstein_lift(conn, cfg.lam, conv=conv)
        if cfg.n == 2:
            omega = symplectic_form(conn, cfg.lam, conv=conv)
    elif cfg.family == "walker":
        metric = walker_lift(conn, conv=conv)
    elif cfg.family == "modified":
        try:
            m_table = [
                [
                    parse(cfg.m_entries.get((i + 1, j + 1), "0"), coords)
                    for j in range(2)
                ]
                for i in range(2)
            ]
        except DslError as err:
            raise ConfigError(f"bad M expression: {err}") from err
        metric = modified_walker(conn, m_table, conv=conv)
    elif cfg.family == "skew":
        if not cfg.f_text:
            raise ConfigError("skew family needs f")
        try:
            f = parse(cfg.f_text, coords)
        except DslError as err:
            raise ConfigError(f"bad f expression: {err}") from err
        metric = skew_ricci_flat(f, cfg.lam, coords, conv=conv)
        if cfg.lam != 0.0:
            omega = symplectic_form(metric.connection, cfg.lam, conv=conv)
    else:
        raise ConfigError(f"unknown family {cfg.family!r}")
    try:
        fields = {
            name: VectorField(tuple(parse(c, coords) for c in comps))
            for name, comps in cfg.fields.items()
        }
    except DslError as err:
        raise ConfigError(f"bad vector field expression: {err}") from err
    for spec in cfg.checks:
        if ":" in spec.name:
            _, arg = spec.name.split(":", 1)
            if arg not in fields:
                raise ConfigError(f"check {spec.name!r} references undefined field {arg!r}")
        if spec.name in ("closed_symplectic", "para_identity", "covanishing_zero",
                         "covanishing_nonzero") and omega is None:
            raise ConfigError(
                f"check {spec.name!r} needs the charged symplectic form "
                "(einstein or skew family with lambda != 0)"
            )
    return gallery.Example(
        name="config",
        metric=metric,
        omega=omega,
        lam=cfg.lam,
        checks=cfg.checks,
        killing_fields=fields,
        params={"lam": cfg.lam},
    )


def run(cfg: JobConfig) -> Report:
    """Execute a job config; failures are report entries, not exceptions."""
    ex = build_example(cfg)
    return gallery.verify_example(ex, points=cfg.points, seed=cfg.seed)


def _output(report: Report, args) -> None:
    payload = emit(report, "json" if args.json else "text")
    if args.out:
        with open(args.out, "wb") as handle:
            handle.write(payload)
    else:
        sys.stdout.buffer.write(payload)
    print(f"# wall time {report.wall_time_s:.2f} s", file=sys.stderr)


def _finish(report: Report, args, started: float) -> int:
    report.wall_time_s = time.perf_counter() - started
    _output(report, args)
    return 0 if report.all_passed else 1


def cmd_verify(args) -> int:
    started = time.perf_counter()
    cfg = parse_config(args.config)
    if args.points:
        cfg.points = args.points
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol:
        for item in args.tol:
            name, _, value = item.partition("=")
            if not value:
                raise ConfigError(f"bad --tol {item!r}; use NAME=VALUE")
            cfg.tolerances[name] = float(value)
        cfg.checks = tuple(
            gallery.CheckSpec(s.name, cfg.tolerances.get(s.name, s.tolerance), s.comparison)
            for s in cfg.checks
        )
    return _finish(run(cfg), args, started)


def cmd_gallery(args) -> int:
    if args.list or not args.name:
        for name in gallery.EXAMPLE_NAMES:
            print(name)
        return 0
    started = time.perf_counter()
    params = {}
    if args.lam is not None:
        params["lam"] = args.lam
    if args.c is not None:
        params["c"] = args.c
    if args.m is not None:
        params["m"] = args.m
    if args.f is not None:
        params["f"] = args.f
    ex = gallery.get_example(args.name, **params)
    report = gallery.verify_example(ex, points=args.points or 20, seed=args.seed or 7)
    return _finish(report, args, started)


def cmd_curvature(args) -> int:
    if args.name.startswith("gallery:"):
        ex = gallery.get_example(args.name[len("gallery:"):])
    else:
        ex = build_example(parse_config(args.name))
    point = tuple(float(v) for v in args.point.split(","))
    if len(point) != ex.metric.dim:
        raise ConfigError(f"point needs {ex.metric.dim} coordinates")
    conv = conventions.active()
    suite = pr.curvature_suite(ex.metric, point, conv)
    payload = {
        "point": list(point),
        "metric": suite.g.tolist(),
        "scalar": suite.scalar,
        "ricci": suite.ric.tolist(),
        "det": suite.det,
        "signature": list(suite.signature),
        "max_weyl": float(np.max(np.abs(suite.weyl_low))),
    }
    if ex.metric.n == 2:
        op = pr.weyl_blocks(ex.metric, point, conv, suite=suite)
        payload.update(
            {
                "weyl_plus_norm": op.c_plus_norm(),
                "weyl_minus_norm": op.c_minus_norm(),
                "mixed_block_norm": op.mixed_norm(),
                "weyl_norm_sq": op.weyl_norm_sq,
            }
        )
    from .report import _canon

    sys.stdout.write(_canon(payload) + "\n")
    return 0


def cmd_invariance(args) -> int:
    started = time.perf_counter()
    lams = tuple(float(v) for v in args.lambdas.split(",")) if args.lambdas else (1.0, 2.0)
    report = gallery.invariance_suite(
        pairs=args.pairs, lams=lams, points=args.points or 20, seed=args.seed or 7
    )
    return _finish(report, args, started)


def cmd_killing(args) -> int:
    started = time.perf_counter()
    report = gallery.killing_suite(points=args.points or 10, seed=args.seed or 11)
    return _finish(report, args, started)


def cmd_twistor(args) -> int:
    started = time.perf_counter()
    report = gallery.twistor_suite(
        count=args.count, points=args.points or 10, seed=args.seed or 23
    )
    return _finish(report, args, started)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projlift",
        description="verify split-signature Einstein lifts of projective structures",
    )
    parser.add_argument("--version", action="version", version=f"projlift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--points", type=int, default=None, help="sample points per check")
        p.add_argument("--seed", type=int, default=None, help="sampling seed")
        p.add_argument("--json", action="store_true", help="emit canonical JSON")
        p.add_argument("--out", default=None, help="write the report to this path")

    p = sub.add_parser("verify", help="run a job config")
    p.add_argument("config")
    p.add_argument("--tol", action="append", default=None, metavar="NAME=VALUE")
    common(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("gallery", help="list or run named examples")
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--list", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--f", default=None, help="skew family potential, DSL text")
    common(p)
    p.set_defaults(handler=cmd_gallery)

    p = sub.add_parser("curvature", help="dump curvature data at a point")
    p.add_argument("name", help="gallery:NAME or a config path")
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(handler=cmd_curvature)

    p = sub.add_parser("invariance", help="gauge-invariance suite")
    p.add_argument("--pairs", type=int, default=10)
    p.add_argument("--lambdas", default=None, help="comma-separated lam values")
    common(p)
    p.set_defaults(handler=cmd_invariance)

    p = sub.add_parser("killing", help="symmetry-lift suite")
    common(p)
    p.set_defaults(handler=cmd_killing)

    p = sub.add_parser("twistor", help="Frobenius/pair-equation suite")
    p.add_argument("--count", type=int, default=10)
    common(p)
    p.set_defaults(handler=cmd_twistor)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, DslError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (DomainError, SamplingError) as err:
        print(f"numeric domain error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
