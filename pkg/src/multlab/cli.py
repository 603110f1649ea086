"""Command-line front end: ``multlab <subcommand> ...``.

Grids are written as CSV, everything else as JSON with exact scalars
serialized as strings. Exit status is 0 on success, 1 on a domain error
(the message starts with the error's class name) and 2 on a configuration
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .biring import FunctionalPoint, evaluate, parse_poly
from .bounds import THRESHOLD_PARAMS, explicit_constants, threshold
from .dynamics import growth_report, load_mapspec, mapspec_from_system, mapspec_to_json
from .errors import MultlabError, ParseError
from .estimates import SHAPES, aux_poly, max_finite_ord, multiplicity_scan
from .exactalg import field_from_char
from .funceq import load_system, solve_system, verify_residual
from .geometry import (
    BiPoint,
    RationalPoint,
    SplitCycle,
    bezout_bounds,
    delta_pair,
    liouville_check,
    load_cycle,
    ord_distance,
)
from .ideals import is_phi_stable, load_ideal
from .series import ord_series


class ConfigError(Exception):
    """Bad or missing configuration; reported with exit status 2."""


@dataclass
class ExperimentConfig:
    """Settings gathered from a config file and the command line.

    A config file is either a bare system descriptor or an object with a
    ``"system"`` entry (inline or a path relative to the file) and optional
    ``precision``, ``amax``, ``bmax``, ``map``, ``seed`` and ``output``.
    """

    system: dict
    precision: int | None = None
    amax: int | None = None
    bmax: int | None = None
    map: dict | None = None
    seed: int = 0
    output: dict = dc_field(default_factory=dict)
    base: Path = Path(".")


def _read_json(text: str, origin: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {origin}: {exc.msg}", exc.pos, exc.lineno) from None


def _json_arg(value: str, base: Path = Path(".")):
    """Inline JSON (starting with ``{`` or ``[``) or a path to a JSON file."""
    v = value.strip()
    if v.startswith(("{", "[")):
        return _read_json(v, "argument")
    path = Path(value)
    if not path.is_absolute() and not path.exists():
        path = base / path
    if not path.exists():
        raise ConfigError(f"file not found: {value}")
    return _read_json(path.read_text(), str(path))


def load_config(value: str) -> ExperimentConfig:
    path = Path(value)
    base = path.parent if path.exists() else Path(".")
    data = _json_arg(value)
    if not isinstance(data, dict):
        raise ConfigError("a config must be a JSON object")
    if "system" not in data:
        return ExperimentConfig(system=data, base=base)
    system = data["system"]
    if isinstance(system, str):
        system = _json_arg(system, base)
    mp = data.get("map")
    if isinstance(mp, str):
        mp = _json_arg(mp, base)
    cfg = ExperimentConfig(
        system=system,
        precision=data.get("precision"),
        amax=data.get("amax"),
        bmax=data.get("bmax"),
        map=mp,
        seed=int(data.get("seed", 0)),
        output=dict(data.get("output") or {}),
        base=base,
    )
    if cfg.precision is not None and int(cfg.precision) < 8:
        raise ConfigError("precision must be at least 8")
    for key in ("amax", "bmax"):
        v = getattr(cfg, key)
        if v is not None and int(v) < 0:
            raise ConfigError(f"{key} must be nonnegative")
    return cfg


def _emit(obj, args) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _precision(args, cfg: ExperimentConfig | None, default: int = 32) -> int:
    N = getattr(args, "N", None)
    if N is None and cfg is not None:
        N = cfg.precision
    N = default if N is None else int(N)
    if N < 1:
        raise ConfigError("precision must be positive")
    return N


def _point(args) -> tuple[ExperimentConfig, FunctionalPoint]:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = load_config(args.config)
    S = load_system(cfg.system)
    return cfg, solve_system(S, _precision(args, cfg))


def _ord_json(o) -> dict:
    return o.to_json()


# ---------------------------------------------------------------------------
# subcommands


def cmd_series(args) -> int:
    cfg, F = _point(args)
    S = load_system(cfg.system)
    res = verify_residual(S, F)
    out = {
        "label": F.label,
        "field": F.field.name,
        "precision": F.precision,
        "series": [s.to_json()["coeffs"] for s in F.series],
        "display": [_series_text(s) for s in F.series],
        "residual": [_ord_json(r) for r in res],
    }
    _emit(out, args)
    return 0


def _series_text(s) -> str:
    P = parse_poly("0", s.field, "affine", 1)
    for k, c in enumerate(s.coeffs):
        if c:
            P = P + P.monomial(1, (k, 0), c, s.field)
    body = str(P)
    return f"{body} + O(z^{s.precision})" if body != "0" else f"O(z^{s.precision})"


def cmd_ord(args) -> int:
    _, F = _point(args)
    P = parse_poly(args.poly, F.field, "auto", F.n)
    _emit({"poly": str(P), "ord": ord_series(evaluate(P, F)).to_json(), "precision": F.precision}, args)
    return 0


def cmd_auxpoly(args) -> int:
    _, F = _point(args)
    res = aux_poly(F, (args.a, args.b))
    _emit(dict(res.to_json(), bidegree=[args.a, args.b], precision=F.precision), args)
    return 0


def cmd_scan(args) -> int:
    cfg, F = _point(args)
    amax = args.amax if args.amax is not None else cfg.amax
    bmax = args.bmax if args.bmax is not None else cfg.bmax
    if amax is None or bmax is None:
        raise ConfigError("grid bounds --amax and --bmax are required")
    scan = multiplicity_scan(
        F,
        int(amax),
        int(bmax),
        F.precision,
        shape=args.shape,
        t=args.t,
        oracle=args.oracle,
        prime=args.prime,
    )
    csv_text = scan.to_csv()
    csv_path = args.out or cfg.output.get("csv")
    json_path = args.json or cfg.output.get("json")
    if csv_path:
        Path(csv_path).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    if json_path:
        Path(json_path).write_text(json.dumps(scan.to_json(), indent=2) + "\n")
    return 0


def cmd_lambda(args) -> int:
    _, F = _point(args)
    res = max_finite_ord(F, (args.a, args.b), F.precision, oracle=args.oracle, prime=args.prime, strict=not args.lenient)
    _emit(res.to_json(), args)
    return 0


def cmd_stability(args) -> int:
    fld = field_from_char(args.char)
    phi = load_mapspec(_json_arg(args.map), fld)
    I = load_ideal(_json_arg(args.ideal), fld, phi.n)
    res = is_phi_stable(I, phi)
    _emit(dict(res.to_json(), ideal=I.to_json(), map=mapspec_to_json(phi)), args)
    return 0


def cmd_growth(args) -> int:
    cfg, F = _point(args)
    if args.map:
        phi = load_mapspec(_json_arg(args.map), F.field)
    elif cfg.map:
        phi = load_mapspec(cfg.map, F.field)
    else:
        phi = mapspec_from_system(load_system(cfg.system))
    seed = args.seed if args.seed is not None else cfg.seed
    rep = growth_report(phi, F, samples=args.samples, maxN=args.max_iter, seed=seed)
    _emit(rep.to_json(), args)
    return 0


def _parse_point(text: str, field) -> RationalPoint | BiPoint:
    groups = [g for g in text.split(";")]
    pts = [RationalPoint.parse([c.strip() for c in g.split(",")], field) for g in groups]
    if len(pts) == 1:
        return pts[0]
    if len(pts) == 2:
        return BiPoint(pts[0], pts[1])
    raise ConfigError("a point is 'c0,c1,...' or 'a0,a1;b0,b1,...'")


def cmd_distance(args) -> int:
    _, F = _point(args)
    chosen = [x for x in (args.point, args.cycle, args.hypersurface) if x]
    if len(chosen) != 1:
        raise ConfigError("give exactly one of --point, --cycle, --hypersurface")
    if args.point:
        target = _parse_point(args.point, F.field)
        desc = str(target)
    elif args.cycle:
        target = load_cycle(_json_arg(args.cycle), F.field)
        desc = target.to_json()
    else:
        target = parse_poly(args.hypersurface, F.field, "auto", F.n)
        desc = str(target)
    mode = args.mode or ("sum" if args.cycle else "min-pair")
    o = ord_distance(F, target, None if mode == "min-pair" else mode)
    _emit({"target": desc, "mode": mode, "ord": o.to_json(), "precision": F.precision}, args)
    return 0


def cmd_liouville(args) -> int:
    fld = field_from_char(args.char)
    Z = load_cycle(_json_arg(args.cycle), fld)
    Q = parse_poly(args.poly, fld, "auto", Z.n)
    res = liouville_check(Q, Z)
    _emit(dict(res.to_json(), poly=str(Q), cycle_degree=Z.degree, cycle_height=Z.height), args)
    return 0 if res.holds else 1


def cmd_bezout(args) -> int:
    d1, d0 = bezout_bounds(Fraction(args.deg1), Fraction(args.deg0), args.r, args.rp, Fraction(args.a), Fraction(args.b))
    _emit({"deg_1": str(d1), "deg_0": str(d0)}, args)
    return 0


def cmd_delta(args) -> int:
    _, F = _point(args)
    Z = load_cycle(_json_arg(args.cycle), F.field)
    form = tuple(Fraction(x) for x in args.form.split(","))
    if len(form) != 2:
        raise ConfigError("--form takes two coefficients, e.g. 1,1")
    res = delta_pair(Z, F, form, args.cap)
    _emit(res.to_json(), args)
    return 0


def cmd_constants(args) -> int:
    F = None
    if args.config:
        _, F = _point(args)
    pc = explicit_constants(args.n, Fraction(args.mu), Fraction(args.nu0), F=F, ord_value=args.ord, budget=args.budget)
    _emit(pc.to_json(), args)
    return 0


def cmd_threshold(args) -> int:
    params = {}
    for item in args.param or []:
        if "=" not in item:
            raise ConfigError(f"parameter {item!r} is not of the form name=value")
        k, v = item.split("=", 1)
        try:
            params[k.strip()] = Fraction(v.strip())
        except ValueError:
            raise ConfigError(f"parameter {k!r} has a non-rational value {v!r}") from None
    res = threshold(args.kind, params)
    _emit(res.to_json(), args)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

ANCHORS = {
    "series": "Taylor expansion of a solution of a Mahler or first-order differential system.",
    "ord": "Order of vanishing at z = 0 of P(z, f(z)).",
    "auxpoly": "Auxiliary polynomial of bidegree (a, b) vanishing to order at least u - 1 by linear algebra.",
    "lambda": "Maximal finite order of vanishing at one bidegree, outside the observed ideal of f.",
    "scan": "Grid of maximal finite vanishing orders compared with the multiplicity-estimate shape.",
    "stability": "Stability of a bi-homogeneous ideal under a derivation or a Mahler pullback.",
    "growth": "Degree growth of iterates of the map and order growth along the functional point.",
    "distance": "Valuation distance ord(x, y) = ord(x ^ y) - ord x - ord y to a point, cycle or hypersurface.",
    "liouville": "Liouville inequality deg Q h(Z) + h(Q) deg Z >= |sum ord Q(beta)| on a split 0-cycle.",
    "bezout": "Bezout-type bounds on the bidegrees of an intersection with r - r_p hypersurfaces.",
    "delta": "Least bidegree of a polynomial vanishing on a cycle but not at f, for a linear form.",
    "constants": "Explicit constants c_n, rho_i, C_m and the non-isotriviality constant C_iso.",
    "threshold": "Right-hand sides of the transference, multiplicity and stability inequalities.",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multlab", description="Exact experiments on multiplicity estimates for functional points.")
    ap.add_argument("--version", action="version", version=f"multlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, needs_point=False):
        p = sub.add_parser(name, help=ANCHORS[name], description=f"Anchor: {ANCHORS[name]}")
        p.set_defaults(func=func)
        if needs_point:
            p.add_argument("--config", required=name != "constants", help="system descriptor or experiment config (JSON)")
            p.add_argument("--N", "--precision", dest="N", type=int, help="number of Taylor coefficients")
        p.add_argument("--out", help="write the result to this file instead of stdout")
        return p

    add("series", cmd_series, True)
    p = add("ord", cmd_ord, True)
    p.add_argument("--poly", required=True, help="polynomial in z, X1.. or in X0', X1', X0, X1..")
    p = add("auxpoly", cmd_auxpoly, True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p = add("lambda", cmd_lambda, True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--oracle", choices=["off", "finite-field"], default="off")
    p.add_argument("--prime", type=int)
    p.add_argument("--lenient", action="store_true", help="report AtLeast instead of failing when the kernel is not stable")
    p = add("scan", cmd_scan, True)
    p.add_argument("--amax", type=int)
    p.add_argument("--bmax", type=int)
    p.add_argument("--shape", choices=sorted(SHAPES), default="(a+b+1)(b+1)^t")
    p.add_argument("--t", type=int, help="exponent t (default: the system's declared t_f)")
    p.add_argument("--oracle", choices=["off", "finite-field"], default="off")
    p.add_argument("--prime", type=int)
    p.add_argument("--json", help="also write the JSON diagnostics here")
    p = add("stability", cmd_stability)
    p.add_argument("--map", required=True, help="map descriptor (file or inline JSON)")
    p.add_argument("--ideal", required=True, help='ideal descriptor {"generators": [...]}')
    p.add_argument("--char", type=int, default=0)
    p = add("growth", cmd_growth, True)
    p.add_argument("--map", help="map descriptor; default: the map attached to the system")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--max-iter", type=int, default=4)
    p.add_argument("--seed", type=int)
    p = add("distance", cmd_distance, True)
    p.add_argument("--point", help="'c0,c1,..' in P^n or 'a0,a1;b0,b1,..' in P^1 x P^n")
    p.add_argument("--cycle", help="cycle descriptor (file or inline JSON)")
    p.add_argument("--hypersurface", help="defining polynomial")
    p.add_argument("--mode", choices=["min-pair", "sum", "max"])
    p = add("liouville", cmd_liouville)
    p.add_argument("--poly", required=True)
    p.add_argument("--cycle", required=True)
    p.add_argument("--char", type=int, default=0)
    p = add("bezout", cmd_bezout)
    for name in ("deg1", "deg0", "a", "b"):
        p.add_argument(f"--{name}", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--rp", type=int, required=True)
    p = add("delta", cmd_delta, True)
    p.add_argument("--cycle", required=True)
    p.add_argument("--form", default="1,1", help="coefficients c',c of the linear form c' a + c b")
    p.add_argument("--cap", type=int, default=6)
    p = add("constants", cmd_constants, True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--nu0", required=True)
    p.add_argument("--ord", type=int, help="Ord(f ^ f(0)) for C_iso, instead of a --config")
    p.add_argument("--budget", type=int, default=2**20, help="largest bit size kept exact")
    p = add("threshold", cmd_threshold)
    p.add_argument("--kind", choices=sorted(THRESHOLD_PARAMS), required=True)
    p.add_argument("--param", action="append", help="name=value, repeatable")
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, KeyError, json.JSONDecodeError, OSError) as exc:
        name = type(exc).__name__
        print(f"{name}: {exc}", file=sys.stderr)
        return 2
    except MultlabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"ValueError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
