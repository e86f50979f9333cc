"""Command line: ``geotorsion invariant | fuzz | oracles | check``.

Exit codes: 0 ok, 1 input error, 2 not acyclic, 3 oracle mismatch.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from .catalog import CatalogSpace, catalog_space, oracle_suite
from .deformation import build_F3, complex_residuals, deformation_matrices
from .errors import GeoTorsionError, InputError, InvalidSpec
from .framing import change_framing_triangulation, framed_space
from .geometry import random_geometrization
from .pachner import fuzz
from .torsion import invariant
from .triangulation import load_json

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_ACYCLIC, EXIT_ORACLE = 0, 1, 2, 3
DEFAULT_SEED = 0
DRIFT_TOL = 1e-6
RESIDUAL_TOL = 1e-9


def parse_framing(text):
    """'3/2', '1.5', '.5' or '-1' as a Fraction with denominator 1 or 2."""
    try:
        r = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidSpec(f"bad framing {text!r}") from None
    if (2 * r).denominator != 1:
        raise InvalidSpec(f"framing {text!r} is not a half-integer")
    return r


def _framing_arg(text):
    try:
        return parse_framing(text)
    except InvalidSpec as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, Fraction):
        return str(x)
    return x


def _dump(obj, pretty):
    return json.dumps(_clean(obj), sort_keys=True, indent=2 if pretty else None,
                      separators=None if pretty else (",", ":"))


def load_input(source, seed, framing):
    """Resolve a catalog id or a JSON path into (tri, chain, geo, meta)."""
    if source == "s3-unknot" or source.startswith("lens:"):
        space: CatalogSpace = catalog_space(source)
        r = space.base_framing if framing is None else framing
        tri, chain = framed_space(space, r)
        geo = space.geo if seed is None else random_geometrization(tri, seed)
        meta = {"catalog": space.ident, "framing": r, "base_framing": space.base_framing,
                "geometrization": "catalog" if seed is None else "random"}
        return tri, chain, geo, meta
    tri, chain = load_json(source)
    if chain is None:
        raise InputError(f"{source} has no chain")
    r = Fraction(0) if framing is None else framing
    steps = int(2 * abs(r))
    for _ in range(steps):
        tri, chain, _, _ = change_framing_triangulation(tri, chain, direction=1 if r > 0 else -1)
    seed = DEFAULT_SEED if seed is None else seed
    geo = random_geometrization(tri, seed)
    return tri, chain, geo, {"framing": r, "framing_scale": "relative", "geometrization": "random",
                             "geometrization_seed": seed}


def _report(args, tri, result):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "input": getattr(args, "input", None),
        "input_hash": tri.digest() if tri is not None else None,
        "seed": getattr(args, "seed", None),
        "result": result,
    }


def cmd_invariant(args):
    tri, chain, geo, meta = load_input(args.input, args.seed, args.framing)
    rep = invariant(tri, chain, geo)
    rep.framing_offset = float(meta["framing"])
    rep.seed = args.seed
    result = rep.to_dict()
    result.update(meta)
    out = _report(args, tri, result)
    return out, (EXIT_OK if rep.acyclic else EXIT_ACYCLIC)


def cmd_fuzz(args):
    tri, chain, geo, meta = load_input(args.input, None, args.framing)
    records, summary = fuzz(tri, chain, geo, args.moves, args.seed)
    lines = [_dump(r.to_dict(), False) for r in records]
    summary.update(meta)
    out = _report(args, tri, summary)
    if not summary["acyclic"]:
        code = EXIT_ACYCLIC
    elif summary["max_drift"] > DRIFT_TOL:
        code = EXIT_ORACLE
    else:
        code = EXIT_OK
    return out, code, lines


def cmd_oracles(args):
    res = oracle_suite(args.pmax)
    res["rows"] = res["rows"] if args.rows else None
    out = _report(args, None, res)
    return out, (EXIT_ORACLE if res["failures"] else EXIT_OK)


def cmd_check(args):
    tri, chain, geo, meta = load_input(args.input, args.seed, args.framing)
    m = deformation_matrices(tri, chain, geo, build_F3(tri, geo))
    res = complex_residuals(m)
    res["f3_shape"] = list(m.f3.shape)
    res["f2_shape"] = list(m.f2.shape)
    res.update(meta)
    bad = [k for k in ("f3_symmetry", "f4_plus_f2T", "f3_f2", "f4_f3") if res[k] > RESIDUAL_TOL]
    res["ok"] = not bad
    return _report(args, tri, res), (EXIT_ORACLE if bad else EXIT_OK)


def build_parser():
    ap = argparse.ArgumentParser(prog="geotorsion", description=__doc__.splitlines()[0])
    fmt = argparse.ArgumentParser(add_help=False)
    g = fmt.add_mutually_exclusive_group()
    g.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    g.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    fmt.set_defaults(pretty=False)
    fmt.add_argument("--timing", action="store_true", help="add wall time to the report")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariant", parents=[fmt], help="compute I for a triangulation")
    p.add_argument("input", help="triangulation JSON path, 's3-unknot' or 'lens:p,q,n'")
    p.add_argument("--seed", type=int, default=None, help="random geometrization seed")
    p.add_argument("--framing", type=_framing_arg, default=None, help="half-integer, e.g. 3/2")

    p = sub.add_parser("fuzz", parents=[fmt], help="random relative Pachner moves")
    p.add_argument("input")
    p.add_argument("--moves", type=int, default=100)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--framing", type=_framing_arg, default=None)

    p = sub.add_parser("oracles", parents=[fmt], help="exact lens-space oracles")
    p.add_argument("--pmax", type=int, default=12)
    p.add_argument("--rows", action="store_true", help="include the per-case table")

    p = sub.add_parser("check", parents=[fmt], help="chain-complex identities")
    p.add_argument("input")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--framing", type=_framing_arg, default=None)
    return ap


def main(argv=None):
    args = None
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    t0 = time.perf_counter()
    lines = []
    try:
        if args.command == "invariant":
            out, code = cmd_invariant(args)
        elif args.command == "fuzz":
            out, code, lines = cmd_fuzz(args)
        elif args.command == "oracles":
            out, code = cmd_oracles(args)
        else:
            out, code = cmd_check(args)
    except GeoTorsionError as exc:
        print(_dump({"schema_version": SCHEMA_VERSION, "command": args.command, "error": exc.to_dict()},
                    args.pretty))
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc, InputError) or exc.code == "ResampleExhausted" else EXIT_ORACLE
    if args.timing:
        out["wall_time"] = time.perf_counter() - t0
    for line in lines:
        print(line)
    print(_dump(out, args.pretty))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
