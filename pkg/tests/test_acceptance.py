"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that conftest prints in the terminal summary.
Expected values come from exact integer arithmetic, never from the code under test.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from geotorsion.catalog import brute_det_oracle, catalog_space, oracle_suite
from geotorsion.deformation import build_F3, complex_residuals, deformation_matrices
from geotorsion.framing import framed_space, invariant_with_framing
from geotorsion.geometry import TetGeometry, random_geometrization
from geotorsion.pachner import candidates, fuzz, move_1_4
from geotorsion.torsion import invariant

from _util import CATALOG, rel, scaled_F3_error, with_inner_vertices
from conftest import VERDICTS

HALF_STEPS = (0, 1, 2, 3, 4)  # r = 0, 1/2, 1, 3/2, 2


def _record(k, ok, detail):
    VERDICTS[k] = f"{'PASS' if ok else 'FAIL'} ({detail})"
    return ok


def _lens_expected(p, q, n, h):
    """-(-1)^h / (s^2 t^2 p^2) from exact reduced-matrix determinants; inf if singular."""
    s, t = brute_det_oracle(p, q, n, h)
    sign = -1 if h % 2 == 0 else 1
    return sign * math.inf if s * t == 0 else Fraction(sign, s * s * t * t * p * p)


def _lens_cases():
    for p in range(2, 10):
        for q in range(1, p):
            if math.gcd(p, q) == 1:
                for n in range(1, p):
                    yield p, q, n


# ---------------------------------------------------------------- 1
def test_criterion_1_s3_unknot_family():
    t0 = time.perf_counter()
    want = {Fraction(m): Fraction(1, m ** 4) for m in (1, 2, 3)}
    want.update({Fraction(2 * m + 1, 2): Fraction(-1, m * m * (m + 1) ** 2) for m in (1, 2)})
    space = catalog_space("s3-unknot")
    worst = 0.0
    for r, exact in want.items():
        rep = invariant_with_framing(space, r)
        assert rep.acyclic
        worst = max(worst, rel(rep.I, float(exact)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-7 and elapsed < 5
    _record(1, ok, f"max rel err {worst:.1e}, {elapsed:.2f} s")
    assert ok


# ---------------------------------------------------------------- 2
def test_criterion_2_lens_closed_forms():
    t0 = time.perf_counter()
    worst, n_cases, n_singular, bad = 0.0, 0, 0, []
    for p, q, n in _lens_cases():
        space = catalog_space(f"lens:{p},{q},{n}")
        for h in HALF_STEPS:
            exact = _lens_expected(p, q, n, h)
            rep = invariant_with_framing(space, Fraction(h, 2))
            n_cases += 1
            if isinstance(exact, float):
                n_singular += 1
                if rep.acyclic:
                    bad.append((p, q, n, h))
                continue
            if not rep.acyclic:
                bad.append((p, q, n, h))
                continue
            worst = max(worst, rel(rep.I, float(exact)))
    elapsed = time.perf_counter() - t0
    ok = not bad and worst <= 1e-7 and elapsed < 60
    _record(2, ok, f"{n_cases} cases, {n_singular} non-acyclic, max rel err {worst:.1e}, {elapsed:.1f} s")
    assert not bad, bad[:5]
    assert ok


# ---------------------------------------------------------------- 3
def test_criterion_3_exact_oracles():
    res = oracle_suite(30, adj_max=20)
    ok = not res["failures"]
    _record(3, ok, f"{res['cases']} (p,q,n) cases up to p=30, {len(res['failures'])} failures")
    assert ok, res["failures"][:5]


# ---------------------------------------------------------------- 4
def test_criterion_4_pachner_invariance():
    s3 = catalog_space("s3-unknot")
    lens = catalog_space("lens:5,2,1")
    runs = {
        "s3-unknot r=1": (*framed_space(s3, 1), s3.geo),
        "lens:5,2,1": (lens.tri, lens.chain, lens.geo),
    }
    worst_drift, worst_minor, parts = 0.0, 0.0, []
    for name, (tri, chain, geo) in runs.items():
        records, summary = fuzz(tri, chain, geo, 100, seed=7)
        assert summary["acyclic"] and summary["moves"] == 100, name
        n23 = sum(r.kind == "2-3" for r in records)
        assert n23 > 0
        worst_drift = max(worst_drift, summary["max_drift"])
        worst_minor = max(worst_minor, summary["max_minor_ratio_error"])
        parts.append(f"{name}: {n23} 2-3 moves")
    ok = worst_drift <= 1e-6 and worst_minor <= 1e-8
    _record(4, ok, f"drift {worst_drift:.1e}, minor ratio {worst_minor:.1e}; " + ", ".join(parts))
    assert ok


# ---------------------------------------------------------------- 5
def test_criterion_5_complex_identities():
    worst_res, worst_fd, runs = 0.0, 0.0, 0
    for ident in CATALOG:
        for seed in range(20):
            tri, chain, geo = with_inner_vertices(ident, 2, seed)
            m = deformation_matrices(tri, chain, geo, build_F3(tri, geo))
            worst_res = max(worst_res, max(complex_residuals(m).values()))
            worst_fd = max(worst_fd, scaled_F3_error(tri, geo))
            runs += 1
    ok = worst_res <= 1e-9 and worst_fd <= 1e-5
    _record(5, ok, f"{runs} geometrizations, residual {worst_res:.1e}, F3 vs finite differences {worst_fd:.1e}")
    assert ok


# ---------------------------------------------------------------- 6
def _starred(tri, chain, geo, n_stars, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n_stars):
        opts = candidates(tri, chain, "1-4")
        res = move_1_4(tri, chain, geo, opts[rng.integers(len(opts))], rng=rng)
        tri, chain, geo = res.tri, res.chain, res.geo
    return tri, chain


def _spread(values):
    v = np.asarray(values)
    return float((v.max() - v.min()) / abs(v.mean()))


def test_criterion_6_geometrization_independence():
    setups = [("s3-unknot", Fraction(1)), ("s3-unknot", Fraction(3, 2))]
    setups += [(ident, Fraction(0)) for ident in CATALOG[1:]]
    worst_pinned = worst_free = 0.0
    for ident, r in setups:
        space = catalog_space(ident)
        tri, chain = framed_space(space, r)
        tri, chain = _starred(tri, chain, space.geo, 2, seed=0)
        abcd = {chain.labels[x]: tuple(space.geo.coords[chain.labels[x]]) for x in "ABCD"}
        pinned, free = [], []
        for seed in range(20):
            for out, fixed in ((pinned, abcd), (free, None)):
                rep = invariant(tri, chain, random_geometrization(tri, seed, fixed=fixed))
                assert rep.acyclic, (ident, r, seed)
                out.append(rep.I)
        worst_pinned = max(worst_pinned, _spread(pinned))
        worst_free = max(worst_free, _spread(free + pinned))
    ok = worst_pinned <= 1e-7 and worst_free <= 1e-7
    _record(6, ok, f"spread with A-D pinned {worst_pinned:.1e}, with A-D moving {worst_free:.1e}")
    assert ok


# ---------------------------------------------------------------- 7
def _l71_table():
    return {(n, h): _lens_expected(7, 1, n, h) for n in range(1, 7) for h in HALF_STEPS}


def test_criterion_7_pipeline_matches_exact_table():
    worst = 0.0
    for (n, h), exact in _l71_table().items():
        rep = invariant_with_framing(f"lens:7,1,{n}", Fraction(h, 2))
        assert rep.acyclic
        worst = max(worst, rel(rep.I, float(exact)))
    assert worst <= 1e-7


def test_criterion_7_distinct_up_to_orientation_reversal():
    table = _l71_table()
    # unknots n and 7-n are the same curve traversed backwards
    for (n, h), v in table.items():
        assert table[(7 - n, h)] == v
    reps = [v for (n, h), v in table.items() if n <= 3]
    assert len(set(reps)) == len(reps) == 15


@pytest.mark.xfail(strict=True, reason="n and 7-n give identical exact values; see README")
def test_criterion_7_literal_pairwise_distinct():
    values = list(_l71_table().values())
    distinct = len(set(values))
    _record(7, distinct == len(values),
            f"{distinct} of {len(values)} exact values distinct; every coincidence pairs n with 7-n, "
            "the 15 classes n=1..3 are pairwise distinct and the pipeline matches them")
    assert distinct == len(values)


# ---------------------------------------------------------------- 8
def test_criterion_8_schlafli():
    rng = np.random.default_rng(8)
    worst, done = 0.0, 0
    while done < 100:
        tg = TetGeometry.from_points(rng.normal(size=(4, 3)))
        if abs(tg.six_v) < 1e-3:
            continue
        grad = tg.gradient()
        worst = max(worst, float(np.abs(tg.lengths @ grad).max() / np.abs(grad).max()))
        done += 1
    ok = worst <= 1e-9
    _record(8, ok, f"100 tetrahedra, max scaled residual {worst:.1e}")
    assert ok
