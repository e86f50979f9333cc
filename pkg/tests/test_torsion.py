import json
import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _util import rel, with_inner_vertices
from geotorsion.catalog import catalog_space
from geotorsion.deformation import deformation_matrices
from geotorsion.errors import RankDeficit, SingularF2Minor
from geotorsion.torsion import invariant, select_pivot_set, torsion


def test_pivot_diagonal():
    assert select_pivot_set(np.diag([5.0, 0.0, 3.0]), 2) == [0, 2]


def test_pivot_zero_matrix():
    with pytest.raises(RankDeficit):
        select_pivot_set(np.zeros((3, 3)), 1)


def test_pivot_needs_two_by_two():
    # zero diagonal: only a 2x2 pivot makes progress
    A = np.array([[0.0, 2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    assert select_pivot_set(A, 2) == [0, 1]
    with pytest.raises(RankDeficit):
        select_pivot_set(A, 3)


def test_pivot_target_zero():
    assert select_pivot_set(np.zeros((0, 0)), 0) == []


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.integers(1, 9), st.integers(0, 2 ** 31 - 1))
def test_pivot_low_rank(n, k, seed):
    k = min(k, n)
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(n, k))
    A = U @ np.diag(rng.choice([-1.0, 1.0], size=k)) @ U.T
    B = select_pivot_set(A, k)
    assert len(B) == k
    s = np.linalg.svd(A[np.ix_(B, B)], compute_uv=False)
    assert s[-1] > 1e-9 * s[0]
    if k < n:
        with pytest.raises(RankDeficit):
            select_pivot_set(A, k + 1)


def test_lens_711_uses_every_inner_edge():
    space = catalog_space("lens:7,1,1")
    m = deformation_matrices(space.tri, space.chain, space.geo)
    B = select_pivot_set(m.f3, 22)
    assert B == list(range(22))
    assert abs(np.linalg.det(m.f3)) > 0


def test_torsion_without_inner_vertices():
    space = catalog_space("lens:5,2,3")
    m = deformation_matrices(space.tri, space.chain, space.geo)
    B = list(range(m.f3.shape[0]))
    tr = torsion(m.f2, m.f3, B)
    assert tr.tau == pytest.approx(1 / np.linalg.det(m.f3), rel=1e-10)


def test_torsion_independent_of_pivot_set():
    tri, chain, geo = with_inner_vertices("lens:3,1,1", 1, 4)
    m = deformation_matrices(tri, chain, geo)
    n, k = m.f3.shape[0], m.f3.shape[0] - m.f2.shape[1]
    taus = []
    for B in map(list, combinations(range(n), k)):
        sv = np.linalg.svd(m.f3[np.ix_(B, B)], compute_uv=False)
        if sv[-1] < 1e-6 * sv[0]:
            continue
        try:
            taus.append(torsion(m.f2, m.f3, B).tau)
        except SingularF2Minor:
            continue
    assert len(taus) > 3
    assert max(rel(t, taus[0]) for t in taus) < 1e-7


def test_torsion_rejects_wrong_complement():
    tri, chain, geo = with_inner_vertices("s3-unknot", 1, 0)
    m = deformation_matrices(tri, chain, geo)
    with pytest.raises(SingularF2Minor):
        torsion(m.f2, m.f3, [0])


def test_invariant_lens_711():
    rep = invariant(*_space("lens:7,1,1"))
    assert rep.acyclic
    assert rep.I == pytest.approx(-1 / 1764, rel=1e-9)
    assert rep.n_inner_edges == 22 and rep.n_inner_vertices == 0


def test_invariant_reports_non_acyclic():
    rep = invariant(*_space("s3-unknot"))
    assert not rep.acyclic and rep.I is None
    assert "RankDeficit" in rep.diagnostics["reason"]
    json.dumps(rep.to_dict())


def test_invariant_with_inner_vertices_matches():
    base = invariant(*_space("lens:5,2,3")).I
    for seed in range(3):
        rep = invariant(*with_inner_vertices("lens:5,2,3", 3, seed))
        assert rep.n_inner_vertices == 3
        assert rel(rep.I, base) < 1e-7


def test_invariant_log_form_consistent():
    rep = invariant(*_space("lens:9,2,4"))
    assert rep.sign * math.exp(rep.log_abs) == pytest.approx(rep.I, rel=1e-12)


def _space(ident):
    s = catalog_space(ident)
    return s.tri, s.chain, s.geo
