import numpy as np
import pytest

from _util import fan_diagonal, fd_F3, with_inner_vertices
from geotorsion.catalog import catalog_space, lens_edge_layout, lens_matrices, lens_tet_index
from geotorsion.deformation import (
    build_F3,
    build_f2,
    build_f3,
    build_f4,
    build_G3,
    chain_six_volume,
    complex_residuals,
    deformation_matrices,
)
from geotorsion.geometry import edge_lengths, random_geometrization, six_volume
from geotorsion.pachner import candidates, move_2_3
from geotorsion.triangulation import FACES, perm_parity


@pytest.fixture(scope="module")
def busy():
    """Lens space with a few inner vertices and 2-3 moves, generic coordinates."""
    tri, chain, geo = with_inner_vertices("lens:5,2,1", 12, 3)
    rng = np.random.default_rng(3)
    for _ in range(30):
        opts = candidates(tri, chain, "2-3")
        try:
            res = move_2_3(tri, chain, geo, opts[rng.integers(len(opts))])
        except Exception:
            continue
        tri, chain, geo = res.tri, res.chain, res.geo
    return tri, chain, random_geometrization(tri, 11)


def test_F3_symmetric_and_matches_finite_differences(busy):
    tri, _, geo = busy
    F = build_F3(tri, geo)
    assert np.abs(F - F.T).max() < 1e-10 * np.abs(F).max()
    assert np.abs(F - fd_F3(tri, geo)).max() < 1e-5 * np.abs(F).max()


def _pairs_in(tri, a, b):
    return sum(1 for t in range(tri.n_tets) if a in tri.edge_class[t] and b in tri.edge_class[t])


def test_skew_edges(busy):
    # one tetrahedron MNRQ holding both skew edges: -l l / (6 V_MNRQ)
    tri, _, geo = busy
    F = build_F3(tri, geo)
    X = geo.coords
    checked = 0
    for t in range(tri.n_tets):
        row = [int(v) for v in tri.tets[t]]
        for (i, j), (k, l) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
            a, b = tri.edge_of(t, row[i], row[j]), tri.edge_of(t, row[k], row[l])
            if _pairs_in(tri, a, b) != 1:
                continue
            M, N, Q, R = row[i], row[j], row[k], row[l]
            # orient as M N R Q with the triangulation's orientation
            if perm_parity([row.index(x) for x in (M, N, R, Q)]) < 0:
                Q, R = R, Q
            V = six_volume(X[[M, N, R, Q]]) / 6
            la, lb = np.linalg.norm(X[M] - X[N]), np.linalg.norm(X[Q] - X[R])
            assert F[a, b] == pytest.approx(-la * lb / (6 * V), rel=1e-9)
            checked += 1
    assert checked > 20


def test_shared_face_pair(busy):
    # edges MN, MP of the common face of MNPQ and RMNP
    tri, _, geo = busy
    F = build_F3(tri, geo)
    X = geo.coords
    V = lambda *v: six_volume(X[list(v)]) / 6  # noqa: E731
    checked = 0
    for (t1, f1), (t2, f2) in tri.gluings():
        row = [int(v) for v in tri.tets[t1]]
        Q, R = row[f1], int(tri.tets[t2, f2])
        if Q == R:
            continue
        M, N, P = (row[i] for i in FACES[f1])
        if perm_parity([row.index(x) for x in (M, N, P, Q)]) < 0:
            M, N = N, M
        for m, n, p in ((M, N, P), (N, P, M), (P, M, N)):
            a, b = tri.edge_of(t1, m, n), tri.edge_of(t1, m, p)
            if _pairs_in(tri, a, b) != 2:
                continue
            l_a, l_b = np.linalg.norm(X[m] - X[n]), np.linalg.norm(X[m] - X[p])
            want = l_a * l_b / 6 * V(n, p, R, Q) / (V(m, n, p, Q) * V(R, m, n, p))
            assert F[a, b] == pytest.approx(want, rel=1e-8)
            checked += 1
    assert checked > 20


def test_diagonal_fan_formula(busy):
    tri, _, geo = busy
    F = build_F3(tri, geo)
    degrees = set()
    for e in range(tri.n_edges):
        want = fan_diagonal(tri, geo, e)
        if want is None:
            continue
        assert F[e, e] == pytest.approx(want, rel=1e-8)
        degrees.add(int(tri.edge_degree[e]))
    assert 3 in degrees and max(degrees) >= 4


def test_build_f3_edge_cases():
    F = np.arange(16.0).reshape(4, 4)
    assert np.array_equal(build_f3(F, [0, 1, 2, 3]), F)
    assert build_f3(F, []).shape == (0, 0)


@pytest.mark.parametrize("p,q", [(2, 1), (5, 2), (7, 3), (8, 3)])
def test_lens_G3_blocks(p, q):
    space = catalog_space(f"lens:{p},{q},1")
    tri, chain, geo = space.tri, space.chain, space.geo
    L = edge_lengths(tri, geo)
    G = build_G3(build_F3(tri, geo, L), L, chain_six_volume(geo, chain))
    order = lens_edge_layout(tri, p)
    assert sorted(order) == list(range(tri.n_edges))
    H = G[np.ix_(order, order)]
    S1, S2, S3 = lens_matrices(p, q)
    W = np.zeros_like(H)
    W[:p, p:2 * p], W[p:2 * p, :p] = S1, S1.T
    W[2 * p:3 * p, 3 * p:4 * p], W[3 * p:4 * p, 2 * p:3 * p] = S2, S2.T
    W[4 * p:4 * p + 2, 4 * p + 2:], W[4 * p + 2:, 4 * p:4 * p + 2] = S3, S3.T
    assert np.abs(H - W).max() < 1e-12


def test_lens_pair_entry_is_one():
    # every upper B tetrahedron is ordered BACD; its (AB, CD) entry of G3 is 1
    p = 7
    space = catalog_space(f"lens:{p},1,1")
    tri, chain, geo = space.tri, space.chain, space.geo
    L = edge_lengths(tri, geo)
    G = build_G3(build_F3(tri, geo, L), L, chain_six_volume(geo, chain))
    for i in range(p):
        t = lens_tet_index(p, "U", "B", i)
        assert tri.parity(t, chain.labels) == -1
        ab, cd = chain.pair_edges(tri, t, ("AB", "CD"))
        assert G[ab, cd] == pytest.approx(1.0, abs=1e-12)


def test_lens_has_no_f2():
    space = catalog_space("lens:5,2,1")
    m = deformation_matrices(space.tri, space.chain, space.geo)
    assert m.f2.shape == (14, 0)
    assert m.f4.shape == (0, 14)
    assert m.f3.shape == (14, 14)


def test_f2_rows():
    tri, chain, geo = with_inner_vertices("s3-unknot", 2, 0)
    f2 = build_f2(tri, chain, geo)
    m = deformation_matrices(tri, chain, geo)
    chain_vs = set(chain.labels.values())
    X = geo.coords
    for r, e in enumerate(m.inner_edges):
        a, b = (int(x) for x in tri.edge_ends[e])
        if a in chain_vs and b in chain_vs:
            assert not f2[r].any()
            continue
        u = (X[b] - X[a]) / np.linalg.norm(X[b] - X[a])
        if a not in chain_vs:
            c = m.col_index[a]
            assert np.allclose(f2[r, c:c + 3], -u)
        assert np.count_nonzero(np.abs(f2[r]) > 0) <= 6


def test_f2_unit_vector_example():
    # M = (0,0,0) inner, N = (1,0,0) a chain vertex -> row (-1, 0, 0) at M
    tri, chain, _ = with_inner_vertices("s3-unknot", 1, 0)
    M, N = tri.n_vertices - 1, chain.labels["A"]
    geo = random_geometrization(tri, 4, fixed={M: (0, 0, 0), N: (1, 0, 0)})
    m = deformation_matrices(tri, chain, geo)
    e = next(e for e in m.inner_edges if set(tri.edge_ends[e]) == {M, N})
    row = m.f2[m.row_index[e]]
    c = m.col_index[M]
    assert np.allclose(row[c:c + 3], [-1.0, 0, 0], atol=1e-15)
    assert np.count_nonzero(row) == 1


@pytest.mark.parametrize("ident,stars", [("s3-unknot", 3), ("lens:5,2,3", 4), ("lens:7,1,1", 2)])
def test_complex_identities(ident, stars):
    tri, chain, geo = with_inner_vertices(ident, stars, 7)
    m = deformation_matrices(tri, chain, geo)
    assert m.f2.shape[1] == 3 * stars
    res = complex_residuals(m)
    assert max(res.values()) < 1e-9
    assert np.abs(build_f4(tri, chain, geo) + build_f2(tri, chain, geo).T).max() < 1e-12


def test_f4_block_support():
    tri, chain, geo = with_inner_vertices("lens:5,2,1", 1, 2)
    f4 = build_f4(tri, chain, geo)
    v = tri.n_vertices - 1
    degree = int(np.count_nonzero((tri.edge_ends == v).any(axis=1)))
    assert np.count_nonzero(np.abs(f4[0:3]).sum(axis=0)) <= degree
