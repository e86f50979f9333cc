"""Half-revolution framing changes, on the triangulation and on the matrix G3.

One half-revolution replaces the innermost chain tetrahedron X by a sandwich
F, I, K: F and K carry X's orientation, I (X turned inside out) the opposite
one.  I is glued to K along the two faces through the edge P1 and to F along
the two faces through P2, where (P1, P2) is the active pair (AB, CD) or
(AC, BD).  F's other faces take over X's neighbours through P1, K's those
through P2.  The new chain is (untouched partner, I).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .catalog import CatalogSpace, _half_steps, catalog_space
from .deformation import build_F3, build_G3, chain_six_volume
from .errors import IndexClash, InvalidSpec, RankDeficit
from .geometry import edge_lengths
from .torsion import InvariantReport, invariant, select_pivot_set
from .triangulation import Triangulation, validate_chain

PAIRS = (("AB", "CD"), ("AC", "BD"))


@dataclass
class FramingState:
    """Framing offset r in full revolutions relative to the starting chain."""

    offset: Fraction = Fraction(0)
    eps_history: list = field(default_factory=list)
    next_pair: tuple = PAIRS[0]


def active_pair(tri, chain, direction=1):
    """Pair used by the next half-revolution.

    Forward steps start with (AB, CD) on the catalog chains, whose innermost
    tetrahedron is odd, and alternate with the innermost parity.
    """
    odd = tri.parity(chain.tet_b, chain.labels) == -1
    forward = PAIRS[0] if odd else PAIRS[1]
    if direction > 0:
        return forward
    return PAIRS[1] if forward == PAIRS[0] else PAIRS[0]


def epsilon(tri, chain) -> int:
    """Sign of the next update: +1 when the innermost tetrahedron is odd."""
    return -tri.parity(chain.tet_b, chain.labels)


def change_framing_matrix(G3, row_p1, row_p2, eps):
    """Grow G3 by the two new edges of a half-revolution.

    The pair entry drops by eps; new row n (the copy of P1) pairs with P2 and
    new row n + 1 (the copy of P2) pairs with P1, both with value eps; the
    two new rows pair with each other with -eps.
    """
    n = G3.shape[0]
    if row_p1 == row_p2 or not (0 <= row_p1 < n and 0 <= row_p2 < n):
        raise IndexClash(f"bad pair rows {row_p1}, {row_p2} for size {n}")
    G = np.zeros((n + 2, n + 2))
    G[:n, :n] = G3
    G[row_p1, row_p2] -= eps
    G[row_p2, row_p1] -= eps
    G[row_p2, n] = G[n, row_p2] = eps
    G[row_p1, n + 1] = G[n + 1, row_p1] = eps
    G[n, n + 1] = G[n + 1, n] = -eps
    return G


def change_framing_triangulation(tri, chain, geo=None, direction=1):
    """Insert the sandwich.  Returns (tri', chain', geo, info).

    ``info`` records the pair, eps, and where old edge classes went
    (``edge_map``) along with the two new classes ("p1", "p2").
    """
    L = chain.labels
    pair = active_pair(tri, chain, direction)
    eps = epsilon(tri, chain)
    X = chain.tet_b
    tets = [list(map(int, r)) for r in tri.tets]
    glue = tri.glue_dict()
    oX = tets[X]
    oI = [oX[1], oX[0]] + oX[2:]
    F, I, K = X, len(tets), len(tets) + 1
    tets += [oI, list(oX)]
    old = {v: glue[(X, oX.index(v))] for v in oX}
    for v in oX:
        del glue[(X, oX.index(v))]

    def link(t1, v, t2):
        a, b = (t1, tets[t1].index(v)), (t2, tets[t2].index(v))
        glue[a], glue[b] = b, a

    def reattach(t, v):
        a, b = (t, tets[t].index(v)), old[v]
        glue[a], glue[b] = b, a

    p1 = {L[x] for x in pair[0]}
    p2 = {L[x] for x in pair[1]}
    off1 = [v for v in oX if v not in p1]  # faces through P1 are opposite these
    off2 = [v for v in oX if v not in p2]
    for v in off1:
        link(K, v, I)
        reattach(F, v)
    for v in off2:
        link(F, v, I)
        reattach(K, v)
    new = Triangulation(tets, glue, tri.names)
    new_chain = validate_chain(new, chain.tet_a, I, L)

    emap = {}
    for e in range(tri.n_edges):
        t, s = next((int(t), int(s)) for t, s in np.argwhere(tri.edge_class == e) if t != X)
        emap[e] = int(new.edge_class[t, s])
    a, b = (L[x] for x in pair[0])
    c, d = (L[x] for x in pair[1])
    info = {
        "pair": pair,
        "eps": eps,
        "edge_map": emap,
        "p1": new.edge_of(I, a, b),
        "p2": new.edge_of(I, c, d),
        "old_p1": tri.edge_of(X, a, b),
        "old_p2": tri.edge_of(X, c, d),
    }
    return new, new_chain, geo, info


def _steps(space: CatalogSpace, r):
    h = _half_steps(Fraction(r) - space.base_framing)
    return abs(h), (1 if h >= 0 else -1)


def framed_space(space: CatalogSpace, r):
    """(tri, chain) of a catalog space at framing r via repeated sandwiches."""
    n, direction = _steps(space, r)
    tri, chain = space.tri, space.chain
    for _ in range(n):
        tri, chain, _, _ = change_framing_triangulation(tri, chain, direction=direction)
    return tri, chain


def _matrix_path(space: CatalogSpace, r):
    """I from G3 updates alone; valid when every tetrahedron sits on A, B, C, D."""
    n, direction = _steps(space, r)
    tri, chain, geo = space.tri, space.chain, space.geo
    lengths = edge_lengths(tri, geo)
    G = build_G3(build_F3(tri, geo, lengths), lengths, chain_six_volume(geo, chain))
    L = chain.labels
    fixed = list(chain.boundary_edges[:2]) + [tri.edge_of(chain.tet_a, L[x], L[y]) for x, y in ("AB", "CD", "AC", "BD")]
    inner_rows = {pq: tri.edge_of(chain.tet_b, L[pq[0]], L[pq[1]]) for pq in ("AB", "CD", "AC", "BD")}
    parity = tri.parity(chain.tet_b, L)
    sign = 1
    for t in range(tri.n_tets):
        if t not in (chain.tet_a, chain.tet_b):
            sign *= tri.parity(t, L)
    for _ in range(n):
        odd = parity == -1
        pair = PAIRS[0] if odd == (direction > 0) else PAIRS[1]
        eps = -parity
        size = G.shape[0]
        G = change_framing_matrix(G, inner_rows[pair[0]], inner_rows[pair[1]], eps)
        inner_rows[pair[0]], inner_rows[pair[1]] = size, size + 1
        parity = -parity
    skip = set(fixed) | set(inner_rows.values())
    keep = [k for k in range(G.shape[0]) if k not in skip]
    g3 = G[np.ix_(keep, keep)]
    try:
        select_pivot_set(g3, len(keep), scale=float(np.abs(G).max()))
    except RankDeficit as exc:
        return InvariantReport(acyclic=False, I=None, diagnostics={"reason": str(exc), "path": "matrix"})
    s, ld = np.linalg.slogdet(g3)
    return InvariantReport(acyclic=True, I=sign * s * math.exp(-ld), sign=sign * s, log_abs=-ld,
                           diagnostics={"path": "matrix"})


def invariant_with_framing(base, r, via="triangulation") -> InvariantReport:
    """Invariant of a catalog space at framing r (absolute for S^3, relative for lens spaces)."""
    space = catalog_space(base) if isinstance(base, str) else base
    if via == "matrix":
        rep = _matrix_path(space, r)
    elif via == "triangulation":
        tri, chain = framed_space(space, r)
        rep = invariant(tri, chain, space.geo)
    else:
        raise InvalidSpec(f"unknown path {via!r}")
    rep.framing_offset = float(r)
    return rep
