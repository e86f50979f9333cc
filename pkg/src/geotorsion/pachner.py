"""Relative Pachner moves 2-3, 3-2, 1-4, 4-1 and a seeded invariance fuzzer.

A move never removes a chain tetrahedron or a chain edge.  Kept tetrahedra
keep their relative order; new ones are appended.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .deformation import build_F3, build_f3
from .errors import BadDegree, ConventionViolation, DegenerateResult, MoveRejected, ResampleExhausted, TouchesChain
from .geometry import VOLUME_TOL, Geometrization, six_volume
from .torsion import invariant
from .triangulation import DistinguishedChain, Triangulation, inner_edges, perm_parity, validate_chain

JITTER_ATTEMPTS = 50


@dataclass
class MoveRecord:
    kind: str
    removed_tets: list
    added_tets: list
    new_edge: int | None = None
    removed_edge: int | None = None
    new_vertex: int | None = None
    removed_vertex: int | None = None
    I_before: float | None = None
    I_after: float | None = None
    drift: float | None = None
    minor_ratio: float | None = None
    minor_ratio_expected: float | None = None
    sizes: tuple = ()

    def to_dict(self):
        return asdict(self)


@dataclass
class MoveResult:
    tri: Triangulation
    chain: DistinguishedChain
    geo: Geometrization
    record: MoveRecord
    edge_map: dict = field(default_factory=dict)
    apexes: tuple = ()  # (M, N, P, Q, R) of a 2-3 move


def _rebuild(tri, chain, geo, removed, new_tets, outer, internal, coords=None, names=None):
    """Swap the tets in ``removed`` for ``new_tets``.

    ``outer`` maps each boundary face (old_t, old_f) of the removed region to
    a face (k, f) of new tet k; ``internal`` lists glued pairs among new tets.
    """
    removed = list(removed)
    rset = set(removed)
    kept = [t for t in range(tri.n_tets) if t not in rset]
    tmap = {t: k for k, t in enumerate(kept)}
    base = len(kept)
    outer = {a: (base + k, f) for a, (k, f) in outer.items()}

    def image(slot):
        t, f = slot
        return (tmap[t], f) if t in tmap else outer[slot]

    glue = {}
    old = tri.glue_dict()
    for t in kept:
        for f in range(4):
            glue[(tmap[t], f)] = image(old[(t, f)])
    for a, b in outer.items():
        glue[b] = image(old[a])
    for (k1, f1), (k2, f2) in internal:
        glue[(base + k1, f1)] = (base + k2, f2)
        glue[(base + k2, f2)] = (base + k1, f1)

    tets = [list(map(int, tri.tets[t])) for t in kept] + [list(x) for x in new_tets]
    coords = geo.coords if coords is None else coords
    names = list(tri.names if names is None else names)
    used = sorted({v for row in tets for v in row})
    vmap = {v: k for k, v in enumerate(used)}
    if len(used) != len(names):
        tets = [[vmap[v] for v in row] for row in tets]
        names = [names[v] for v in used]
        coords = coords[used]
    new = Triangulation(tets, glue, names)
    labels = {x: vmap[v] for x, v in chain.labels.items()}
    new_chain = validate_chain(new, tmap[chain.tet_a], tmap[chain.tet_b], labels)

    emap = {}
    for e in range(tri.n_edges):
        emap[e] = None
        for t, s in np.argwhere(tri.edge_class == e):
            t, s = int(t), int(s)
            if t in tmap:
                emap[e] = int(new.edge_class[tmap[t], s])
                break
        if emap[e] is None:
            a, b = (int(x) for x in tri.edge_ends[e])
            for (t, f), (nt, _) in outer.items():
                face = [int(v) for i, v in enumerate(tri.tets[t]) if i != f]
                if a in face and b in face:
                    emap[e] = new.edge_of(nt, vmap[a], vmap[b])
                    break
    return new, new_chain, Geometrization(coords), emap, vmap


def _guard_tets(chain, tets):
    if chain.tet_a in tets or chain.tet_b in tets:
        raise TouchesChain("move would remove a chain tetrahedron")


def _check_volumes(coords, new_tets, tol):
    for row in new_tets:
        if abs(six_volume(coords[list(row)])) <= tol:
            raise DegenerateResult(f"new tetrahedron {row} is flat")


def move_2_3(tri, chain, geo, face, tol=VOLUME_TOL) -> MoveResult:
    """MNPQ + RMNP -> MNRQ + NPRQ + PMRQ across the face (t1, f1)."""
    t1, f1 = face
    t2, f2 = int(tri.neighbor[t1, f1]), int(tri.neighbor_face[t1, f1])
    if t1 == t2:
        raise ConventionViolation("face glued to its own tetrahedron")
    _guard_tets(chain, (t1, t2))
    row = [int(v) for v in tri.tets[t1]]
    Q, R = row[f1], int(tri.tets[t2, f2])
    if Q == R:
        raise ConventionViolation("the two apexes are the same vertex class")
    M, N, P = (row[i] for i in range(4) if i != f1)
    if perm_parity([row.index(x) for x in (M, N, P, Q)]) < 0:
        M, N = N, M
    new_tets = [(M, N, R, Q), (N, P, R, Q), (P, M, R, Q)]
    _check_volumes(geo.coords, new_tets, tol)
    pos = lambda k, v: new_tets[k].index(v)  # noqa: E731
    old2 = [int(v) for v in tri.tets[t2]]
    outer = {}
    for k, opp in enumerate((P, M, N)):
        outer[(t1, row.index(opp))] = (k, pos(k, R))
        outer[(t2, old2.index(opp))] = (k, pos(k, Q))
    internal = [((0, pos(0, M)), (1, pos(1, P))),
                ((1, pos(1, N)), (2, pos(2, M))),
                ((2, pos(2, P)), (0, pos(0, N)))]
    new, nc, ngeo, emap, _ = _rebuild(tri, chain, geo, (t1, t2), new_tets, outer, internal)
    qr = new.edge_of(new.n_tets - 3, Q, R)
    rec = MoveRecord("2-3", [t1, t2], list(range(new.n_tets - 3, new.n_tets)), new_edge=qr)
    return MoveResult(new, nc, ngeo, rec, emap, (M, N, P, Q, R))


def _link(tri, tets, center):
    out = set()
    for t in tets:
        out |= {int(v) for v in tri.tets[t]}
    return out - set(center)


def move_3_2(tri, chain, geo, edge, tol=VOLUME_TOL) -> MoveResult:
    """MNRQ + NPRQ + PMRQ -> MNPQ + RMNP around the degree-3 edge QR."""
    if edge in chain.boundary_edges:
        raise TouchesChain("move would remove a chain edge")
    if tri.edge_degree[edge] != 3:
        raise BadDegree(f"edge {edge} has degree {int(tri.edge_degree[edge])}, need 3")
    star = [t for t, _ in tri.star(edge)]
    if len(set(star)) != 3:
        raise BadDegree("star of the edge repeats a tetrahedron")
    _guard_tets(chain, star)
    Q, R = (int(x) for x in tri.edge_ends[edge])
    link = _link(tri, star, (Q, R))
    if len(link) != 3:
        raise ConventionViolation("link of the edge has a repeated vertex class")
    row0 = [int(v) for v in tri.tets[star[0]]]
    M, N = (v for v in row0 if v not in (Q, R))
    if perm_parity([row0.index(x) for x in (M, N, R, Q)]) < 0:
        M, N = N, M
    (P,) = link - {M, N}
    by_pair = {frozenset(set(map(int, tri.tets[t])) - {Q, R}): t for t in star}
    tMN, tNP, tPM = (by_pair[frozenset(s)] for s in ((M, N), (N, P), (P, M)))
    new_tets = [(M, N, P, Q), (R, M, N, P)]
    _check_volumes(geo.coords, new_tets, tol)
    outer = {}
    for t, opp in ((tMN, P), (tNP, M), (tPM, N)):
        row = [int(v) for v in tri.tets[t]]
        outer[(t, row.index(R))] = (0, new_tets[0].index(opp))
        outer[(t, row.index(Q))] = (1, new_tets[1].index(opp))
    internal = [((0, 3), (1, 0))]
    new, nc, ngeo, emap, _ = _rebuild(tri, chain, geo, star, new_tets, outer, internal)
    rec = MoveRecord("3-2", sorted(star), [new.n_tets - 2, new.n_tets - 1], removed_edge=int(edge))
    return MoveResult(new, nc, ngeo, rec, emap)


def move_1_4(tri, chain, geo, tet, placement=None, rng=None, tol=VOLUME_TOL) -> MoveResult:
    """Star tet at a new inner vertex R: position k of the tet is replaced by R in new tet k."""
    _guard_tets(chain, (tet,))
    row = [int(v) for v in tri.tets[tet]]
    R = tri.n_vertices
    new_tets = [tuple(R if i == k else row[i] for i in range(4)) for k in range(4)]
    P = geo.coords[row]
    rng = np.random.default_rng(0) if rng is None else rng
    size = max(np.linalg.norm(P[i] - P[j]) for i in range(4) for j in range(i))
    for attempt in range(JITTER_ATTEMPTS):
        if placement is not None and attempt == 0:
            x = np.asarray(placement, dtype=float)
        else:
            w = rng.dirichlet(np.full(4, 4.0)) if attempt else np.full(4, 0.25)
            x = w @ P + (0.02 * size * rng.standard_normal(3) if attempt else 0.0)
        coords = np.vstack([geo.coords, x])
        try:
            _check_volumes(coords, new_tets, tol)
            break
        except DegenerateResult:
            continue
    else:
        raise ResampleExhausted("no nondegenerate placement for the new vertex")
    name = f"v{R}"
    while name in tri.names:
        name += "'"
    outer = {(tet, k): (k, k) for k in range(4)}
    internal = [((k, j), (j, k)) for k in range(4) for j in range(k + 1, 4)]
    new, nc, ngeo, emap, _ = _rebuild(tri, chain, geo, (tet,), new_tets, outer, internal,
                                      coords=coords, names=list(tri.names) + [name])
    rec = MoveRecord("1-4", [tet], list(range(new.n_tets - 4, new.n_tets)), new_vertex=R)
    return MoveResult(new, nc, ngeo, rec, emap)


def move_4_1(tri, chain, geo, vertex, tol=VOLUME_TOL) -> MoveResult:
    """Inverse of move_1_4 at an inner vertex whose star has four tetrahedra."""
    v = int(vertex)
    if v in chain.labels.values():
        raise TouchesChain("chain vertices stay")
    star = [int(t) for t in np.flatnonzero((tri.tets == v).any(axis=1))]
    if len(star) != 4:
        raise BadDegree(f"vertex {v} lies in {len(star)} tetrahedra, need 4")
    link = _link(tri, star, (v,))
    if len(link) != 4:
        raise ConventionViolation("link of the vertex is not a tetrahedron boundary")
    rows = [[int(x) for x in tri.tets[t]] for t in star]
    missing = [(link - set(r)).pop() for r in rows]
    if len(set(missing)) != 4:
        raise ConventionViolation("star is not a stellar subdivision")
    orig = [missing[0] if x == v else x for x in rows[0]]
    for r, m in zip(rows, missing):
        filled = [m if x == v else x for x in r]
        if perm_parity([orig.index(x) for x in filled]) < 0:
            raise ConventionViolation("star tetrahedra disagree on orientation")
    new_tets = [tuple(orig)]
    _check_volumes(geo.coords, new_tets, tol)
    outer = {(t, r.index(v)): (0, orig.index(m)) for t, r, m in zip(star, rows, missing)}
    new, nc, ngeo, emap, _ = _rebuild(tri, chain, geo, star, new_tets, outer, [])
    rec = MoveRecord("4-1", star, [new.n_tets - 1], removed_vertex=v)
    return MoveResult(new, nc, ngeo, rec, emap)


# ------------------------------------------------------------- candidates
def candidates(tri, chain, kind):
    ch = {chain.tet_a, chain.tet_b}
    if kind == "2-3":
        out = []
        for (t, f), (t2, f2) in tri.gluings():
            if t in ch or t2 in ch or t == t2 or tri.tets[t, f] == tri.tets[t2, f2]:
                continue
            out.append((t, f))
        return out
    if kind == "3-2":
        bound = set(chain.boundary_edges)
        return [e for e in range(tri.n_edges) if tri.edge_degree[e] == 3 and e not in bound]
    if kind == "1-4":
        return [t for t in range(tri.n_tets) if t not in ch]
    if kind == "4-1":
        lab = set(chain.labels.values())
        return [v for v in range(tri.n_vertices) if v not in lab and tri.vertex_degree(v) == 4]
    raise ValueError(kind)


def apply_move(tri, chain, geo, kind, target, rng=None) -> MoveResult:
    if kind == "2-3":
        return move_2_3(tri, chain, geo, target)
    if kind == "3-2":
        return move_3_2(tri, chain, geo, target)
    if kind == "1-4":
        return move_1_4(tri, chain, geo, target, rng=rng)
    if kind == "4-1":
        return move_4_1(tri, chain, geo, target)
    raise ValueError(kind)


def minor_ratio(before, after, B_old):
    """det f3_new[B + QR] / det f3_old[B] and the closed-form d(omega_QR)/d(l_QR)."""
    tri, chain, geo = before
    res = after
    F_old = build_F3(tri, geo)
    inner_old = inner_edges(tri, chain)
    F_new = build_F3(res.tri, res.geo)
    inner_new = inner_edges(res.tri, res.chain)
    pos_new = {e: k for k, e in enumerate(inner_new)}
    qr = res.record.new_edge
    Bn = sorted(pos_new[res.edge_map[e]] for e in B_old) + [pos_new[qr]]
    Bo = [inner_old.index(e) for e in B_old]
    f3o, f3n = build_f3(F_old, inner_old), build_f3(F_new, inner_new)
    so, lo = np.linalg.slogdet(f3o[np.ix_(Bo, Bo)]) if Bo else (1.0, 0.0)
    sn, ln = np.linalg.slogdet(f3n[np.ix_(Bn, Bn)])
    ratio = so * sn * math.exp(ln - lo)
    M, N, P, Q, R = res.apexes
    c = res.geo.coords
    V = lambda *vs: six_volume(c[list(vs)]) / 6.0  # noqa: E731
    l_qr = float(np.linalg.norm(c[Q] - c[R]))
    expected = -l_qr ** 2 / 6.0 * V(M, N, P, Q) * V(R, M, N, P) / (V(M, N, R, Q) * V(N, P, R, Q) * V(P, M, R, Q))
    return ratio, expected


def fuzz(tri, chain, geo, n_moves, seed, max_tets=None, check_minor=True, log=None):
    """Apply n_moves random relative moves, recomputing I after each.

    Returns (records, summary).  Sizes stay bounded: above ``max_tets`` only
    shrinking moves are drawn.
    """
    rng = np.random.default_rng(seed)
    rep0 = invariant(tri, chain, geo)
    if not rep0.acyclic:
        return [], {"initial_I": None, "max_drift": None, "acyclic": False, "skipped": 0}
    I0 = rep0.I
    max_tets = max_tets or tri.n_tets + 16
    state = (tri, chain, geo)
    B_cur = rep0.pivot_set
    records, skipped, max_drift, worst_minor = [], 0, 0.0, 0.0
    weights = {"2-3": 3.0, "3-2": 3.0, "1-4": 1.0, "4-1": 3.0}
    attempts = 0
    rejected = set()  # (kind, target) pairs that failed at the current state
    while len(records) < n_moves and attempts < 50 * max(n_moves, 1):
        attempts += 1
        t, c, g = state
        grow_ok = t.n_tets < max_tets
        options = {k: [x for x in candidates(t, c, k) if (k, x) not in rejected] for k in weights}
        options = {k: v for k, v in options.items() if v}
        if not grow_ok and ({"3-2", "4-1"} & set(options)):
            options = {k: v for k, v in options.items() if k in ("3-2", "4-1")}
        if not options:
            break
        kinds = sorted(options)
        w = np.array([weights[k] for k in kinds])
        kind = kinds[rng.choice(len(kinds), p=w / w.sum())]
        target = options[kind][rng.integers(len(options[kind]))]
        try:
            res = apply_move(t, c, g, kind, target, rng=rng)
        except (MoveRejected, ResampleExhausted) as exc:
            skipped += 1
            rejected.add((kind, target))
            if log:
                log(f"skip {kind} {target}: {exc.code}")
            continue
        rep = invariant(res.tri, res.chain, res.geo)
        rec = res.record
        rec.I_before, rec.I_after = I0, rep.I
        rec.sizes = (res.tri.n_tets, res.tri.n_vertices, res.tri.n_edges)
        rec.drift = abs(rep.I - I0) / abs(I0) if rep.acyclic else math.inf
        max_drift = max(max_drift, rec.drift)
        if kind == "2-3" and check_minor:
            rec.minor_ratio, rec.minor_ratio_expected = minor_ratio(state, res, B_cur)
            worst_minor = max(worst_minor, abs(rec.minor_ratio / rec.minor_ratio_expected - 1))
        records.append(rec)
        state = (res.tri, res.chain, res.geo)
        rejected.clear()
        B_cur = rep.pivot_set
    summary = {
        "initial_I": I0,
        "final_I": records[-1].I_after if records else I0,
        "max_drift": max_drift,
        "max_minor_ratio_error": worst_minor,
        "moves": len(records),
        "skipped": skipped,
        "final_sizes": state[0].n_tets,
        "acyclic": True,
    }
    return records, summary
