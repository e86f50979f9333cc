"""Glued triangulations of closed oriented 3-manifolds, plus the framed-knot chain.

A tetrahedron is an ordered 4-tuple of vertex classes; the order is its
orientation.  Face ``f`` is the face opposite position ``f``.  Every
tetrahedron has four distinct vertex classes, so a face gluing is fixed by
the classes alone: it matches equal classes.  Edge classes are orbits of the
six edge slots per tetrahedron and are numbered by their minimal slot
``6 * tet + slot``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._kernels import EDGES, _slot
from .errors import (
    DegenerateTet,
    GluingMismatch,
    InputError,
    NonManifoldEdge,
    NonManifoldVertex,
    NotAChain,
    NotClosed,
    NotFound,
    OrientationClash,
    SharedEdgeCollision,
)

FACES = tuple(tuple(i for i in range(4) if i != f) for f in range(4))
LABELS = "ABCD"
SAME = "SameOrientation"
OPPOSITE = "OppositeOrientation"


def perm_parity(seq) -> int:
    """+1 for an even arrangement of distinct comparable items, -1 for odd."""
    seq = list(seq)
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            # smaller root wins, so roots are minimal slots
            if a < b:
                self.parent[b] = a
            else:
                self.parent[a] = b


def _reverses_orientation(f, f2, mapping) -> bool:
    # induced boundary orientation of face f is (-1)^f times its sorted positions
    target = FACES[f2]
    sigma = [target.index(m) for m in mapping]
    return (-1) ** f * (-1) ** f2 * perm_parity(sigma) == -1


class Triangulation:
    """Validated closed oriented triangulation. Treat as immutable.

    ``tets`` are 4-tuples of vertex class ids ``0..N0-1``; ``glue`` maps every
    face slot ``(t, f)`` to its partner slot.
    """

    def __init__(self, tets, glue, names=None):
        tets = np.array(tets, dtype=np.int64).reshape(-1, 4)
        T = len(tets)
        if T == 0:
            raise InputError("empty triangulation")
        for t in range(T):
            if len(set(tets[t])) != 4:
                raise DegenerateTet(f"tetrahedron {t} repeats a vertex class: {tets[t].tolist()}")
        n0 = int(tets.max()) + 1
        if set(np.unique(tets).tolist()) != set(range(n0)):
            raise InputError("vertex class ids must be 0..N0-1 without gaps")

        nb = np.full((T, 4), -1, dtype=np.int64)
        nf = np.full((T, 4), -1, dtype=np.int64)
        for t in range(T):
            for f in range(4):
                if (t, f) not in glue:
                    raise NotClosed(f"face {f} of tetrahedron {t} is not glued")
                t2, f2 = glue[(t, f)]
                if not (0 <= t2 < T and 0 <= f2 < 4) or (t2, f2) == (t, f):
                    raise NotClosed(f"bad partner for face ({t}, {f})")
                if tuple(glue.get((t2, f2), ())) != (t, f):
                    raise NotClosed(f"gluing at ({t}, {f}) is not an involution")
                nb[t, f], nf[t, f] = t2, f2
        self.tets = tets
        self.neighbor = nb
        self.neighbor_face = nf
        self.n_vertices = n0
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(n0))
        if len(self.names) != n0 or len(set(self.names)) != n0:
            raise InputError("vertex names must be unique, one per class")

        for t in range(T):
            for f in range(4):
                m = self.gluing_map(t, f)
                if not _reverses_orientation(f, int(nf[t, f]), m):
                    raise OrientationClash(f"gluing ({t}, {f}) preserves face orientation")

        uf = _UnionFind(6 * T)
        for t in range(T):
            for f in range(4):
                t2 = int(nb[t, f])
                m = dict(zip(FACES[f], self.gluing_map(t, f)))
                for i, j in ((0, 1), (0, 2), (1, 2)):
                    a, b = FACES[f][i], FACES[f][j]
                    uf.union(6 * t + _slot(a, b), 6 * t2 + _slot(m[a], m[b]))
        roots = [uf.find(x) for x in range(6 * T)]
        order = {r: k for k, r in enumerate(sorted(set(roots)))}
        self.edge_class = np.array([order[r] for r in roots], dtype=np.int64).reshape(T, 6)
        self.n_edges = len(order)
        ends = np.zeros((self.n_edges, 2), dtype=np.int64)
        for r, k in order.items():
            t, s = divmod(r, 6)
            i, j = EDGES[s]
            ends[k] = tets[t, i], tets[t, j]
        self.edge_ends = ends
        self.edge_degree = np.bincount(self.edge_class.ravel(), minlength=self.n_edges)
        self._check_links()
        for arr in (self.tets, self.neighbor, self.neighbor_face, self.edge_class, self.edge_ends):
            arr.setflags(write=False)

    # -- basic queries -------------------------------------------------
    @property
    def n_tets(self) -> int:
        return len(self.tets)

    def gluing_map(self, t, f):
        """Positions on the partner face matched to FACES[f] of tet t, in order."""
        t2 = int(self.neighbor[t, f])
        row = self.tets[t2].tolist()
        try:
            m = tuple(row.index(int(self.tets[t, p])) for p in FACES[f])
        except ValueError:
            raise GluingMismatch(f"face ({t}, {f}) glued to a face with other vertex classes") from None
        if int(self.neighbor_face[t, f]) in m:
            raise GluingMismatch(f"face ({t}, {f}) glued to a face with other vertex classes")
        return m

    def edge_of(self, t, x, y) -> int:
        """Edge class of tet t joining vertex classes x and y."""
        row = self.tets[t].tolist()
        return int(self.edge_class[t, _slot(row.index(x), row.index(y))])

    def vertex_index(self, name) -> int:
        try:
            return self.names.index(str(name))
        except ValueError:
            raise InputError(f"unknown vertex {name!r}") from None

    def vertex_degree(self, v) -> int:
        return int(np.count_nonzero(self.tets == v))

    def gluings(self):
        """Each gluing once, as ((t, f), (t2, f2)) with (t, f) the smaller slot."""
        for t in range(self.n_tets):
            for f in range(4):
                t2, f2 = int(self.neighbor[t, f]), int(self.neighbor_face[t, f])
                if (t, f) < (t2, f2):
                    yield (t, f), (t2, f2)

    def glue_dict(self):
        return {(t, f): (int(self.neighbor[t, f]), int(self.neighbor_face[t, f]))
                for t in range(self.n_tets) for f in range(4)}

    def parity(self, t, labels) -> int:
        """Orientation of tet t relative to the label order A, B, C, D."""
        inv = {v: k for k, v in labels.items()}
        return perm_parity([inv[int(v)] for v in self.tets[t]])

    # -- stars and links -----------------------------------------------
    def star(self, e):
        """Cyclic sequence of (tet, edge-slot) around edge class e."""
        slots = np.argwhere(self.edge_class == e)
        if len(slots) == 0:
            raise InputError(f"no edge class {e}")
        t, s = (int(x) for x in slots[0])
        i, j = EDGES[s]
        k, _ = [v for v in range(4) if v not in (i, j)]
        start = (t, s)
        out = []
        # enter through the face containing i, j, k; leave through the one with i, j, l
        while True:
            out.append((t, s))
            l = 6 - i - j - k
            f = k  # face opposite k contains i, j, l
            t2, f2 = int(self.neighbor[t, f]), int(self.neighbor_face[t, f])
            m = dict(zip(FACES[f], self.gluing_map(t, f)))
            i, j, k = m[i], m[j], m[l]
            t = t2
            s = _slot(i, j)
            if (t, s) == start:
                break
            if len(out) > 6 * self.n_tets:
                raise NonManifoldEdge(f"edge {e} has no closed star")
        return out

    def _check_links(self):
        for e in range(self.n_edges):
            if len(self.star(e)) != self.edge_degree[e]:
                raise NonManifoldEdge(f"link of edge {e} is not a single cycle")
        T = self.n_tets
        for v in range(self.n_vertices):
            n_tri = self.vertex_degree(v)
            n_vert = int(np.count_nonzero((self.edge_ends == v).any(axis=1)))
            face_slots = 0
            for t in range(T):
                row = self.tets[t].tolist()
                if v in row:
                    face_slots += 3  # v lies on the three faces not opposite it
            chi = n_vert - face_slots // 2 + n_tri
            if chi != 2:
                raise NonManifoldVertex(f"link of vertex {self.names[v]} has Euler characteristic {chi}")

    # -- serialisation -------------------------------------------------
    def to_dict(self, chain=None) -> dict:
        d = {
            "tets": [[self.names[int(v)] for v in row] for row in self.tets],
            "gluings": [
                {"from": [a[0], a[1]], "to": [b[0], b[1]], "map": list(self.gluing_map(*a))}
                for a, b in self.gluings()
            ],
        }
        if chain is not None:
            d["chain"] = {
                "tets": [chain.tet_a, chain.tet_b],
                "labels": {k: self.names[v] for k, v in chain.labels.items()},
            }
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def __repr__(self):
        return f"Triangulation(T={self.n_tets}, N0={self.n_vertices}, N1={self.n_edges})"


def build_from_gluings(tets, gluings, names=None) -> Triangulation:
    """Build from arbitrary vertex labels and explicit face maps.

    ``gluings`` holds ((t, f), (t2, f2), map) entries, each unordered pair once.
    Equal labels denote the same vertex; the maps add further identifications.
    """
    T = len(tets)
    tets = [list(row) for row in tets]
    if any(len(row) != 4 for row in tets):
        raise InputError("every tetrahedron needs four vertices")
    glue, maps = {}, {}
    for entry in gluings:
        (t, f), (t2, f2), m = entry
        t, f, t2, f2 = int(t), int(f), int(t2), int(f2)
        m = tuple(int(x) for x in m)
        if not (0 <= t < T and 0 <= t2 < T and 0 <= f < 4 and 0 <= f2 < 4):
            raise InputError(f"gluing refers to a missing face: {entry}")
        if sorted(m) != list(FACES[f2]):
            raise InputError(f"map {list(m)} does not land on face {f2}")
        for a in ((t, f), (t2, f2)):
            if a in glue:
                raise NotClosed(f"face {a} glued twice")
        if (t, f) == (t2, f2):
            raise NotClosed(f"face {(t, f)} glued to itself")
        glue[(t, f)], glue[(t2, f2)] = (t2, f2), (t, f)
        maps[(t, f)] = m
        inv = [0, 0, 0]
        for k, p in enumerate(FACES[f]):
            inv[FACES[f2].index(m[k])] = p
        maps[(t2, f2)] = tuple(inv)
    for t in range(T):
        for f in range(4):
            if (t, f) not in glue:
                raise NotClosed(f"face {f} of tetrahedron {t} is not glued")

    uf = _UnionFind(4 * T)
    first = {}
    for t, row in enumerate(tets):
        for i, lab in enumerate(row):
            key = str(lab)
            if key in first:
                uf.union(first[key], 4 * t + i)
            else:
                first[key] = 4 * t + i
    for (t, f), (t2, _), in glue.items():
        for p, q in zip(FACES[f], maps[(t, f)]):
            uf.union(4 * t + p, 4 * t2 + q)
    roots = sorted({uf.find(x) for x in range(4 * T)})
    cid = {r: k for k, r in enumerate(roots)}
    ids = [[cid[uf.find(4 * t + i)] for i in range(4)] for t in range(T)]
    for t, row in enumerate(ids):
        if len(set(row)) != 4:
            raise DegenerateTet(f"tetrahedron {t} repeats a vertex class")
    for (t, f), (t2, f2) in glue.items():
        if not _reverses_orientation(f, f2, maps[(t, f)]):
            raise OrientationClash(f"gluing ({t}, {f}) preserves face orientation")
    if names is None:
        names = [str(tets[r // 4][r % 4]) for r in roots]
        if len(set(names)) != len(names):
            names = [f"{n}#{k}" if names.count(n) > 1 else n for k, n in enumerate(names)]
    return Triangulation(ids, glue, names)


@dataclass(frozen=True)
class DistinguishedChain:
    """Two tetrahedra on the classes labelled A, B, C, D sharing edges AD and BC."""

    tet_a: int
    tet_b: int
    labels: dict
    kind: str
    boundary_edges: tuple

    def pair_edges(self, tri, t, pair):
        """Edge classes of tet t for the label pair ("AB", "CD") or ("AC", "BD")."""
        L = self.labels
        return tuple(tri.edge_of(t, L[x[0]], L[x[1]]) for x in pair)


def validate_chain(tri: Triangulation, tet_a, tet_b=None, labels=None) -> DistinguishedChain:
    """Check the chain pattern and return it with kind and boundary edges filled in.

    Accepts either an existing DistinguishedChain or (tet_a, tet_b, labels).
    """
    if isinstance(tet_a, DistinguishedChain):
        tet_a, tet_b, labels = tet_a.tet_a, tet_a.tet_b, tet_a.labels
    labels = {k: int(v) for k, v in labels.items()}
    if sorted(labels) != list(LABELS) or len(set(labels.values())) != 4:
        raise NotAChain("labels must map A, B, C, D to four distinct vertex classes")
    if tet_a == tet_b:
        raise NotAChain("chain tetrahedra must differ")
    for t in (tet_a, tet_b):
        if not 0 <= t < tri.n_tets:
            raise NotAChain(f"no tetrahedron {t}")
        if set(tri.tets[t].tolist()) != set(labels.values()):
            raise NotAChain(f"tetrahedron {t} is not spanned by A, B, C, D")
    L = labels
    shared = []
    for x, y in ("AD", "BC"):
        ea, eb = tri.edge_of(tet_a, L[x], L[y]), tri.edge_of(tet_b, L[x], L[y])
        if ea != eb:
            raise NotAChain(f"chain tetrahedra do not share edge {x}{y}")
        shared.append(ea)
    own = [tri.edge_of(t, L[x], L[y]) for t in (tet_a, tet_b) for x, y in ("AB", "CD", "AC", "BD")]
    edges = tuple(shared + own)
    if len(set(edges)) != 10:
        raise SharedEdgeCollision("the ten chain edges are not distinct classes")
    kind = SAME if tri.parity(tet_a, L) == tri.parity(tet_b, L) else OPPOSITE
    return DistinguishedChain(int(tet_a), int(tet_b), L, kind, edges)


def inner_edges(tri, chain) -> list:
    skip = set(chain.boundary_edges)
    return [e for e in range(tri.n_edges) if e not in skip]


def inner_vertices(tri, chain) -> list:
    skip = set(chain.labels.values())
    return [v for v in range(tri.n_vertices) if v not in skip]


def edge_star(tri, e):
    return tri.star(e)


def from_dict(d):
    """Parse the JSON triangulation schema; returns (tri, chain or None)."""
    try:
        tets = d["tets"]
        gl = [(g["from"], g["to"], g["map"]) for g in d["gluings"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed triangulation document: {exc}") from None
    tri = build_from_gluings(tets, gl)
    chain = None
    if d.get("chain"):
        c = d["chain"]
        try:
            a, b = c["tets"]
            labels = {k: _label_class(tri, tets, v) for k, v in c["labels"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed chain: {exc}") from None
        chain = validate_chain(tri, int(a), int(b), labels)
    return tri, chain


def _label_class(tri, tets, label):
    for t, row in enumerate(tets):
        for i, v in enumerate(row):
            if str(v) == str(label):
                return int(tri.tets[t, i])
    raise InputError(f"chain label {label!r} is not a vertex")


def load_json(path):
    path = Path(path)
    if not path.exists():
        raise NotFound(f"{path} does not exist")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None
    return from_dict(d)


def save_json(path, tri, chain=None):
    Path(path).write_text(json.dumps(tri.to_dict(chain), indent=1))
