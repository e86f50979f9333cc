"""Matrices of the deformation complex  (dx)' -f2-> (dl)' -f3-> (dw)' -f4-> so(3)'."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateTet
from .geometry import VOLUME_TOL, edge_lengths, six_volume, six_volumes, slot_lengths
from .triangulation import LABELS, inner_edges, inner_vertices


@dataclass(frozen=True)
class DeformationMatrices:
    f2: np.ndarray
    f3: np.ndarray
    f4: np.ndarray
    inner_edges: list
    inner_vertices: list

    @property
    def row_index(self):
        return {e: k for k, e in enumerate(self.inner_edges)}

    @property
    def col_index(self):
        return {v: 3 * k for k, v in enumerate(self.inner_vertices)}


def _checked_volumes(tri, geo):
    v = six_volumes(tri, geo)
    bad = np.flatnonzero(np.abs(v) <= VOLUME_TOL)
    if len(bad):
        raise DegenerateTet(f"tetrahedron {int(bad[0])} is flat")
    return v


def build_F3(tri, geo, lengths=None) -> np.ndarray:
    """Full N1 x N1 matrix of d(deficit angle)/d(length).

    ``lengths`` overrides the class lengths (volume signs still come from geo).
    """
    sigma = np.sign(_checked_volumes(tri, geo))
    if lengths is None:
        lengths = edge_lengths(tri, geo)
    _, grad = _kernels.tet_angles(slot_lengths(tri, lengths))
    return _kernels.assemble_F3(tri.edge_class, sigma, grad, tri.n_edges)


def build_f3(F3, inner) -> np.ndarray:
    idx = np.asarray(inner, dtype=np.int64)
    return F3[np.ix_(idx, idx)]


def chain_six_volume(geo, chain) -> float:
    """6V of the chain vertices taken in label order A, B, C, D."""
    return six_volume(geo.coords[[chain.labels[x] for x in LABELS]])


def build_G3(F3, lengths, six_v_abcd) -> np.ndarray:
    d = 1.0 / np.asarray(lengths)
    return six_v_abcd * (d[:, None] * F3 * d[None, :])


def _unit_vectors(tri, geo, edges):
    ends = tri.edge_ends[edges]
    d = geo.coords[ends[:, 1]] - geo.coords[ends[:, 0]]
    return ends, d / np.linalg.norm(d, axis=1)[:, None]


def build_f2(tri, chain, geo) -> np.ndarray:
    """Rows: inner edges.  Columns: xyz of each inner vertex."""
    rows = inner_edges(tri, chain)
    col = {v: 3 * k for k, v in enumerate(inner_vertices(tri, chain))}
    f2 = np.zeros((len(rows), 3 * len(col)))
    if not rows or not col:
        return f2
    ends, e = _unit_vectors(tri, geo, rows)
    for r, ((m, n), u) in enumerate(zip(ends, e)):
        if m in col:
            f2[r, col[m]:col[m] + 3] = -u
        if n in col:
            f2[r, col[n]:col[n] + 3] = u
    return f2


def _generator(u):
    # so(3) generator of rotations about the unit vector u
    return np.array([[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]])


def _axial(x):
    return np.array([x[2, 1], x[0, 2], x[1, 0]])


def build_f4(tri, chain, geo) -> np.ndarray:
    """Rows: xyz of each inner vertex Q.  Column QR holds the rotation axis e_QR."""
    cols = inner_edges(tri, chain)
    verts = inner_vertices(tri, chain)
    row = {v: 3 * k for k, v in enumerate(verts)}
    f4 = np.zeros((3 * len(verts), len(cols)))
    if not cols or not verts:
        return f4
    ends, e = _unit_vectors(tri, geo, cols)
    for c, ((m, n), u) in enumerate(zip(ends, e)):
        # e_QR points away from Q
        if m in row:
            f4[row[m]:row[m] + 3, c] = _axial(_generator(u))
        if n in row:
            f4[row[n]:row[n] + 3, c] = _axial(_generator(-u))
    return f4


def deformation_matrices(tri, chain, geo, F3=None) -> DeformationMatrices:
    if F3 is None:
        F3 = build_F3(tri, geo)
    inner = inner_edges(tri, chain)
    return DeformationMatrices(
        f2=build_f2(tri, chain, geo),
        f3=build_f3(F3, inner),
        f4=build_f4(tri, chain, geo),
        inner_edges=inner,
        inner_vertices=inner_vertices(tri, chain),
    )


def complex_residuals(m: DeformationMatrices) -> dict:
    """Scaled residuals of the chain-complex identities."""

    def nrm(a):
        return float(np.abs(a).sum(axis=1).max()) if a.size else 0.0

    def ratio(x, a, b):
        s = nrm(a) * nrm(b)
        return nrm(x) / s if s else 0.0

    f2, f3, f4 = m.f2, m.f3, m.f4
    scale3 = float(np.abs(f3).max()) if f3.size else 1.0
    return {
        "f3_symmetry": float(np.abs(f3 - f3.T).max()) / scale3 if f3.size else 0.0,
        "f4_plus_f2T": float(np.abs(f4 + f2.T).max()) if f4.size else 0.0,
        "f3_f2": ratio(f3 @ f2, f3, f2) if f2.size else 0.0,
        "f4_f3": ratio(f4 @ f3, f4, f3) if f4.size else 0.0,
    }
