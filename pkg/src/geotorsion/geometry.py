"""Euclidean geometrization: lengths, oriented volumes, dihedral angles and their gradients.

Angles come from edge lengths only; coordinates supply lengths and the sign
of each oriented volume.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import EDGES, _slot
from .errors import DegenerateTet, ResampleExhausted

VOLUME_TOL = 1e-9
MAX_RESAMPLES = 1000


@dataclass(frozen=True)
class Geometrization:
    """Coordinates of every vertex class, one row per class."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


def six_volume(P) -> float:
    """6V of four points (M, N, R, Q) as MN . (MQ x MR)."""
    M, N, R, Q = np.asarray(P, dtype=float)
    return float(np.dot(N - M, np.cross(Q - M, R - M)))


def oriented_volume(geo, tet) -> float:
    """Signed volume of a tetrahedron given as four vertex classes."""
    return six_volume(geo.coords[list(tet)]) / 6.0


def six_volumes(tri, geo) -> np.ndarray:
    P = geo.coords[tri.tets]
    M, N, R, Q = P[:, 0], P[:, 1], P[:, 2], P[:, 3]
    return np.einsum("ij,ij->i", N - M, np.cross(Q - M, R - M))


def edge_length(geo, e, tri=None) -> float:
    """Length of an edge, given as a vertex-class pair or as a class id of ``tri``."""
    if tri is not None:
        e = tri.edge_ends[e]
    a, b = e
    return float(np.linalg.norm(geo.coords[b] - geo.coords[a]))


def edge_lengths(tri, geo) -> np.ndarray:
    d = geo.coords[tri.edge_ends[:, 1]] - geo.coords[tri.edge_ends[:, 0]]
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def slot_lengths(tri, lengths) -> np.ndarray:
    """Per-tetrahedron slot lengths (T, 6) from class lengths."""
    return np.asarray(lengths)[tri.edge_class]


def is_nondegenerate(tri, geo, tol=VOLUME_TOL) -> bool:
    return bool(np.all(np.abs(six_volumes(tri, geo)) > tol))


def random_geometrization(tri, seed, fixed=None, tol=VOLUME_TOL, max_resamples=MAX_RESAMPLES):
    """Uniform coordinates in [-1, 1]^3 for the free classes, redrawn until nondegenerate.

    ``fixed`` maps vertex classes to pinned coordinates.
    """
    rng = np.random.default_rng(seed)
    fixed = dict(fixed or {})
    for _ in range(max_resamples):
        c = rng.uniform(-1.0, 1.0, size=(tri.n_vertices, 3))
        for v, x in fixed.items():
            c[v] = x
        geo = Geometrization(c)
        if is_nondegenerate(tri, geo, tol):
            return geo
    raise ResampleExhausted(f"no nondegenerate draw in {max_resamples} attempts")


@dataclass(frozen=True)
class TetGeometry:
    """Six slot lengths and the signed 6V of one tetrahedron."""

    lengths: np.ndarray
    six_v: float

    @classmethod
    def from_points(cls, P):
        P = np.asarray(P, dtype=float)
        L = np.array([np.linalg.norm(P[j] - P[i]) for i, j in EDGES])
        return cls(L, six_volume(P))

    @property
    def sigma(self) -> int:
        return 1 if self.six_v > 0 else -1

    def _check(self):
        if abs(self.six_v) <= VOLUME_TOL:
            raise DegenerateTet("tetrahedron is flat")

    def angles(self) -> np.ndarray:
        """Signed dihedral angles, one per edge slot."""
        self._check()
        th, _ = _kernels.tet_angles(self.lengths[None, :])
        return self.sigma * th[0]

    def gradient(self) -> np.ndarray:
        """gradient()[a, b] = d(signed angle at a) / d(length of b)."""
        self._check()
        _, g = _kernels.tet_angles(self.lengths[None, :])
        return self.sigma * g[0]


def tet_geometry(tri, geo, t) -> TetGeometry:
    return TetGeometry.from_points(geo.coords[tri.tets[t]])


def dihedral_angle(geo, tet, edge_slot) -> float:
    """Signed dihedral angle of tet (four vertex classes) at one edge slot."""
    return float(TetGeometry.from_points(geo.coords[list(tet)]).angles()[edge_slot])


def dihedral_gradient(tg: TetGeometry, edge_at, edge_wrt) -> float:
    return float(tg.gradient()[edge_at, edge_wrt])


def _wrap(x):
    # reduce to (-pi, pi]
    y = np.mod(x + np.pi, 2 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def deficit_angles(tri, lengths, sigma) -> np.ndarray:
    """Deficit angle of every edge class for given class lengths and tet orientations."""
    th, _ = _kernels.tet_angles(slot_lengths(tri, lengths))
    total = np.zeros(tri.n_edges)
    np.add.at(total, tri.edge_class, sigma[:, None] * th)
    return _wrap(-total)


def deficit_angle(geo, tri, e) -> float:
    sigma = np.sign(six_volumes(tri, geo))
    if np.any(np.abs(six_volumes(tri, geo)) <= VOLUME_TOL):
        raise DegenerateTet("flat tetrahedron in the star")
    return float(deficit_angles(tri, edge_lengths(tri, geo), sigma)[e])


def edge_slot(i, j) -> int:
    return _slot(i, j)
