"""Hot loops: per-tetrahedron dihedral angles with length gradients, and F3 scatter.

Each kernel exists twice, as a vectorised numpy function and as a numba
``@njit`` loop.  The numba versions are used when numba imports and the
environment variable ``GEOTORSION_NO_NUMBA`` is unset (or "0").
"""
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("GEOTORSION_NO_NUMBA", "0") in ("", "0")

# Edge slot s of a tetrahedron joins positions EDGES[s].
EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_SLOT = {e: s for s, e in enumerate(EDGES)}


def _slot(i, j):
    return _SLOT[(i, j) if i < j else (j, i)]


def _stencil():
    # For edge (i, j) with the other two positions k < l, the slots of
    # ij, ik, il, jk, jl, kl.  The Gram matrix is taken at vertex i.
    out = np.empty((6, 6), dtype=np.int64)
    for a, (i, j) in enumerate(EDGES):
        k, l = [v for v in range(4) if v not in (i, j)]
        out[a] = [_slot(i, j), _slot(i, k), _slot(i, l), _slot(j, k), _slot(j, l), _slot(k, l)]
    return out


STENCIL = _stencil()


def tet_angles_numpy(L):
    """Unsigned dihedral angles (T, 6) and their gradients dtheta_a/dl_b (T, 6, 6).

    ``L`` holds the six edge lengths of each tetrahedron in slot order.
    With M the Gram matrix of the edge vectors leaving vertex i towards j, k, l,
    cos(theta_ij) = N / sqrt(N^2 + S^2) where N = M12 M00 - M01 M02 and
    S = sqrt(M00 det M).  Everything is polynomial in the squared lengths, so
    the gradient follows from the chain rule with Jacobi's formula for det M.
    """
    L = np.asarray(L, dtype=float)
    T = L.shape[0]
    u = L * L
    theta = np.empty((T, 6))
    grad = np.zeros((T, 6, 6))
    for a in range(6):
        ij, ik, il, jk, jl, kl = STENCIL[a]
        m00, m11, m22 = u[:, ij], u[:, ik], u[:, il]
        m01 = 0.5 * (u[:, ij] + u[:, ik] - u[:, jk])
        m02 = 0.5 * (u[:, ij] + u[:, il] - u[:, jl])
        m12 = 0.5 * (u[:, ik] + u[:, il] - u[:, kl])
        c00 = m11 * m22 - m12 * m12
        c11 = m00 * m22 - m02 * m02
        c22 = m00 * m11 - m01 * m01
        c01 = m02 * m12 - m01 * m22
        c02 = m01 * m12 - m02 * m11
        c12 = m01 * m02 - m00 * m12
        g = m00 * c00 + m01 * c01 + m02 * c02
        n = m12 * m00 - m01 * m02
        s = np.sqrt(m00 * g)
        theta[:, a] = np.arctan2(s, n)
        den = n * n + s * s
        dg = (c00 + c01 + c02, c11 + c01 + c12, c22 + c02 + c12, -c01, -c02, -c12)
        dn = (m12 - 0.5 * (m01 + m02), 0.5 * (m00 - m02), 0.5 * (m00 - m01),
              0.5 * m02, 0.5 * m01, -0.5 * m00)
        for r, b in enumerate((ij, ik, il, jk, jl, kl)):
            ds = (m00 * dg[r] + (g if r == 0 else 0.0)) / (2.0 * s)
            grad[:, a, b] = (n * ds - s * dn[r]) / den * 2.0 * L[:, b]
    return theta, grad


def assemble_F3_numpy(edge_class, sigma, grad, n_edges):
    """F3[a, b] = -sum over tetrahedra of sigma_t dtheta_a/dl_b, by edge class."""
    F = np.zeros((n_edges, n_edges))
    ec = np.asarray(edge_class)
    np.add.at(F, (ec[:, :, None], ec[:, None, :]), -sigma[:, None, None] * grad)
    return F


if HAVE_NUMBA:

    @njit(cache=True)
    def tet_angles_numba(L):
        T = L.shape[0]
        theta = np.empty((T, 6))
        grad = np.zeros((T, 6, 6))
        u = np.empty(6)
        dg = np.empty(6)
        dn = np.empty(6)
        for t in range(T):
            for e in range(6):
                u[e] = L[t, e] * L[t, e]
            for a in range(6):
                st = STENCIL[a]
                m00 = u[st[0]]
                m11 = u[st[1]]
                m22 = u[st[2]]
                m01 = 0.5 * (u[st[0]] + u[st[1]] - u[st[3]])
                m02 = 0.5 * (u[st[0]] + u[st[2]] - u[st[4]])
                m12 = 0.5 * (u[st[1]] + u[st[2]] - u[st[5]])
                c00 = m11 * m22 - m12 * m12
                c11 = m00 * m22 - m02 * m02
                c22 = m00 * m11 - m01 * m01
                c01 = m02 * m12 - m01 * m22
                c02 = m01 * m12 - m02 * m11
                c12 = m01 * m02 - m00 * m12
                g = m00 * c00 + m01 * c01 + m02 * c02
                n = m12 * m00 - m01 * m02
                s = np.sqrt(m00 * g)
                theta[t, a] = np.arctan2(s, n)
                den = n * n + s * s
                dg[0] = c00 + c01 + c02
                dg[1] = c11 + c01 + c12
                dg[2] = c22 + c02 + c12
                dg[3] = -c01
                dg[4] = -c02
                dg[5] = -c12
                dn[0] = m12 - 0.5 * (m01 + m02)
                dn[1] = 0.5 * (m00 - m02)
                dn[2] = 0.5 * (m00 - m01)
                dn[3] = 0.5 * m02
                dn[4] = 0.5 * m01
                dn[5] = -0.5 * m00
                for r in range(6):
                    b = st[r]
                    ds = m00 * dg[r]
                    if r == 0:
                        ds += g
                    ds /= 2.0 * s
                    grad[t, a, b] = (n * ds - s * dn[r]) / den * 2.0 * L[t, b]
        return theta, grad

    @njit(cache=True)
    def assemble_F3_numba(edge_class, sigma, grad, n_edges):
        F = np.zeros((n_edges, n_edges))
        for t in range(edge_class.shape[0]):
            for a in range(6):
                ea = edge_class[t, a]
                for b in range(6):
                    F[ea, edge_class[t, b]] -= sigma[t] * grad[t, a, b]
        return F


def tet_angles(L):
    L = np.ascontiguousarray(L, dtype=float)
    if USE_NUMBA:
        return tet_angles_numba(L)
    return tet_angles_numpy(L)


def assemble_F3(edge_class, sigma, grad, n_edges):
    if USE_NUMBA:
        return assemble_F3_numba(np.ascontiguousarray(edge_class, dtype=np.int64),
                                 np.ascontiguousarray(sigma, dtype=float), grad, int(n_edges))
    return assemble_F3_numpy(edge_class, sigma, grad, n_edges)
