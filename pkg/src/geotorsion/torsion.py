"""Pivot sets, Reidemeister torsion and the invariant I(M)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .deformation import build_F3, build_f2, build_f3, chain_six_volume
from .errors import RankDeficit, SingularF2Minor
from .geometry import edge_lengths, six_volumes
from .triangulation import inner_edges, inner_vertices

PIVOT_TOL = 1e-8
F2_TOL = 1e-10
_ALPHA = (1.0 + math.sqrt(17.0)) / 8.0


def select_pivot_set(f3, target_rank, tol=PIVOT_TOL, scale=None):
    """Indices B with det f3[B, B] != 0 and |B| = target_rank.

    Symmetric pivoting on Schur complements.  A 1x1 pivot takes the largest
    diagonal entry; when the off-diagonal part dominates (the diagonal can be
    identically zero) a 2x2 pivot on the largest off-diagonal entry is used
    instead, with the Bunch-Parlett threshold.  Stops once the best candidate
    falls to tol times ``scale`` (default: the largest entry of f3; pass the
    scale of the enclosing matrix when f3 itself may be pure round-off).
    """
    A = np.array(f3, dtype=float)
    n = A.shape[0]
    if target_rank == 0:
        return []
    if scale is None:
        scale = float(np.abs(A).max()) if n else 0.0
    if scale == 0.0 or n == 0:
        raise RankDeficit(f"zero matrix, wanted rank {target_rank}")
    active = np.ones(n, dtype=bool)
    B = []
    while len(B) < target_rank:
        idx = np.flatnonzero(active)
        S = A[np.ix_(idx, idx)]
        d = np.abs(np.diag(S))
        i0 = int(np.argmax(d))
        mu0 = d[i0]
        off = np.abs(S - np.diag(np.diag(S)))
        flat = int(np.argmax(off)) if len(idx) > 1 else 0
        mu1 = off.flat[flat] if len(idx) > 1 else 0.0
        room = target_rank - len(B)
        if max(mu0, mu1) <= tol * scale:
            break
        if mu0 >= _ALPHA * mu1 or room == 1:
            if mu0 <= tol * scale:
                break
            piv = [idx[i0]]
        else:
            r, c = divmod(flat, len(idx))
            piv = [idx[r], idx[c]]
        rest = np.flatnonzero(active)
        rest = rest[~np.isin(rest, piv)]
        P = A[np.ix_(piv, piv)]
        try:
            A[np.ix_(rest, rest)] -= A[np.ix_(rest, piv)] @ np.linalg.solve(P, A[np.ix_(piv, rest)])
        except np.linalg.LinAlgError:
            break
        active[piv] = False
        B.extend(int(x) for x in piv)
    if len(B) < target_rank:
        raise RankDeficit(f"pivoting reached rank {len(B)} of {target_rank}")
    return sorted(B)


def _slogdet(M):
    if M.size == 0:
        return 1.0, 0.0
    s, ld = np.linalg.slogdet(M)
    return float(s), float(ld)


@dataclass
class TorsionResult:
    pivot_set: list
    det_f3B: tuple  # (sign, log|det|)
    det_f2Bbar: tuple
    tau_sign: float
    tau_log: float
    acyclic: bool = True

    @property
    def tau(self) -> float:
        return self.tau_sign * (math.exp(self.tau_log) if self.tau_log < 700 else math.inf)


def torsion(f2, f3, B) -> TorsionResult:
    """tau = (-1)^N0' det(f2 restricted to rows off B)^2 / det(f3[B, B])."""
    n0 = f2.shape[1] // 3
    Bset = set(B)
    Bbar = [k for k in range(f3.shape[0]) if k not in Bset]
    if len(Bbar) != 3 * n0:
        raise SingularF2Minor(f"complement of B has {len(Bbar)} rows, need {3 * n0}")
    F2 = f2[Bbar, :]
    if n0:
        sv = np.linalg.svd(F2, compute_uv=False)
        if sv[-1] <= F2_TOL * max(sv[0], 1.0):
            raise SingularF2Minor("f2 minor on the complement of B is singular")
    s2, l2 = _slogdet(F2)
    s3, l3 = _slogdet(f3[np.ix_(B, B)])
    if s3 == 0:
        raise RankDeficit("f3 minor on B is singular")
    return TorsionResult(list(B), (s3, l3), (s2, l2), (-1.0) ** n0 * s3, 2 * l2 - l3)


@dataclass
class InvariantReport:
    """I(M) in sign/log form plus the pieces it was built from."""

    acyclic: bool
    I: float | None
    sign: float = 0.0
    log_abs: float = math.inf
    tau: float | None = None
    log_prod_l2: float = 0.0
    sign_prod_minus6v: float = 1.0
    log_prod_minus6v: float = 0.0
    log_six_v_abcd4: float = 0.0
    pivot_set: list = field(default_factory=list)
    n_inner_edges: int = 0
    n_inner_vertices: int = 0
    framing_offset: float | None = None
    seed: int | None = None
    triangulation_hash: str | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        for k in ("log_abs",):
            if not math.isfinite(d[k]):
                d[k] = None
        return d


def invariant(tri, chain, geo, F3=None) -> InvariantReport:
    lengths = edge_lengths(tri, geo)
    sv = six_volumes(tri, geo)
    if F3 is None:
        F3 = build_F3(tri, geo, lengths)
    inner = inner_edges(tri, chain)
    verts = inner_vertices(tri, chain)
    f3 = build_f3(F3, inner)
    f2 = build_f2(tri, chain, geo)
    target = len(inner) - 3 * len(verts)
    diag = {"target_rank": target}
    scale = float(np.abs(F3).max())
    if f3.size:
        s = np.linalg.svd(f3, compute_uv=False)
        diag["svd_rank"] = int(np.count_nonzero(s > PIVOT_TOL * scale))
        diag["cond"] = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    base = dict(n_inner_edges=len(inner), n_inner_vertices=len(verts),
                triangulation_hash=tri.digest(), diagnostics=diag)
    try:
        B = select_pivot_set(f3, target, scale=scale)
        tr = torsion(f2, f3, B)
    except (RankDeficit, SingularF2Minor) as exc:
        diag["reason"] = f"{exc.code}: {exc}"
        return InvariantReport(acyclic=False, I=None, **base)
    if f3.size and diag["svd_rank"] != target:
        diag["warning"] = "singular-value rank disagrees with the pivot set"

    keep = np.ones(tri.n_tets, dtype=bool)
    keep[[chain.tet_a, chain.tet_b]] = False
    m6v = -sv[keep]
    log_l2 = float(2 * np.log(lengths[inner]).sum())
    sign_v = float(np.prod(np.sign(m6v)))
    log_v = float(np.log(np.abs(m6v)).sum())
    log_abcd = 4 * math.log(abs(chain_six_volume(geo, chain)))
    sign = tr.tau_sign * sign_v
    log_abs = tr.tau_log + log_l2 - log_v + log_abcd
    I = sign * math.exp(log_abs) if log_abs < 700 else sign * math.inf
    return InvariantReport(
        acyclic=True, I=I, sign=sign, log_abs=log_abs, tau=tr.tau,
        log_prod_l2=log_l2, sign_prod_minus6v=sign_v, log_prod_minus6v=log_v,
        log_six_v_abcd4=log_abcd, pivot_set=[inner[k] for k in B], **base,
    )
