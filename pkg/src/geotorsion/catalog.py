"""Example spaces (unknot in S^3, unknots in lens spaces) and exact oracles for them."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidSpec, OracleMismatch
from .geometry import Geometrization
from .triangulation import LABELS, Triangulation, validate_chain

EVEN = "ABCD"
ODD = "BACD"


def _assemble(orders, links):
    """Tets given as label strings on the classes A..D (ids 0..3).

    ``links`` holds (t1, label, t2): glue the faces of t1 and t2 opposite ``label``.
    """
    tets = [[LABELS.index(c) for c in o] for o in orders]
    glue = {}
    for t1, lab, t2 in links:
        a = (t1, orders[t1].index(lab))
        b = (t2, orders[t2].index(lab))
        if a in glue or b in glue:
            raise AssertionError(f"face glued twice: {a} {b}")
        glue[a], glue[b] = b, a
    return Triangulation(tets, glue, names=tuple(LABELS))


def _labels():
    return {x: k for k, x in enumerate(LABELS)}


def s3_unknot_triangulation():
    """Unknot in S^3: six tetrahedra P1, P2, Q1, Q2, R1, R2 form a solid torus.

    Eight tetrahedra on A, B, C, D.  P1, P2, R1, R2 are ordered ABCD, the rest
    BACD; every gluing joins an ABCD tet to a BACD tet.  Q1 closes P1 (face
    ABC) and P2 (face ABD); Q2 closes P2 (face BCD) and P1 (face ACD); R1 and
    R2 cap Q1 and Q2.  The chain X, Y fills the remaining faces.  Returns
    (tri, chain) with chain = (X, Y).
    """
    P1, P2, Q1, Q2, R1, R2, X, Y = range(8)
    orders = [EVEN, EVEN, ODD, ODD, EVEN, EVEN, ODD, ODD]
    # (face opposite label): list of (even tet, odd tet)
    table = {
        "A": [(P1, X), (P2, Q2), (R1, Q1), (R2, Y)],
        "B": [(P1, Q2), (P2, X), (R1, Q1), (R2, Y)],
        "C": [(P1, X), (P2, Q1), (R1, Y), (R2, Q2)],
        "D": [(P1, Q1), (P2, X), (R1, Y), (R2, Q2)],
    }
    links = [(e, lab, o) for lab, pairs in table.items() for e, o in pairs]
    tri = _assemble(orders, links)
    return tri, validate_chain(tri, X, Y, _labels())


def s3_geometrization():
    return Geometrization(np.array([[0.1, 0.2, 1.0], [1.0, 0.0, 0.0], [0.3, 1.1, 0.2], [-0.2, 0.1, -1.0]]))


def _check_lens(p, q, n):
    if not (isinstance(p, int) and isinstance(q, int) and isinstance(n, int)):
        raise InvalidSpec("p, q, n must be integers")
    if p < 2 or not 0 < q < p or math.gcd(p, q) != 1:
        raise InvalidSpec(f"need coprime 0 < q < p, got p={p}, q={q}")
    if not 1 <= n <= p - 1:
        raise InvalidSpec(f"need 1 <= n <= p-1, got n={n}")


def lens_tet_index(p, half, kind, i):
    """Index of tet (half in 'UL', kind in 'BC', position i) in lens_triangulation."""
    return 4 * (i % p) + {"UB": 0, "UC": 1, "LB": 2, "LC": 3}[half + kind]


def lens_triangulation(p, q, n):
    """L(p, q) with the n-th unknot, 4p tetrahedra on A, B, C, D.

    A bipyramid over a p-gon with equator B_0 C_0 B_1 C_1 ... , coned from an
    interior point A; D is the common class of both apexes.  Upper tets
    U_{B,i} = A D B_i C_i and U_{C,i} = A D C_i B_{i+1}, lower ones likewise.
    The upper face opposite A of each tet is glued to the lower one rotated
    by q steps.  Chain = (U_{B,n}, U_{B,0}).
    """
    _check_lens(p, q, n)
    orders = []
    for _ in range(p):
        orders += [ODD, EVEN, EVEN, ODD]  # U_B, U_C, L_B, L_C
    T = lambda h, k, i: lens_tet_index(p, h, k, i)  # noqa: E731
    links = []
    for i in range(p):
        for h in "UL":
            links.append((T(h, "B", i), "B", T(h, "C", i)))
            links.append((T(h, "C", i), "C", T(h, "B", i + 1)))
        links.append((T("U", "B", i), "D", T("L", "B", i)))
        links.append((T("U", "C", i), "D", T("L", "C", i)))
        links.append((T("U", "B", i), "A", T("L", "B", i + q)))
        links.append((T("U", "C", i), "A", T("L", "C", i + q)))
    tri = _assemble(orders, links)
    return tri, validate_chain(tri, T("U", "B", n), T("U", "B", 0), _labels())


def lens_geometrization(p):
    c = math.cos(math.pi / p), math.sin(math.pi / p)
    return Geometrization(np.array([[0, 0, 1.0], [1.0, 0, 0], [c[0], c[1], 0], [0, 0, -1.0]]))


def lens_edge_layout(tri, p):
    """Edge classes in the block order (AB)_1..p, (CD)_1..p, (AC)_1..p, (BD)_1..p, (AD)_1,2, (BC)_1,2.

    Index i stands for position i mod p of the equator, so (AB)_p is position 0.
    """
    ub = [lens_tet_index(p, "U", "B", i % p) for i in range(1, p + 1)]
    out = []
    for x, y in ("AB", "CD", "AC", "BD"):
        out += [tri.edge_of(t, LABELS.index(x), LABELS.index(y)) for t in ub]
    A, B, C, D = range(4)
    out += [tri.edge_of(ub[0], A, D), tri.edge_of(lens_tet_index(p, "L", "B", 0), A, D)]
    out += [tri.edge_of(ub[0], B, C), tri.edge_of(lens_tet_index(p, "U", "C", 0), B, C)]
    return out


def edge_names(tri):
    """Names like '(AB)_2' for catalog triangulations, numbered by class order per pair."""
    count, out = {}, {}
    for e, (a, b) in enumerate(tri.edge_ends):
        pair = "".join(sorted(tri.names[a] + tri.names[b]))
        count[pair] = count.get(pair, 0) + 1
        out[e] = f"({pair})_{count[pair]}"
    return out


# ---------------------------------------------------------------- numbers
def q_star(p, q, n):
    """Solution of q * x = n (mod p) in 1..p-1."""
    return (n * pow(q, -1, p)) % p


def _nu_direct(p, q, n):
    qs = q_star(p, q, n)
    hits = {(k * q) % p for k in range(1, qs)}
    return sum(1 for i in range(1, n) if i in hits)


def _nu_fourier(p, q, n):
    qs = q_star(p, q, n)
    total = complex((n - 1) * (qs - 1))  # k = 0 term, by the limit of each factor
    for k in range(1, p):
        z = cmath.exp(2j * math.pi * k / p)
        total += (1 - z ** (1 - n)) / (1 - z) * (1 - z ** (q * (qs - 1))) / (1 - z ** (-q))
    return total / p


def nu_n(p, q, n):
    """nu_n by the Fourier sum and by the direct count; they must agree."""
    _check_lens(p, q, n)
    direct = _nu_direct(p, q, n)
    four = _nu_fourier(p, q, n)
    if abs(four - direct) > 1e-6:
        raise OracleMismatch(f"nu_n({p},{q},{n}): Fourier sum {four} vs count {direct}")
    return direct


def s_t(p, q, n):
    s = n * q_star(p, q, n) - p * nu_n(p, q, n)
    return s, p - s


def framed_s_t(p, q, n, h):
    """(s_n^(h), t_n^(2 floor(h/2))) from the closed-form recurrences, h >= 0."""
    s, t = s_t(p, q, n)
    m = h // 2
    if h % 2 == 0:
        sh = (-1) ** m * (s - m * p)
    else:
        sh = (-1) ** (m + 1) * (s - m * p - p)
    return sh, t + m * p


def _half_steps(r) -> int:
    h = Fraction(r) * 2
    if h.denominator != 1:
        raise InvalidSpec(f"framing {r} is not a half-integer")
    return int(h)


def closed_form_lens(p, q, n, r=0):
    """Exact invariant of the n-th unknot in L(p, q) at framing offset r >= 0.

    Returns a Fraction, or +-inf when the complex is not acyclic.
    """
    _check_lens(p, q, n)
    h = _half_steps(r)
    if h < 0:
        raise InvalidSpec("closed forms cover r >= 0 only")
    sh, th = framed_s_t(p, q, n, h)
    sign = -1 if h % 2 == 0 else 1
    if sh * th == 0:
        return sign * math.inf
    return Fraction(sign, sh * sh * th * th * p * p)


def closed_form_s3(r):
    """1/m^4 at r = m, -1/(m^2 (m+1)^2) at r = m + 1/2; inf when a factor vanishes."""
    h = _half_steps(r)
    m = h // 2
    if h % 2 == 0:
        return math.inf if m == 0 else Fraction(1, m ** 4)
    d = m * m * (m + 1) * (m + 1)
    return -math.inf if d == 0 else Fraction(-1, d)


# ---------------------------------------------------------------- matrices
def shift_matrix(p):
    """E with E[i, i-1] = 1 cyclically, so (E x)_i = x_{i-1}."""
    return np.roll(np.eye(p, dtype=np.int64), 1, axis=0)


def lens_matrices(p, q):
    """S1 = (1 - E^q)(1 - E), S2 = (1 - E^q)(1 - E^-1), S3 = p [[1, -1], [-1, 1]]."""
    E = shift_matrix(p)
    I = np.eye(p, dtype=np.int64)
    Eq = np.linalg.matrix_power(E, q)
    S1 = (I - Eq) @ (I - E)
    S2 = (I - Eq) @ (I - E.T)
    S3 = p * np.array([[1, -1], [-1, 1]], dtype=np.int64)
    return S1, S2, S3


def _extend(S, first_shift, fill, last, off, count):
    p = S.shape[0]
    out = np.zeros((p + count, p + count), dtype=np.int64)
    out[:p, :p] = S
    if count == 0:
        return out
    out[p - 1, p - 1] += first_shift
    diag = [fill] * (count - 1) + [last]
    for k, d in enumerate(diag):
        i = p + k
        out[i, i] = d
        out[i, i - 1] = out[i - 1, i] = off
    return out


def framed_S1(p, q, h):
    """S1^(h): tri-diagonal tail with m - 1 entries -2, where h in {2m - 1, 2m}."""
    S1, _, _ = lens_matrices(p, q)
    m = (h + 1) // 2
    return _extend(S1, -1, -2, -1, 1, m)


def framed_S2(p, q, h):
    """S2^(h): tri-diagonal tail with m - 1 entries 2, where h in {2m, 2m + 1}."""
    _, S2, _ = lens_matrices(p, q)
    m = h // 2
    return _extend(S2, 1, 2, 1, -1, m)


def reduce_matrix(S, n):
    """Drop row/column n (1-based) and the last one."""
    keep = [i for i in range(S.shape[0]) if i not in (n - 1, S.shape[0] - 1)]
    return S[np.ix_(keep, keep)]


def bareiss_det(M) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    A = np.array(M, dtype=object)
    n = A.shape[0]
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k, k] == 0:
            nz = [i for i in range(k + 1, n) if A[i, k] != 0]
            if not nz:
                return 0
            A[[k, nz[0]]] = A[[nz[0], k]]
            sign = -sign
        akk = A[k, k]
        A[k + 1:, k + 1:] = (A[k + 1:, k + 1:] * akk - np.outer(A[k + 1:, k], A[k, k + 1:])) // prev
        prev = akk
    return int(sign * A[n - 1, n - 1])


def adjugate(M):
    """Exact adjugate via cofactors."""
    A = np.asarray(M, dtype=object)
    n = A.shape[0]
    adj = np.zeros((n, n), dtype=object)
    idx = list(range(n))
    for i in range(n):
        for j in range(n):
            r = [k for k in idx if k != i]
            c = [k for k in idx if k != j]
            adj[j, i] = (-1) ** (i + j) * bareiss_det(A[np.ix_(r, c)].tolist())
    return adj


def brute_det_oracle(p, q, n, h=0):
    """(s_n^(h), t_n^(2 floor(h/2))) as exact determinants of the reduced matrices."""
    _check_lens(p, q, n)
    s = bareiss_det(reduce_matrix(framed_S1(p, q, h), n))
    t = bareiss_det(reduce_matrix(framed_S2(p, q, 2 * (h // 2)), n))
    return s, t


# ---------------------------------------------------------------- ids
@dataclass(frozen=True)
class CatalogSpace:
    """A catalog triangulation with its default geometrization and framing calibration.

    ``base_framing`` is the framing realised by the bare chain, on the scale
    the closed form uses: absolute for S^3, relative (zero) for lens spaces.
    """

    ident: str
    tri: Triangulation
    chain: object
    geo: Geometrization
    base_framing: Fraction
    params: tuple = ()

    def closed_form(self, r):
        if self.ident == "s3-unknot":
            return closed_form_s3(r)
        return closed_form_lens(*self.params, r)


def catalog_space(ident: str) -> CatalogSpace:
    """Resolve "s3-unknot" or "lens:p,q,n"."""
    ident = ident.strip()
    if ident == "s3-unknot":
        tri, chain = s3_unknot_triangulation()
        return CatalogSpace(ident, tri, chain, s3_geometrization(), Fraction(1, 2))
    if ident.startswith("lens:"):
        try:
            p, q, n = (int(x) for x in ident[5:].split(","))
        except ValueError:
            raise InvalidSpec(f"bad lens id {ident!r}, want lens:p,q,n") from None
        tri, chain = lens_triangulation(p, q, n)
        return CatalogSpace(f"lens:{p},{q},{n}", tri, chain, lens_geometrization(p), Fraction(0), (p, q, n))
    raise InvalidSpec(f"unknown catalog id {ident!r}")


def oracle_suite(pmax, adj_max=20, hmax=8):
    """Exact cross-checks for every valid (p, q, n) with p <= pmax.

    Rows: nu_n (Fourier sum vs count), s_n and t_n (closed form vs Bareiss),
    framed s_n^(h), t_n^(h) for h <= hmax and p <= 12, adjugates of S1 and S2
    for p <= adj_max.
    """
    rows, failures = [], []
    for p in range(2, pmax + 1):
        for q in range(1, p):
            if math.gcd(p, q) != 1:
                continue
            for n in range(1, p):
                row = {"p": p, "q": q, "n": n}
                try:
                    row["nu"] = nu_n(p, q, n)
                except OracleMismatch as exc:
                    failures.append(str(exc))
                    continue
                s, t = s_t(p, q, n)
                row["s"], row["t"] = s, t
                for h in range(hmax + 1 if p <= 12 else 1):
                    want = framed_s_t(p, q, n, h)
                    got = brute_det_oracle(p, q, n, h)
                    if got != want:
                        failures.append(f"({p},{q},{n}) h={h}: determinants {got} vs closed form {want}")
                rows.append(row)
            if p <= adj_max:
                for name, S in zip(("S1", "S2"), lens_matrices(p, q)[:2]):
                    if not np.all(adjugate(S) == p):
                        failures.append(f"adj {name} for p={p}, q={q} is not all {p}")
    return {"cases": len(rows), "failures": failures, "rows": rows}
