"""Shape of a cubic/quartic/quintic ring: Gram matrices, reduction, canonical coordinates.

The shape is the quadratic form induced on the projection of the ring
orthogonal to 1 under the Minkowski form q(x) = sum of |embedding|^2 (complex
embeddings weighted twice), taken up to positive scaling.  Rank-2 shapes are
reduced to a point (x, y) in the domain {0 <= x <= 1/2, x^2 + y^2 >= 1} of the
upper half-plane; rank-3/4 shapes are Minkowski-reduced Grams normalized to
determinant 1.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from .forms import (
    BinaryCubicForm,
    EmbeddingData,
    UnimodularMatrix2,
    IDENTITY2,
    discriminant,
    embeddings,
    hessian,
    is_irreducible,
)

__all__ = [
    "ShapeGram",
    "UHPoint",
    "EmbeddingMatrix",
    "shape_gram",
    "gauss_reduce",
    "shape_point",
    "shape_via_sublattice",
    "lll_minkowski_reduce",
    "gram_det_check",
    "snap_uh_point",
    "UH_TOL",
]

UH_TOL = 1e-9


@dataclass(frozen=True)
class UHPoint:
    """Canonical coordinates of a rank-2 shape: 0 <= x <= 1/2, x^2+y^2 >= 1."""

    x: float
    y: float

    def in_domain(self, tol: float = UH_TOL) -> bool:
        return (
            -tol <= self.x <= 0.5 + tol
            and self.y > 0
            and self.x * self.x + self.y * self.y >= 1 - tol
        )


@dataclass(frozen=True)
class ShapeGram:
    """Symmetric positive definite Gram matrix, considered up to positive scaling."""

    rank: int
    mat: tuple  # tuple of tuples, row-major

    def matrix(self) -> np.ndarray:
        return np.array(self.mat, dtype=float)

    @staticmethod
    def from_matrix(m) -> "ShapeGram":
        m = np.asarray(m, dtype=float)
        n = m.shape[0]
        if m.shape != (n, n) or n not in (2, 3, 4):
            raise ValueError(f"bad Gram shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise ValueError("Gram not symmetric")
        scale = np.abs(m).max()
        for k in range(1, n + 1):
            if np.linalg.det(m[:k, :k]) <= 1e-12 * scale**k:
                raise ValueError("Gram not positive definite")
        return ShapeGram(rank=n, mat=tuple(tuple(float(x) for x in row) for row in m))


def snap_uh_point(x: float, y: float, tol: float = UH_TOL) -> UHPoint:
    """Canonicalize a reduced point to the domain boundary when within tol."""
    if abs(x) <= tol:
        x = 0.0
    elif abs(x - 0.5) <= tol:
        x = 0.5
    r2 = x * x + y * y
    if abs(r2 - 1.0) <= tol:
        y = math.sqrt(max(0.0, 1.0 - x * x))
    return UHPoint(float(x), float(y))


def _q_inner(u, v, r: int):
    """Minkowski inner product given embedding vectors: first r entries real
    embeddings, remainder one representative per complex-conjugate pair."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    real = float(np.sum(u[:r].real * v[:r].real))
    cplx = 2.0 * float(np.sum((u[r:] * v[r:].conj()).real))
    return real + cplx


def _q_trace(u, r: int):
    u = np.asarray(u, dtype=complex)
    return float(np.sum(u[:r].real) + 2.0 * np.sum(u[r:].real))


def shape_gram(e: EmbeddingData) -> ShapeGram:
    """Rank-2 shape Gram of a cubic ring on the basis (omega, theta),
    projected orthogonally to 1.

    Entries are assembled in exact rational arithmetic from the certified
    roots (the subtraction of the trace terms cancels catastrophically in
    float64 for lopsided forms).  Checks the determinant identity
    det G = |disc f|/3 and, for totally real forms, the exact Hessian
    identity 3G = [[2P, Q], [Q, 2R]].
    """
    f = e.form
    D = discriminant(f)
    r = 3 - 2 * e.signature
    if e.signature == 0:
        om = [(Fraction(z.real), Fraction(0)) for z in e.omega]
        th = [(Fraction(z.real), Fraction(0)) for z in e.theta]
    else:
        om = [(Fraction(e.omega[0].real), Fraction(0)),
              (Fraction(e.omega[1].real), Fraction(e.omega[1].imag))]
        th = [(Fraction(e.theta[0].real), Fraction(0)),
              (Fraction(e.theta[1].real), Fraction(e.theta[1].imag))]

    def inner(u, v):
        out = Fraction(0)
        for j, ((ur, ui), (vr, vi)) in enumerate(zip(u, v)):
            w = ur * vr + ui * vi  # Re(u * conj(v))
            out += w if j < r else 2 * w
        return out

    def trace(u):
        out = Fraction(0)
        for j, (ur, _) in enumerate(u):
            out += ur if j < r else 2 * ur
        return out

    tr_om, tr_th = trace(om), trace(th)
    A = float(inner(om, om) - tr_om * tr_om / 3)
    B = float(inner(om, th) - tr_om * tr_th / 3)
    C = float(inner(th, th) - tr_th * tr_th / 3)

    det = A * C - B * B
    if abs(det - abs(D) / 3.0) > 1e-9 * abs(D) / 3.0:
        raise ValueError(f"shape Gram determinant {det} != |disc|/3 = {abs(D)/3}")
    if e.signature == 0:
        h = hessian(f)
        scale = max(abs(h.P), abs(h.Q), abs(h.R), 1)
        if (
            abs(3 * A - 2 * h.P) > 1e-9 * 2 * scale
            or abs(3 * B - h.Q) > 1e-9 * 2 * scale
            or abs(3 * C - 2 * h.R) > 1e-9 * 2 * scale
        ):
            raise ValueError("totally real shape Gram disagrees with Hessian")
    return ShapeGram(rank=2, mat=((A, B), (B, C)))


def gauss_reduce(G) -> tuple[UHPoint, UnimodularMatrix2]:
    """Gauss-reduce a positive definite binary Gram to 0 <= 2B <= A <= C.

    Returns the canonical point (B/A, sqrt(AC - B^2)/A) and the transform
    gamma with gamma^T G gamma reduced.  Reducing an already-reduced Gram
    returns the identity transform.
    """
    if isinstance(G, ShapeGram):
        if G.rank != 2:
            raise ValueError("gauss_reduce expects rank 2")
        (A, B), (_, C) = G.mat
    else:
        m = np.asarray(G, dtype=float)
        A, B, C = float(m[0, 0]), float(m[0, 1]), float(m[1, 1])
        if abs(m[1, 0] - B) > 1e-12 * max(abs(B), 1.0):
            raise ValueError("Gram not symmetric")
    if A <= 0 or A * C - B * B <= 0:
        raise ValueError("Gram not positive definite")

    p, q, r, s = 1, 0, 0, 1  # accumulated transform, columns are basis coords
    if not (0 <= 2 * B <= A <= C):
        for _ in range(10000):
            t = int(round(B / A))
            if t:
                # e2 <- e2 - t e1
                B, C = B - t * A, C - 2 * t * B + t * t * A
                q, s = q - t * p, s - t * r
            if A > C:
                A, C = C, A
                B = B
                p, q = q, p
                r, s = s, r
                continue
            if 2 * abs(B) <= A:
                break
        else:
            raise ValueError("Gauss reduction did not terminate")
        if B < 0:
            B = -B
            q, s = -q, -s
    det = A * C - B * B
    pt = snap_uh_point(B / A, math.sqrt(det) / A)
    return pt, UnimodularMatrix2(p, q, r, s)


def shape_point(f: BinaryCubicForm) -> UHPoint:
    """Canonical shape coordinates of the cubic ring of an irreducible form."""
    if not is_irreducible(f):
        raise ValueError("shape_point requires an irreducible form")
    e = embeddings(f)
    pt, _ = gauss_reduce(shape_gram(e))
    return pt


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Embeddings of a full ring basis (1, u_2, ..., u_n) of a degree-n field.

    rows[j] holds the images of the j-th basis element: first r real
    embeddings, then one representative per complex pair.
    """

    n: int
    r: int
    rows: tuple  # tuple of complex tuples

    def __post_init__(self):
        if len(self.rows) != self.n:
            raise ValueError("need one row per basis element")
        ones = np.asarray(self.rows[0], dtype=complex)
        if not np.allclose(ones, 1.0, atol=1e-9):
            raise ValueError("first basis element must embed as 1")


def _projection_gram(em: EmbeddingMatrix) -> np.ndarray:
    n, r = em.n, em.r
    rows = [np.asarray(row, dtype=complex) for row in em.rows]
    G = np.empty((n - 1, n - 1))
    tr = [_q_trace(rows[j], r) for j in range(n)]
    for j in range(1, n):
        for k in range(j, n):
            v = _q_inner(rows[j], rows[k], r) - tr[j] * tr[k] / n
            G[j - 1, k - 1] = G[k - 1, j - 1] = v
    return G


def shape_via_sublattice(em: EmbeddingMatrix) -> ShapeGram:
    """Shape Gram from the trace-zero sublattice basis {n*u_j - Tr(u_j)*1}.

    Cross-checked against the orthogonal-projection definition: the sublattice
    is n times the projected lattice, so the two Grams agree up to the scalar
    n^2 (hence give the same shape).
    """
    n, r = em.n, em.r
    rows = [np.asarray(row, dtype=complex) for row in em.rows]
    ones = rows[0]
    G = np.empty((n - 1, n - 1))
    w = []
    for j in range(1, n):
        w.append(n * rows[j] - _q_trace(rows[j], r) * ones)
    for j in range(n - 1):
        for k in range(j, n - 1):
            G[j, k] = G[k, j] = _q_inner(w[j], w[k], r)
    if np.linalg.matrix_rank(G, tol=1e-9 * max(1.0, np.abs(G).max())) < n - 1:
        raise ValueError("rank-deficient basis")
    Gp = _projection_gram(em) * n * n
    if not np.allclose(G, Gp, rtol=1e-9, atol=1e-9 * np.abs(G).max()):
        raise ValueError("sublattice and projection shape definitions disagree")
    return ShapeGram.from_matrix(G)


# -- rank 3/4 reduction ------------------------------------------------------


def _lll_gram(G: np.ndarray, delta: float = 0.99):
    """Gram-only LLL; returns (reduced Gram, integer transform U), basis = old @ U."""
    n = G.shape[0]
    U = np.eye(n, dtype=np.int64)
    G = G.copy().astype(float)

    def gso(G):
        mu = np.zeros((n, n))
        Bstar = np.zeros(n)
        for i in range(n):
            Bstar[i] = G[i, i] - sum(mu[i, j] ** 2 * Bstar[j] for j in range(i))
            for k in range(i + 1, n):
                mu[k, i] = (G[k, i] - sum(mu[k, j] * mu[i, j] * Bstar[j] for j in range(i))) / Bstar[i]
        return mu, Bstar

    def swap(i):
        perm = np.eye(n, dtype=np.int64)
        perm[[i - 1, i]] = perm[[i, i - 1]]
        return perm

    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 10000:
            raise ValueError("LLL did not terminate")
        mu, Bstar = gso(G)
        for j in range(k - 1, -1, -1):
            t = int(round(mu[k, j]))
            if t:
                T = np.eye(n, dtype=np.int64)
                T[j, k] = -t
                U = U @ T
                G = T.T.astype(float) @ G @ T.astype(float)
                mu, Bstar = gso(G)
        if Bstar[k] >= (delta - mu[k, k - 1] ** 2) * Bstar[k - 1]:
            k += 1
        else:
            P = swap(k)
            U = U @ P
            G = P.T.astype(float) @ G @ P.astype(float)
            k = max(k - 1, 1)
    return G, U


def _short_vectors(G: np.ndarray, bound: float):
    """All nonzero integer vectors v with v^T G v <= bound, by Cholesky box enum."""
    n = G.shape[0]
    L = np.linalg.cholesky(G)  # G = L L^T, Q(v) = |L^T v|^2
    Linv = np.linalg.inv(L.T)
    # coordinate box: |v_i| <= sqrt(bound * (G^{-1})_ii)
    Ginv = np.linalg.inv(G)
    lim = [int(math.floor(math.sqrt(bound * Ginv[i, i]) + 1e-9)) + 1 for i in range(n)]
    out = []
    for v in itertools.product(*[range(-l, l + 1) for l in lim]):
        if all(x == 0 for x in v):
            continue
        vv = np.array(v, dtype=float)
        q = float(vv @ G @ vv)
        if q <= bound * (1 + 1e-12):
            out.append((q, v))
    return out


def _extendable(cols: list[tuple[int, ...]]) -> bool:
    """Columns extendable to a unimodular matrix iff gcd of maximal minors is 1."""
    m = np.array(cols, dtype=object).T  # n x k
    n, k = m.shape
    g = 0
    for rows in itertools.combinations(range(n), k):
        sub = [[int(m[r][c]) for c in range(k)] for r in rows]
        g = math.gcd(g, abs(_int_det(sub)))
        if g == 1:
            return True
    return g == 1


def _int_det(mat) -> int:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    det = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in mat[1:]]
        det += (-1) ** j * mat[0][j] * _int_det(minor)
    return det


def lll_minkowski_reduce(G) -> tuple[ShapeGram, np.ndarray]:
    """Minkowski-reduce a rank 3 or 4 Gram: LLL (delta=0.99) then exhaustive
    short-vector search, greedy successive minima with lexicographic
    tie-breaking, determinant normalized to 1.

    Returns (reduced ShapeGram with det 1, integer transform applied to the
    original basis).
    """
    if isinstance(G, ShapeGram):
        G0 = G.matrix()
    else:
        G0 = np.asarray(G, dtype=float)
    n = G0.shape[0]
    if n not in (3, 4):
        raise ValueError("lll_minkowski_reduce expects rank 3 or 4")
    if np.linalg.det(G0) <= 0:
        raise ValueError("Gram not positive definite")

    Gl, U = _lll_gram(G0, 0.99)
    bound = float(np.max(np.diag(Gl))) * (1 + 1e-9)
    cands = _short_vectors(Gl, bound)

    def sort_key(item):
        q, v = item
        w = v if _sign_canon(v) else tuple(-x for x in v)
        return (q, w)

    def _sign_canon(v):
        for x in v:
            if x > 0:
                return True
            if x < 0:
                return False
        return True

    cands = [(q, v if _sign_canon(v) else tuple(-x for x in v)) for q, v in cands]
    cands = sorted(set(cands), key=lambda t: (round(t[0], 9), t[1]))

    chosen: list[tuple[int, ...]] = []
    for q, v in cands:
        if len(chosen) == n:
            break
        trial = chosen + [v]
        m = np.array(trial).T
        if np.linalg.matrix_rank(m) < len(trial):
            continue
        if not _extendable(trial):
            continue
        if len(trial) == n and abs(_int_det([list(r) for r in np.array(trial)])) != 1:
            continue
        chosen.append(v)
    if len(chosen) < n:
        raise ValueError("Minkowski reduction failed to build a basis")

    V = np.array(chosen, dtype=np.int64).T  # columns
    Ured = U @ V
    Gr = Ured.T @ G0 @ Ured
    # canonical sign choice: first nonzero off-diagonal in each column >= 0
    for j in range(1, n):
        col = Gr[:j, j]
        nz = col[np.abs(col) > 1e-12 * np.abs(Gr).max()]
        if len(nz) and nz[0] < 0:
            Ured[:, j] = -Ured[:, j]
            Gr = Ured.T @ G0 @ Ured
    det = np.linalg.det(Gr)
    Gn = Gr / det ** (1.0 / n)
    return ShapeGram.from_matrix(Gn), Ured


def gram_det_check(G_full, disc: int) -> float:
    """Relative error | |det G| - |disc| | / |disc| for a full-basis Gram."""
    m = np.asarray(G_full, dtype=float)
    det = abs(float(np.linalg.det(m)))
    return abs(det - abs(disc)) / abs(disc)
