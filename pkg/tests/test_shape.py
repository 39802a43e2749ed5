import itertools
import math
import random

import numpy as np
import pytest

from shapelab.forms import BinaryCubicForm, UnimodularMatrix2, act, discriminant, embeddings
from shapelab.shape import (
    EmbeddingMatrix,
    ShapeGram,
    UHPoint,
    gauss_reduce,
    gram_det_check,
    lll_minkowski_reduce,
    shape_gram,
    shape_point,
    shape_via_sublattice,
)

F = BinaryCubicForm


def test_shape_gram_hessian_identity_cases():
    sg = shape_gram(embeddings(F(1, 1, -2, -1)))
    m = sg.matrix() * 3
    assert np.allclose(m, [[14, 7], [7, 14]], rtol=1e-9)
    sg = shape_gram(embeddings(F(1, -1, -3, 1)))
    m = sg.matrix() * 3
    assert np.allclose(m, [[20, -6], [-6, 24]], rtol=1e-9)


def test_shape_gram_det_identity():
    sg = shape_gram(embeddings(F(1, 0, -1, -1)))
    m = sg.matrix()
    assert abs(np.linalg.det(m) - 23 / 3) < 1e-9 * 23 / 3


def test_gauss_reduce_examples():
    pt, g = gauss_reduce([[2, 1], [1, 2]])
    assert (pt.x, pt.y) == (0.5, math.sqrt(3) / 2)
    assert (g.p, g.q, g.r, g.s) == (1, 0, 0, 1)  # already reduced: identity

    pt, g = gauss_reduce([[1, 0], [0, 1]])
    assert (pt.x, pt.y) == (0.0, 1.0)

    pt, g = gauss_reduce([[20, -6], [-6, 24]])
    assert abs(pt.x - 0.3) < 1e-12
    assert abs(pt.y - math.sqrt(444) / 20) < 1e-12


def _brute_reduce_oracle(G):
    """Independent reduction: exhaustive short-vector search for the smallest
    basis, then canonical point from its Gram."""
    G = np.asarray(G, dtype=float)
    best = None
    rng = range(-8, 9)
    for v1 in itertools.product(rng, repeat=2):
        for v2 in itertools.product(rng, repeat=2):
            if v1[0] * v2[1] - v1[1] * v2[0] not in (1, -1):
                continue
            A = G[0, 0] * v1[0] ** 2 + 2 * G[0, 1] * v1[0] * v1[1] + G[1, 1] * v1[1] ** 2
            C = G[0, 0] * v2[0] ** 2 + 2 * G[0, 1] * v2[0] * v2[1] + G[1, 1] * v2[1] ** 2
            B = (
                G[0, 0] * v1[0] * v2[0]
                + G[0, 1] * (v1[0] * v2[1] + v1[1] * v2[0])
                + G[1, 1] * v1[1] * v2[1]
            )
            if B < 0:
                B = -B
            if 2 * B <= A * (1 + 1e-12) and A <= C * (1 + 1e-12):
                key = (round(A, 9), round(C, 9), round(B, 9))
                if best is None or key < best:
                    best = key
    A, C, B = best
    return B / A, math.sqrt(A * C - B * B) / A


def test_gauss_reduce_against_brute_oracle():
    # the [[4,2],[2,2]] case reduces to the square lattice (det preserved)
    for G in ([[4, 2], [2, 2]], [[7, 3], [3, 5]], [[10, -7], [-7, 6]], [[3, 1], [1, 9]]):
        pt, g = gauss_reduce(G)
        ox, oy = _brute_reduce_oracle(G)
        assert abs(pt.x - ox) < 1e-9 and abs(pt.y - oy) < 1e-9
    pt, _ = gauss_reduce([[4, 2], [2, 2]])
    assert (pt.x, pt.y) == (0.0, 1.0)


def test_gauss_reduce_idempotent_and_invariants():
    rng = random.Random(9)
    for _ in range(300):
        a11 = rng.uniform(0.1, 10)
        a12 = rng.uniform(-5, 5)
        a22 = rng.uniform(0.1, 10) + a12 * a12 / a11  # force positive definite
        pt, g = gauss_reduce([[a11, a12], [a12, a22]])
        assert pt.in_domain()
        # reduced Gram re-reduces to the identity transform
        A = a11 * g.p**2 + 2 * a12 * g.p * g.r + a22 * g.r**2
        B = a11 * g.p * g.q + a12 * (g.p * g.s + g.q * g.r) + a22 * g.r * g.s
        C = a11 * g.q**2 + 2 * a12 * g.q * g.s + a22 * g.s**2
        assert 0 <= 2 * B <= A * (1 + 1e-12) and A <= C * (1 + 1e-12)
        _, g2 = gauss_reduce([[A, B], [B, C]])
        assert (g2.p, g2.q, g2.r, g2.s) == (1, 0, 0, 1)


def test_gauss_reduce_rejects_indefinite():
    with pytest.raises(ValueError):
        gauss_reduce([[1, 2], [2, 1]])


def test_shape_point_golden():
    pt = shape_point(F(1, 1, -2, -1))
    assert abs(pt.x - 0.5) < 1e-9
    assert abs(pt.y - 0.8660254038) < 1e-9
    pt = shape_point(F(1, -1, -3, 1))
    assert abs(pt.x - 0.3) < 1e-9
    assert abs(pt.y - 1.0535653752) < 1e-9


def test_shape_point_invariance():
    rng = random.Random(11)
    gens = [
        UnimodularMatrix2(0, 1, 1, 0),
        UnimodularMatrix2(1, 1, 0, 1),
        UnimodularMatrix2(1, 0, 1, 1),
        UnimodularMatrix2(1, 0, 0, -1),
    ]
    p1 = shape_point(F(1, 3, 2, -1))
    p2 = shape_point(F(1, 0, -1, -1))
    assert abs(p1.x - p2.x) < 1e-9 and abs(p1.y - p2.y) < 1e-9
    n = 0
    while n < 60:
        f = F(*(rng.randint(-6, 6) for _ in range(4)))
        from shapelab.forms import is_irreducible

        if discriminant(f) == 0 or not is_irreducible(f):
            continue
        g = f
        for _ in range(rng.randint(1, 6)):
            g = act(gens[rng.randrange(4)], g)
        if g.a == 0:
            continue
        pf, pg = shape_point(f), shape_point(g)
        assert abs(pf.x - pg.x) < 1e-9
        assert abs(pf.y - pg.y) < 1e-9 * max(1.0, pf.y)
        n += 1


def _power_basis_embeddings(poly, n, r):
    roots = np.roots(list(reversed(poly)))
    roots = sorted(roots, key=lambda z: (abs(z.imag) > 1e-9, z.real, abs(z.imag)))
    reals = [z.real for z in roots if abs(z.imag) < 1e-9]
    cplx = [z if z.imag > 0 else z.conjugate() for z in roots if z.imag > 1e-9]
    pts = [complex(t) for t in reals] + cplx
    rows = []
    for j in range(n):
        rows.append(tuple(t**j for t in pts))
    return EmbeddingMatrix(n=n, r=r, rows=tuple(rows))


def test_shape_via_sublattice_cubic_agreement():
    em = _power_basis_embeddings([-1, -2, 1, 1], 3, 3)  # x^3+x^2-2x-1, disc 49
    sub = shape_via_sublattice(em)
    pt, _ = gauss_reduce(sub)
    assert abs(pt.x - 0.5) < 1e-9 and abs(pt.y - math.sqrt(3) / 2) < 1e-9


def test_shape_via_sublattice_split_lattice():
    # Z^3 presented as a split "ring": projection orthogonal to (1,1,1) is hexagonal
    em = EmbeddingMatrix(
        n=3, r=3, rows=((1, 1, 1), (1, 0, 0), (0, 1, 0))
    )
    sub = shape_via_sublattice(em)
    pt, _ = gauss_reduce(sub)
    assert abs(pt.x - 0.5) < 1e-9 and abs(pt.y - math.sqrt(3) / 2) < 1e-9


def test_shape_via_sublattice_quartic_matches_projection():
    em = _power_basis_embeddings([-1, -1, 0, 0, 1], 4, 2)  # x^4 - x - 1
    sub = shape_via_sublattice(em)  # internal cross-check asserts agreement
    assert sub.rank == 3


def test_lll_minkowski_reduce_basics():
    g, U = lll_minkowski_reduce(np.eye(3))
    assert np.allclose(g.matrix(), np.eye(3))
    g, U = lll_minkowski_reduce(np.diag([4.0, 1.0, 1.0]))
    m = g.matrix()
    assert np.allclose(np.sort(np.diag(m)), np.diag(m))  # nondecreasing diagonal
    assert abs(np.linalg.det(m) - 1) < 1e-9
    assert np.allclose(m, np.diag([1, 1, 4]) / 4 ** (1 / 3))


def _exhaustive_minima_oracle(G):
    """Successive minima values by exhaustive search (independent of LLL)."""
    G = np.asarray(G, dtype=float)
    n = G.shape[0]
    vecs = []
    for v in itertools.product(range(-6, 7), repeat=n):
        if any(v):
            vecs.append((float(np.array(v) @ G @ np.array(v)), v))
    vecs.sort()
    minima = []
    chosen = []
    for q, v in vecs:
        m = np.array(chosen + [v])
        if np.linalg.matrix_rank(m) == len(chosen) + 1:
            chosen.append(v)
            minima.append(q)
            if len(minima) == n:
                break
    return minima


def test_lll_minkowski_reduce_x4_minus_2():
    # trace-zero projection Gram of Z[2^{1/4}] (integral for x^4 - 2)
    em = _power_basis_embeddings([-2, 0, 0, 0, 1], 4, 2)
    sub = shape_via_sublattice(em)
    g, U = lll_minkowski_reduce(sub)
    m = g.matrix()
    minima = _exhaustive_minima_oracle(sub.matrix())
    scale = (np.prod(minima) / 1.0) ** 0  # oracle values, compare ratios
    got = np.diag(m)
    want = np.array(minima) / np.linalg.det(sub.matrix()) ** (1 / 3)
    assert np.allclose(got, want, rtol=1e-8)
    assert abs(np.linalg.det(m) - 1) < 1e-9
    assert abs(round(float(np.linalg.det(U))) ) == 1


def test_gram_det_check_golden():
    for poly, disc in [([-1, -1, 0, 1], -23), ([-1, -1, 0, 0, 1], -283), ([-1, -1, 0, 0, 0, 1], 2869)]:
        n = len(poly) - 1
        roots = np.roots(list(reversed(poly)))
        reals = [z.real for z in roots if abs(z.imag) < 1e-9]
        cplx = [z for z in roots if z.imag > 1e-9]
        pts = [complex(t) for t in sorted(reals)] + cplx
        r = len(reals)
        G = np.empty((n, n))
        for j in range(n):
            for k in range(n):
                u = np.array([t**j for t in pts])
                v = np.array([t**k for t in pts])
                G[j, k] = float(np.sum(u[:r].real * v[:r].real) + 2 * np.sum((u[r:] * v[r:].conj()).real))
        assert gram_det_check(G, disc) < 1e-8
