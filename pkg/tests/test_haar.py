import math
import random

import numpy as np
import pytest

from shapelab.forms import BinaryCubicForm, embeddings
from shapelab.haar import (
    disc_real,
    make_basepoint,
    mc_jacobian_constant,
    mc_theorem6_ratio,
    real_shape_gram,
    stabilizer_order,
)
from shapelab.measure import Rank2Region
from shapelab.shape import gauss_reduce, shape_gram


def test_seed_discriminants():
    assert disc_real(0, 1, 1, 0) == 1       # xy(x+y)
    assert disc_real(1, 0, 1, 0) == -4      # x(x^2+y^2)


def test_disc_homogeneity():
    rng = np.random.default_rng(2)
    for _ in range(200):
        v = rng.uniform(-3, 3, 4)
        lam = float(rng.uniform(0.2, 2.5))
        d1 = disc_real(*(lam * v))
        d0 = disc_real(*v)
        assert abs(d1 - lam**4 * d0) <= 1e-12 * max(abs(d1), abs(d0), 1e-30)


def test_real_shape_gram_matches_embeddings():
    rng = random.Random(4)
    from shapelab.forms import discriminant, is_irreducible

    n = 0
    while n < 80:
        co = tuple(rng.randint(-9, 9) for _ in range(4))
        f = BinaryCubicForm(*co)
        if co[0] == 0 or discriminant(f) == 0:
            continue
        A, B, C = real_shape_gram(co)
        m = shape_gram(embeddings(f)).matrix()
        assert abs(A - m[0, 0]) < 1e-8 * max(1, abs(m[0, 0]))
        assert abs(B - m[0, 1]) < 1e-8 * max(1, abs(m[0, 0]), abs(m[1, 1]))
        assert abs(C - m[1, 1]) < 1e-8 * max(1, abs(m[1, 1]))
        n += 1


def test_basepoints():
    for i in (0, 1):
        bp = make_basepoint(i)
        assert abs(abs(bp.disc) - 1.0) <= 1e-12
        A, B, C = bp.gram
        s = (A + C) / 2
        assert max(abs(A - s), abs(C - s), abs(B)) <= 1e-10 * s
        assert bp.signature == i


def test_stabilizer_orders():
    assert stabilizer_order(0) == 6
    assert stabilizer_order(1) == 2


def test_shape_of_group_image_is_group_coordinate():
    """The shape of g . v^(i) equals the class of the dilation-translation
    coordinates of g, independent of rotation and signs."""
    from shapelab.haar import _act_arrays, _iwasawa_mats

    rng = np.random.default_rng(10)
    for i in (0, 1):
        v = np.array(make_basepoint(i).coeffs)
        for _ in range(400):
            x = float(rng.uniform(-2.5, 2.5))
            y = float(np.exp(rng.uniform(-1.6, 1.6)))
            th = float(rng.uniform(0, 2 * math.pi))
            eps = 1.0 if rng.random() < 0.5 else -1.0
            lam = float(rng.uniform(0.3, 1.6)) * (1.0 if rng.random() < 0.5 else -1.0)
            p, q, r, s = _iwasawa_mats(np.array([x]), np.array([y]), np.array([th]), np.array([eps]))
            w = [lam * float(t[0]) for t in _act_arrays(p, q, r, s, v)]
            A, B, C = real_shape_gram(w)
            pt1, _ = gauss_reduce([[A, B], [B, C]])
            pt2, _ = gauss_reduce([[1.0, x], [x, x * x + y * y]])
            assert abs(pt1.x - pt2.x) < 1e-7
            assert abs(pt1.y - pt2.y) < 1e-7 * max(1.0, pt2.y)


def test_mc_jacobian_constancy_and_scaling():
    ests = {}
    for i in (0, 1):
        ea = mc_jacobian_constant(i, "A", 10**6, 101)
        eb = mc_jacobian_constant(i, "B", 10**6, 202)
        z = abs(ea.value - eb.value) / math.hypot(ea.stderr, eb.stderr)
        assert z < 3.0, (i, ea, eb)
        ests[i] = ea
    # doubling the sample roughly halves the standard error
    e1 = mc_jacobian_constant(0, "A", 10**6, 7)
    e2 = mc_jacobian_constant(0, "A", 4 * 10**6, 7)
    assert e1.stderr / e2.stderr == pytest.approx(2.0, rel=0.45)


def test_mc_jacobian_rejects_small_n():
    with pytest.raises(ValueError):
        mc_jacobian_constant(0, "A", 10**5, 1)


def test_mc_ratio_full_window_is_one():
    W = Rank2Region.box(0, 0.5, 0, 4.0)
    est, mu = mc_theorem6_ratio(W, 1, 4.0, 10**6, 3)
    assert mu == pytest.approx(1.0, abs=1e-12)
    assert est.value == pytest.approx(1.0, abs=1e-12)


def test_mc_ratio_matches_measure():
    W = Rank2Region.box(0, 0.5, 1.0, 2.0)
    for i in (0, 1):
        est, mu = mc_theorem6_ratio(W, i, 4.0, 2 * 10**6, 17)
        assert abs(est.value - mu) <= 3 * est.stderr, (i, est, mu)
    W2 = Rank2Region.box(0, math.sin(math.pi / 12), 0, 4.0)
    est, mu = mc_theorem6_ratio(W2, 0, 4.0, 2 * 10**6, 23)
    assert abs(est.value - mu) <= 3 * est.stderr
