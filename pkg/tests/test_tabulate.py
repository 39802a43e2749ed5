import random

import numpy as np
import pytest

from shapelab.forms import (
    BinaryCubicForm,
    UnimodularMatrix2,
    act,
    discriminant,
    is_irreducible,
)
from shapelab.maximality import is_maximal_at_array
from shapelab.tabulate import (
    EnumerationTask,
    brute_force_classes,
    canonicalize,
    enumerate_classes,
    is_canonical,
    read_forms_csv,
    write_forms_csv,
)

F = BinaryCubicForm

GENS = [
    UnimodularMatrix2(0, 1, 1, 0),
    UnimodularMatrix2(1, 1, 0, 1),
    UnimodularMatrix2(1, -1, 0, 1),
    UnimodularMatrix2(1, 0, 1, 1),
    UnimodularMatrix2(1, 0, -1, 1),
    UnimodularMatrix2(1, 0, 0, -1),
    UnimodularMatrix2(-1, 0, 0, 1),
]


def test_section_uniqueness_on_named_orbit():
    # the two forms lie in one orbit: the section picks a single representative
    f1, f2 = F(1, 0, -1, -1), F(1, 3, 2, -1)
    c1, c2 = canonicalize(f1), canonicalize(f2)
    assert c1 == c2
    assert is_canonical(c1)
    assert sum(1 for f in (f1, f2) if is_canonical(f)) <= 1


def test_canonical_examples():
    # boundary orbit: hexagonal-Hessian cyclic cubic exercises the tie-breaking
    c = canonicalize(F(1, 1, -2, -1))
    assert is_canonical(c)
    assert discriminant(c) == 49
    # generic interior orbit: reduced with strict inequalities
    assert is_canonical(F(1, -1, -3, 1))


def test_section_property_random_words():
    rng = random.Random(41)
    n = 0
    while n < 1500:
        f = F(*(rng.randint(-9, 9) for _ in range(4)))
        if discriminant(f) == 0 or not is_irreducible(f):
            continue
        g = f
        for _ in range(rng.randint(1, 8)):
            g = act(GENS[rng.randrange(len(GENS))], g)
            if max(map(abs, g.coeffs())) > 10**7:
                break
        c1, c2 = canonicalize(f), canonicalize(g)
        assert c1 == c2, (f, g, c1, c2)
        n += 1


def test_section_property_boundary_forms():
    # orbits whose reduced Gram sits on the domain boundary (hexagonal, square,
    # A=C ties): cyclic cubics and symmetric forms
    specials = [
        F(1, 1, -2, -1),    # hexagonal (disc 49)
        F(1, 0, -3, -1),    # disc 81 cyclic
        F(1, -1, 0, 1),     # disc -23
        F(1, 0, 1, 1),      # x = 0ish boundary candidates
        F(1, 0, -1, 1),
        F(2, 1, -1, -1),
        F(1, 1, 1, 1),      # reducible, skipped below
    ]
    rng = random.Random(5)
    for f in specials:
        if discriminant(f) == 0 or not is_irreducible(f):
            continue
        for _ in range(40):
            g = f
            for _ in range(rng.randint(1, 7)):
                g = act(GENS[rng.randrange(len(GENS))], g)
            assert canonicalize(g) == canonicalize(f), (f, g)


def test_enumerate_examples():
    rec = enumerate_classes(EnumerationTask(xmax=50, signature="1", maximal_only=True))
    assert rec["disc"].tolist() == [-23, -31, -44]
    rec = enumerate_classes(EnumerationTask(xmax=150, signature="0", maximal_only=True))
    assert rec["disc"].tolist() == [148]
    rec = enumerate_classes(EnumerationTask(xmax=10, signature="0"))
    assert len(rec) == 0  # smallest totally real S3 disc is 148


def test_enumerate_brute_agree_small():
    en = enumerate_classes(EnumerationTask(xmax=2000, signature="both", include_c3=True))
    br = brute_force_classes(2000)
    assert len(en) == len(br)
    for k in ("a", "b", "c", "d", "disc", "i", "s3", "maximal"):
        assert (en[k] == br[k]).all()
    assert np.allclose(en["x"], br["x"], atol=1e-12)
    assert np.allclose(en["y"], br["y"], rtol=1e-12)


def test_brute_examples():
    br = brute_force_classes(1000)
    m0 = br[(br["i"] == 0) & (br["maximal"] == 1) & (br["s3"] == 1)]
    assert m0["disc"].tolist()[:8] == [148, 229, 257, 316, 321, 404, 469, 473]
    m1 = br[(br["i"] == 1) & (br["maximal"] == 1) & (br["s3"] == 1)]
    assert m1["disc"].tolist()[:3] == [-23, -31, -44]
    # cyclic cubics carry the hexagonal shape and are excluded from s3 streams
    c3 = br[br["s3"] == 0]
    assert 49 in c3["disc"].tolist() and 81 in c3["disc"].tolist()
    assert np.allclose(c3["x"], 0.5, atol=1e-9)
    assert np.allclose(c3["y"], np.sqrt(3) / 2, atol=1e-9)


def test_enumerate_ordering_and_record_invariants():
    rec = enumerate_classes(EnumerationTask(xmax=3000, signature="both", include_c3=True))
    key = np.stack([np.abs(rec["disc"]), rec["a"], rec["b"], rec["c"], rec["d"]])
    assert all(
        tuple(key[:, j]) <= tuple(key[:, j + 1]) for j in range(key.shape[1] - 1)
    )
    assert (rec["a"] > 0).all()
    assert ((rec["disc"] < 0) == (rec["i"] == 1)).all()
    # every stored shape obeys the domain invariants
    assert (rec["x"] >= -1e-9).all() and (rec["x"] <= 0.5 + 1e-9).all()
    assert (rec["x"] ** 2 + rec["y"] ** 2 >= 1 - 1e-9).all()
    # det(shape Gram) identity transcribed to (x, y): covered in acceptance


def test_enumerate_congruence_filter():
    from shapelab.maximality import CongruencePredicate

    res = [(a, b, c, d) for a in range(2) for b in range(2) for c in range(2) for d in range(2) if a == 0]
    task = EnumerationTask(xmax=2000, signature="1", congruence=CongruencePredicate(2, res))
    rec = enumerate_classes(task)
    assert (rec["a"] % 2 == 0).all()
    full = enumerate_classes(EnumerationTask(xmax=2000, signature="1"))
    assert set(rec["disc"].tolist()) == set(
        full["disc"][np.asarray(full["a"]) % 2 == 0].tolist()
    )


def test_enumerate_bound_inflation_audit_small():
    a = enumerate_classes(EnumerationTask(xmax=5000, signature="both", include_c3=True))
    b = enumerate_classes(
        EnumerationTask(xmax=5000, signature="both", include_c3=True), bound_scale=1.5
    )
    assert len(a) == len(b)
    for k in ("a", "b", "c", "d"):
        assert (a[k] == b[k]).all()


def test_enumerate_thread_independence():
    a = enumerate_classes(EnumerationTask(xmax=4000, signature="both"), threads=1)
    b = enumerate_classes(EnumerationTask(xmax=4000, signature="both"), threads=2)
    for k in ("a", "b", "c", "d", "disc", "x", "y"):
        assert (a[k] == b[k]).all()


def test_forms_csv_roundtrip(tmp_path):
    rec = enumerate_classes(EnumerationTask(xmax=500, signature="both", include_c3=True))
    path = tmp_path / "forms.csv"
    write_forms_csv(rec, str(path))
    back = read_forms_csv(str(path))
    for k in ("a", "b", "c", "d", "disc", "i", "s3", "maximal"):
        assert (rec[k] == back[k]).all()
    assert (rec["x"] == back["x"]).all()  # shortest round-trip decimals
    assert (rec["y"] == back["y"]).all()


def test_vectorized_maximality_matches_scalar():
    from shapelab.maximality import is_maximal_at

    rng = random.Random(3)
    forms = []
    while len(forms) < 300:
        f = tuple(rng.randint(-15, 15) for _ in range(4))
        if discriminant(f) != 0:
            forms.append(f)
    arr = np.array(forms, dtype=np.int64)
    for p in (2, 3, 5, 7, 11):
        vec = is_maximal_at_array(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], p)
        for j, f in enumerate(forms):
            assert vec[j] == is_maximal_at(f, p), (f, p)
