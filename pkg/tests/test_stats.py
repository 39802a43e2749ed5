import json
import math

import numpy as np
import pytest

from shapelab.maximality import CongruencePredicate
from shapelab.measure import MU_TOTAL, Rank2Region, equal_measure_partition, sample_mu_array
from shapelab.stats import (
    accumulate,
    congruence_ratio_report,
    equidist_report,
    ks_critical,
    maximal_density_product,
    report_to_json,
    wilson_interval,
)
from shapelab.tabulate import EnumerationTask, enumerate_classes


def test_accumulate_trivial():
    spec = equal_measure_partition(1, 1)
    counts, overflow = accumulate(np.array([]), np.array([]), spec)
    assert counts.tolist() == [0] and overflow == 0
    counts, overflow = accumulate(np.array([0.5]), np.array([math.sqrt(3) / 2]), spec)
    assert counts.tolist() == [1] and overflow == 0
    counts, overflow = accumulate(np.array([0.4]), np.array([0.3]), spec)
    assert counts.tolist() == [0] and overflow == 1


def test_accumulate_sampler_uniformity():
    rng = np.random.default_rng(99)
    x, y, _ = sample_mu_array(rng, 10**6)
    spec = equal_measure_partition(4, 6)
    counts, overflow = accumulate(x, y, spec)
    assert overflow == 0
    expected = 10**6 / 24
    dev = np.abs(counts - expected) / expected
    sigma = math.sqrt((1 - 1 / 24) / expected)
    assert dev.max() <= 5 * sigma


def test_accumulate_partition_invariance():
    rng = np.random.default_rng(5)
    x, y, _ = sample_mu_array(rng, 20000)
    spec = equal_measure_partition(3, 2)
    c1, _ = accumulate(x, y, spec)
    c2a, _ = accumulate(x[:7000], y[:7000], spec)
    c2b, _ = accumulate(x[7000:], y[7000:], spec)
    assert (c1 == c2a + c2b).all()


def _records(xmax=20000, sig="1", maximal=False):
    return enumerate_classes(
        EnumerationTask(xmax=xmax, signature=sig, maximal_only=maximal)
    )


def test_equidist_report_structure_and_json():
    rec = _records(5000)
    spec = equal_measure_partition(2, 2)
    W = Rank2Region.box(0, 0.5, 0, 1)
    rep = equidist_report(rec, spec, [("y<1", W)], X=5000)
    assert rep.N == len(rec)
    assert sum(c["count"] for c in rep.cells) == rep.N
    assert rep.dof == 3
    for c in rep.cells:
        assert abs(c["expected"] - rep.N * c["mu"] / MU_TOTAL) < 1e-9 * max(rep.N, 1)
    js = report_to_json(rep)
    data = json.loads(js)
    assert list(data.keys()) == ["X", "i", "filters", "cells", "chisq", "dof", "ks_x", "ks_ytail", "ratios"]
    assert list(data["cells"][0].keys()) == ["x1", "x2", "y1", "y2", "mu", "count", "expected", "rel_dev"]
    assert list(data["ratios"][0].keys()) == ["region", "N_W", "N", "ratio", "mu_ratio", "wilson95"]
    assert data["cells"][1]["y2"] is None  # unbounded cell serialized as null
    r = data["ratios"][0]
    assert abs(r["mu_ratio"] - (MU_TOTAL - 0.5) / MU_TOTAL) < 1e-9


def test_equidist_report_empty():
    rec = _records(40)
    rec = rec[:0]
    spec = equal_measure_partition(2, 1)
    rep = equidist_report(rec, spec, [("all", Rank2Region.full())], X=40)
    assert rep.N == 0
    assert rep.ratios[0]["ratio"] is None
    report_to_json(rep)


def test_c3_stream_is_degenerate_control():
    # cyclic cubic fields: maximal rings carry the full order-3 symmetry, so
    # the maximal square-discriminant stream is pinned to the hexagonal point
    rec = enumerate_classes(
        EnumerationTask(xmax=10**4, signature="0", include_c3=True, maximal_only=True)
    )
    c3 = rec[rec["s3"] == 0]
    assert len(c3) > 3
    assert np.allclose(c3["x"], 0.5, atol=1e-9)
    assert np.allclose(c3["y"], math.sqrt(3) / 2, atol=1e-9)
    spec = equal_measure_partition(4, 6)
    counts, overflow = accumulate(c3["x"], c3["y"], spec)
    assert overflow == 0
    from shapelab.measure import locate_cell
    from shapelab.shape import UHPoint

    hexcell = locate_cell(UHPoint(0.5, math.sqrt(3) / 2), spec)
    assert counts[hexcell] == len(c3)  # all mass at the hexagonal point


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert abs((lo + hi) / 2 - 0.5) < 1e-12
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0, abs=1e-12) or lo >= 0
    assert hi < 0.05
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_congruence_ratio_report():
    rec = _records(20000, "1")
    pred = CongruencePredicate(
        2, [(0, b, c, d) for b in range(2) for c in range(2) for d in range(2)]
    )
    rows = congruence_ratio_report(
        rec,
        [
            ("everything", "all", None),
            ("maximal", "maximal", None),
            ("a even", pred, None),
        ],
    )
    assert rows[0]["ratio"] == 1.0 and rows[0]["expected"] == 1.0
    assert rows[1]["expected"] == pytest.approx(maximal_density_product(100), rel=1e-12)
    assert 0 < rows[2]["ratio"] < 1
    k = int((rec["a"] % 2 == 0).sum())
    assert rows[2]["N_W"] == k


def test_ks_critical_value():
    # 1% asymptotic critical coefficient 1.6276
    assert ks_critical(10**6, 0.01) == pytest.approx(1.6276 / 1000, rel=1e-3)
