import math

import numpy as np
import pytest

from shapelab.measure import (
    MU_TOTAL,
    PartitionSpec,
    Rank2Region,
    equal_measure_partition,
    locate_cell,
    marginal_cdfs,
    mu_measure,
    sample_mu,
    sample_mu_array,
    x_cdf,
    y_cdf,
    y_tail,
)
from shapelab.shape import UHPoint
from shapelab.stats import ks_critical, ks_statistic


def test_mu_measure_closed_forms():
    assert abs(mu_measure(Rank2Region.full()) - math.pi / 6) < 1e-9
    assert abs(mu_measure(Rank2Region.box(0, 0.5, 2, 4)) - 0.125) < 1e-12
    assert abs(mu_measure(Rank2Region.box(0, 0.5, 1, math.inf)) - 0.5) < 1e-12
    below = mu_measure(Rank2Region.box(0, 0.5, 0, 1))
    assert abs(below - (math.pi / 6 - 0.5)) < 1e-9


def test_mu_additivity():
    rng = np.random.default_rng(3)
    for _ in range(40):
        x1, x2 = np.sort(rng.uniform(0, 0.5, 2))
        xm = rng.uniform(x1, x2)
        y1 = rng.uniform(0.5, 2.5)
        y2 = y1 + rng.uniform(0.1, 4)
        whole = mu_measure(Rank2Region.box(x1, x2, y1, y2))
        parts = mu_measure(Rank2Region.box(x1, xm, y1, y2)) + mu_measure(
            Rank2Region.box(xm, x2, y1, y2)
        )
        assert abs(whole - parts) < 1e-9


def test_partition_breakpoints_and_masses():
    spec = equal_measure_partition(1, 1)
    assert spec.ncells == 1
    assert abs(spec.cell_mu[0] - math.pi / 6) < 1e-9

    spec = equal_measure_partition(2, 1)
    assert abs(spec.x_breaks[1] - math.sin(math.pi / 12)) < 1e-12
    assert abs(spec.x_breaks[1] - 0.2588190451) < 1e-9

    spec = equal_measure_partition(4, 6)
    assert spec.ncells == 24
    for m in spec.cell_mu:
        assert abs(m - math.pi / 144) < 1e-9
    assert abs(sum(spec.cell_mu) - math.pi / 6) < 1e-9
    for yb in spec.y_breaks:
        assert all(a < b for a, b in zip(yb, yb[1:]))


def test_locate_cell_rules():
    spec = equal_measure_partition(1, 1)
    assert locate_cell(UHPoint(0.5, math.sqrt(3) / 2), spec) == 0

    spec = equal_measure_partition(2, 1)
    # boundary x exactly at the breakpoint goes to the lower column
    assert locate_cell(UHPoint(0.2588190451, 1.5), spec) == 0
    assert locate_cell(UHPoint(0.26, 1.5), spec) == 1

    spec = equal_measure_partition(4, 6)
    idx = locate_cell(UHPoint(0.3, 1.05357), spec)
    # oracle: recompute from the stored breakpoints
    col = max(np.searchsorted(spec.x_breaks, 0.3, side="left") - 1, 0)
    row = max(np.searchsorted(spec.y_breaks[col], 1.05357, side="left") - 1, 0)
    assert idx == col * 6 + row

    with pytest.raises(ValueError):
        locate_cell(UHPoint(0.4, 0.5), spec)  # below the unit circle


def test_marginal_cdfs_values():
    cdf_x, tail = marginal_cdfs()
    assert cdf_x(0.0) == 0.0
    assert abs(cdf_x(0.25) - 6 * math.asin(0.25) / math.pi) < 1e-12
    assert abs(cdf_x(0.25) - 0.4825837395) < 1e-9
    assert abs(cdf_x(0.5) - 1.0) < 1e-12
    assert abs(tail(1.0) - 3 / math.pi) < 1e-12
    assert abs(tail(1.0) - 0.95493) < 5e-6
    with pytest.raises(ValueError):
        cdf_x(0.7)
    with pytest.raises(ValueError):
        tail(0.5)
    # y-cdf continuity at the crossover
    assert abs(y_cdf(1.0 - 1e-12) - y_cdf(1.0)) < 1e-9


def test_sampler_ks_and_acceptance():
    rng = np.random.default_rng(12345)
    n = 10**6
    xs, ys, rate = sample_mu_array(rng, n)
    assert abs(rate - 0.9069) < 1e-3

    ks = ks_statistic(xs[:200000], x_cdf)
    assert ks < ks_critical(200000, 0.01)

    # tail at t in {1, 2, 4} within 3 binomial standard deviations
    for t in (1.0, 2.0, 4.0):
        p = y_tail(t)
        emp = float((ys > t).mean())
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(emp - p) <= 3.5 * sigma

    ksy = ks_statistic(ys[:200000], y_cdf)
    assert ksy < ks_critical(200000, 0.01)


def test_sample_mu_scalar():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = sample_mu(rng)
        assert p.in_domain()
