"""Equidistribution reports: cell histograms against the shape measure,
chi-square and Kolmogorov-Smirnov statistics, and count-ratio tests with
Wilson intervals."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .measure import (
    MU_TOTAL,
    PartitionSpec,
    Rank2Region,
    locate_cells_array,
    mu_measure,
    x_cdf,
    y_cdf,
)
from .maximality import CongruencePredicate, local_density, primes_upto

__all__ = [
    "StatsReport",
    "accumulate",
    "equidist_report",
    "congruence_ratio_report",
    "wilson_interval",
    "ks_statistic",
    "report_to_json",
]

_Z95 = 1.959963984540054


def wilson_interval(k: int, n: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (center - half, center + half)


def ks_statistic(sample: np.ndarray, cdf) -> float:
    """One-sample KS statistic sup |F_n - F| against a callable CDF."""
    xs = np.sort(np.asarray(sample, dtype=float))
    n = len(xs)
    if n == 0:
        return 0.0
    F = np.array([cdf(v) for v in xs])
    up = np.max(np.arange(1, n + 1) / n - F)
    dn = np.max(F - np.arange(0, n) / n)
    return float(max(up, dn))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value sqrt(-ln(alpha/2)/2)/sqrt(n)."""
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(n)


def accumulate(x, y, spec: PartitionSpec):
    """Histogram shape points into partition cells.

    Returns (counts, overflow): out-of-domain points (beyond a 1e-8 tolerance)
    land in the overflow bucket, which must stay 0 in production runs.
    Deterministic under any stream partitioning (pure count merge).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (
        (x >= -1e-8)
        & (x <= 0.5 + 1e-8)
        & (y > 0)
        & (x * x + y * y >= 1 - 1e-8)
    )
    overflow = int((~ok).sum())
    counts = np.zeros(spec.ncells, dtype=np.int64)
    if ok.any():
        idx = locate_cells_array(x[ok], y[ok], spec)
        counts += np.bincount(idx, minlength=spec.ncells)
    return counts, overflow


@dataclass
class StatsReport:
    X: int
    i: str
    filters: dict
    cells: list
    chisq: float
    dof: int
    ks_x: float
    ks_ytail: float
    ratios: list
    N: int = 0
    overflow: int = 0
    max_rel_dev: float = 0.0

    def to_json_dict(self) -> dict:
        """Stable key order per the report schema; infinite bounds become null."""
        return {
            "X": self.X,
            "i": self.i,
            "filters": self.filters,
            "cells": self.cells,
            "chisq": self.chisq,
            "dof": self.dof,
            "ks_x": self.ks_x,
            "ks_ytail": self.ks_ytail,
            "ratios": self.ratios,
        }


def report_to_json(rep: StatsReport) -> str:
    if rep.overflow:
        raise ValueError(f"{rep.overflow} shape points fell outside the domain")
    return json.dumps(rep.to_json_dict(), allow_nan=False)


def _num(v: float):
    if v is None or (isinstance(v, float) and math.isinf(v)):
        return None
    return float(v)


def equidist_report(records, spec: PartitionSpec, regions=(), X: int | None = None) -> StatsReport:
    """Cell histogram of record shapes against mu, plus count ratios for the
    requested regions.

    records: structured array with fields x, y, disc (from tabulate or ingest);
    regions: iterable of (name, Rank2Region).
    """
    x = np.asarray(records["x"], dtype=float)
    y = np.asarray(records["y"], dtype=float)
    N = len(x)
    counts, overflow = accumulate(x, y, spec)
    if int(counts.sum()) + overflow != N:
        raise AssertionError("histogram total does not match input size")

    cells = []
    chisq = 0.0
    maxdev = 0.0
    for j, cell in enumerate(spec.cells):
        mu_j = spec.cell_mu[j]
        expected = N * mu_j / MU_TOTAL
        cnt = int(counts[j])
        rel = (cnt - expected) / expected if expected > 0 else 0.0
        maxdev = max(maxdev, abs(rel))
        if expected > 0:
            chisq += (cnt - expected) ** 2 / expected
        (x1, x2, y1, y2) = cell.rects[0]
        cells.append(
            {
                "x1": _num(x1),
                "x2": _num(x2),
                "y1": _num(y1),
                "y2": _num(y2),
                "mu": float(mu_j),
                "count": cnt,
                "expected": float(expected),
                "rel_dev": float(rel),
            }
        )

    ks_x = ks_statistic(x, x_cdf) if N else 0.0
    ks_y = ks_statistic(y, y_cdf) if N else 0.0

    ratios = []
    for name, region in regions:
        inW = region.contains_array(x, y)
        nW = int(inW.sum())
        muW = mu_measure(region)
        lo, hi = wilson_interval(nW, N) if N else (0.0, 1.0)
        ratios.append(
            {
                "region": name,
                "N_W": nW,
                "N": N,
                "ratio": (nW / N) if N else None,
                "mu_ratio": muW / MU_TOTAL,
                "wilson95": [lo, hi],
            }
        )

    sigs = set(np.asarray(records["i"]).tolist()) if N else set()
    i_str = "both" if sigs == {0, 1} else ("1" if sigs == {1} else "0" if sigs == {0} else "empty")
    filters = {
        "maximal_only": bool(N and np.all(records["maximal"] == 1)),
        "include_c3": bool(N and np.any(records["s3"] == 0)),
    }
    if X is None:
        X = int(np.abs(records["disc"]).max()) + 1 if N else 0
    return StatsReport(
        X=int(X),
        i=i_str,
        filters=filters,
        cells=cells,
        chisq=float(chisq),
        dof=spec.ncells - 1,
        ks_x=float(ks_x),
        ks_ytail=float(ks_y),
        ratios=ratios,
        N=N,
        overflow=overflow,
        max_rel_dev=float(maxdev),
    )


def maximal_density_product(pmax: int = 100) -> float:
    """prod_{p < pmax} (1 - p^-2)(1 - p^-3), the maximality density."""
    out = 1.0
    for p in primes_upto(pmax - 1):
        out *= (1 - p**-2) * (1 - p**-3)
    return out


def congruence_ratio_report(records_all, tests) -> list[dict]:
    """Count-ratio report for congruence-type subsets of an all-orders stream.

    tests: iterable of (name, selector, expected) where selector is "all",
    "maximal", or a CongruencePredicate on canonical coefficient vectors, and
    expected is the limiting density (None to fill in the known value).
    """
    N = len(records_all)
    out = []
    for name, selector, expected in tests:
        if selector == "all":
            k = N
            exp = 1.0 if expected is None else expected
        elif selector == "maximal":
            k = int((records_all["maximal"] == 1).sum())
            exp = maximal_density_product(100) if expected is None else expected
        elif isinstance(selector, CongruencePredicate):
            m = selector.m
            resid = np.stack(
                [records_all[f] % m for f in ("a", "b", "c", "d")], axis=1
            ).astype(np.int64)
            rv = np.ascontiguousarray(resid).view([("", np.int64)] * 4).ravel()
            targets = np.array(sorted(selector.residues), dtype=np.int64)
            tv = np.ascontiguousarray(targets).view([("", np.int64)] * 4).ravel()
            k = int(np.isin(rv, tv).sum())
            exp = float(selector.density()) if expected is None else expected
        else:
            raise ValueError(f"unknown selector {selector!r}")
        lo, hi = wilson_interval(k, N) if N else (0.0, 1.0)
        out.append(
            {
                "region": name,
                "N_W": k,
                "N": N,
                "ratio": (k / N) if N else None,
                "expected": exp,
                "wilson95": [lo, hi],
            }
        )
    return out
