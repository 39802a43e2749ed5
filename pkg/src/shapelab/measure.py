"""The invariant measure on the rank-2 space of shapes.

Chart: the domain F2 = {0 <= x <= 1/2, x^2 + y^2 >= 1} in the upper
half-plane with density dx dy / y^2, total mass pi/6.  Only measure ratios
are ever consumed downstream, so the normalization is a free choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .shape import UHPoint, UH_TOL

__all__ = [
    "Rank2Region",
    "PartitionSpec",
    "MU_TOTAL",
    "mu_measure",
    "equal_measure_partition",
    "locate_cell",
    "sample_mu",
    "sample_mu_array",
    "marginal_cdfs",
    "x_cdf",
    "y_cdf",
    "y_tail",
]

MU_TOTAL = math.pi / 6
_Y_FLOOR = math.sqrt(3) / 2


def _circ(x: float) -> float:
    return math.sqrt(max(0.0, 1.0 - x * x))


@dataclass(frozen=True)
class Rank2Region:
    """Finite union of rectangles [x1,x2] x [y1,y2], implicitly intersected
    with F2.  y2 may be inf.  Rectangles must be disjoint up to measure zero."""

    rects: tuple  # of (x1, x2, y1, y2)

    def __post_init__(self):
        for x1, x2, y1, y2 in self.rects:
            if not (x1 <= x2 and 0 <= y1 <= y2):
                raise ValueError(f"bad rectangle {(x1, x2, y1, y2)}")
            if math.isinf(x1) or math.isinf(x2) or math.isinf(y1):
                raise ValueError("only y2 may be infinite")

    @staticmethod
    def box(x1, x2, y1, y2) -> "Rank2Region":
        return Rank2Region(rects=((float(x1), float(x2), float(y1), float(y2)),))

    @staticmethod
    def full() -> "Rank2Region":
        return Rank2Region.box(0.0, 0.5, 0.0, math.inf)

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        for x1, x2, y1, y2 in self.rects:
            if x1 - tol <= x <= x2 + tol and y1 - tol <= y <= y2 + tol:
                return True
        return False

    def contains_array(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        out = np.zeros(x.shape, dtype=bool)
        for x1, x2, y1, y2 in self.rects:
            out |= (x >= x1) & (x <= x2) & (y >= y1) & (y <= y2)
        return out


def _rect_mu(x1, x2, y1, y2) -> float:
    """mu of [x1,x2] x [y1,y2] intersected with F2."""
    x1 = max(0.0, x1)
    x2 = min(0.5, x2)
    if x2 <= x1 or y2 <= y1:
        return 0.0
    inv_y2 = 0.0 if math.isinf(y2) else 1.0 / y2
    if y1 >= 1.0:
        # rectangle avoids the circular boundary entirely
        return (x2 - x1) * (1.0 / y1 - inv_y2)

    def integrand(x):
        lo = max(y1, _circ(x))
        if math.isinf(y2) or y2 > lo:
            return 1.0 / lo - inv_y2
        return 0.0

    pts = []
    if 0.0 < y1 < 1.0:
        xc = math.sqrt(1.0 - y1 * y1)
        if x1 < xc < x2:
            pts.append(xc)
    if not math.isinf(y2) and y2 < 1.0:
        xc2 = math.sqrt(1.0 - y2 * y2)
        if x1 < xc2 < x2:
            pts.append(xc2)
    val, err = quad(integrand, x1, x2, points=sorted(pts) or None,
                    epsabs=1e-12, epsrel=1e-12, limit=200)
    if err > 1e-9:
        raise ArithmeticError(f"mu integration error {err} too large")
    return val


def mu_measure(region: Rank2Region) -> float:
    """Measure of a region; rectangles above y=1 use the closed form."""
    return sum(_rect_mu(*r) for r in region.rects)


def x_cdf(t: float) -> float:
    """CDF of the x-marginal of normalized mu: 6*arcsin(t)/pi on [0, 1/2]."""
    if not -1e-12 <= t <= 0.5 + 1e-12:
        raise ValueError(f"x={t} outside [0, 1/2]")
    return 6.0 * math.asin(min(max(t, 0.0), 0.5)) / math.pi


def y_tail(t: float) -> float:
    """P(Y > t) = 3/(pi t) for t >= 1."""
    if t < 1.0:
        raise ValueError("tail formula valid for t >= 1 only")
    return 3.0 / (math.pi * t)


def y_cdf(t: float) -> float:
    """Full CDF of the y-marginal of normalized mu."""
    if t <= _Y_FLOOR:
        return 0.0
    if t >= 1.0:
        return 1.0 - 3.0 / (math.pi * t)
    xc = math.sqrt(1.0 - t * t)
    return (6.0 / math.pi) * (math.pi / 6 - math.asin(xc) - (0.5 - xc) / t)


def marginal_cdfs():
    return x_cdf, y_tail


def _column_mass_above(u: float, v: float, Y: float) -> float:
    """mu of {u <= x <= v} ∩ F2 ∩ {y >= Y}."""
    if Y <= _Y_FLOOR:
        Y = 0.0
    if Y >= 1.0:
        return (v - u) / Y
    xc = math.sqrt(1.0 - Y * Y) if Y > 0 else 1.0
    total = 0.0
    hi = min(v, xc)
    if hi > u:  # circle above Y here
        total += math.asin(hi) - math.asin(u)
    if v > xc >= u or (Y > 0 and v > xc):
        lo = max(u, xc)
        if v > lo:
            total += (v - lo) / Y
    elif Y > 0 and xc < u:
        total += (v - u) / Y
    return total


@dataclass(frozen=True)
class PartitionSpec:
    """Equal-measure grid over F2: kx columns (closed-form breakpoints from the
    x-marginal), each split into ky equal-mass cells by quantile inversion."""

    kx: int
    ky: int
    x_breaks: tuple
    y_breaks: tuple  # per column, length ky+1, starts at 0.0 ends at inf
    cell_mu: tuple   # flat, index = col*ky + row
    cells: tuple     # flat tuple of Rank2Region

    @property
    def ncells(self) -> int:
        return self.kx * self.ky


def equal_measure_partition(kx: int, ky: int) -> PartitionSpec:
    if kx < 1 or ky < 1:
        raise ValueError("kx, ky >= 1 required")
    x_breaks = [math.sin(j * math.pi / (6 * kx)) for j in range(kx + 1)]
    x_breaks[0], x_breaks[-1] = 0.0, 0.5
    col_mass = MU_TOTAL / kx
    cell_mass = col_mass / ky
    y_breaks = []
    cells = []
    cell_mu = []
    for j in range(kx):
        u, v = x_breaks[j], x_breaks[j + 1]
        breaks = [0.0]
        for k in range(1, ky):
            target = col_mass * (1 - k / ky)  # mass above the k-th break
            # above(Y) = (v-u)/Y when Y >= 1: invert in closed form if valid
            Ycf = (v - u) / target if target > 0 else math.inf
            if Ycf >= 1.0:
                Y = Ycf
            else:
                Y = brentq(
                    lambda t: _column_mass_above(u, v, t) - target,
                    _circ(v) * (1 - 1e-12), 1.0 + 1e-12, xtol=1e-13, rtol=1e-14,
                )
            breaks.append(float(Y))
        breaks.append(math.inf)
        y_breaks.append(tuple(breaks))
        for k in range(ky):
            cell = Rank2Region.box(u, v, breaks[k], breaks[k + 1])
            m = mu_measure(cell)
            if abs(m - cell_mass) > 1e-9:
                raise ArithmeticError(
                    f"cell ({j},{k}) mass {m} != {cell_mass} beyond tolerance"
                )
            cells.append(cell)
            cell_mu.append(m)
    total = sum(cell_mu)
    if abs(total - MU_TOTAL) > 1e-9:
        raise ArithmeticError(f"partition mass {total} != pi/6")
    return PartitionSpec(
        kx=kx,
        ky=ky,
        x_breaks=tuple(x_breaks),
        y_breaks=tuple(y_breaks),
        cell_mu=tuple(cell_mu),
        cells=tuple(cells),
    )


def locate_cell(p: UHPoint, spec: PartitionSpec) -> int:
    """Flat cell index (column*ky + row); boundary points go to the lower index."""
    if not p.in_domain(tol=UH_TOL * 10):
        raise ValueError(f"point {p} outside the fundamental domain")
    x = min(max(p.x, 0.0), 0.5)
    col = int(np.searchsorted(spec.x_breaks, x, side="left")) - 1
    col = min(max(col, 0), spec.kx - 1)
    yb = spec.y_breaks[col]
    row = int(np.searchsorted(yb, p.y, side="left")) - 1
    row = min(max(row, 0), spec.ky - 1)
    return col * spec.ky + row


def locate_cells_array(x, y, spec: PartitionSpec):
    """Vectorized locate_cell for in-domain points (no validation)."""
    x = np.minimum(np.maximum(np.asarray(x, dtype=float), 0.0), 0.5)
    y = np.asarray(y, dtype=float)
    col = np.clip(np.searchsorted(spec.x_breaks, x, side="left") - 1, 0, spec.kx - 1)
    row = np.empty_like(col)
    for j in range(spec.kx):
        m = col == j
        if np.any(m):
            row[m] = np.clip(
                np.searchsorted(spec.y_breaks[j], y[m], side="left") - 1, 0, spec.ky - 1
            )
    return col * spec.ky + row


def sample_mu_array(rng: np.random.Generator, n: int):
    """n points distributed per normalized mu; returns (x, y, acceptance_rate)."""
    xs = np.empty(n)
    ys = np.empty(n)
    filled = 0
    proposals = 0
    accepted = 0
    while filled < n:
        m = max(1024, int((n - filled) * 1.15))
        x = rng.random(m) * 0.5
        y = _Y_FLOOR / (1.0 - rng.random(m))
        ok = x * x + y * y >= 1.0
        proposals += m
        accepted += int(ok.sum())
        k = min(int(ok.sum()), n - filled)
        xs[filled : filled + k] = x[ok][:k]
        ys[filled : filled + k] = y[ok][:k]
        filled += k
    return xs, ys, accepted / proposals


def sample_mu(rng: np.random.Generator) -> UHPoint:
    """One mu-distributed point via rejection from the product proposal."""
    while True:
        x = rng.random() * 0.5
        y = _Y_FLOOR / (1.0 - rng.random())
        if x * x + y * y >= 1.0:
            return UHPoint(float(x), float(y))
