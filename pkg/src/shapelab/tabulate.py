"""Enumeration of GL2(Z)-classes of irreducible binary cubic forms.

Canonical orbit section
-----------------------
Every nondegenerate irreducible form is reduced against a positive definite
quadratic: the integer Hessian for disc > 0, the (float, with exact algebraic
fallback on boundary ties) rank-2 shape Gram for disc < 0.  Among all
group images of a form whose reduction data is weakly reduced
(|2B| <= A <= C), the canonical representative is the lexicographically
smallest coefficient tuple with positive leading coefficient.  The residual
sweep uses the finite set of small unimodular matrices that preserve weak
reducedness, so the section is orbit-invariant; boundary ties for disc < 0
are decided exactly with Sturm sequences at the real root.

Enumeration strategy
--------------------
A superset scan visits, for each signature, exact-integer coefficient boxes
derived from the reduction inequalities:

disc > 0: at a weakly Hessian-reduced representative with a >= 1,
  P = b^2 - 3ac <= sqrt(disc), all roots lie within 1/2 + sqrt(2P)/a of the
  origin, giving a <= (2/3)^{3/2} X^{1/4}, |b| <= 3a/2 + 3 sqrt(2) X^{1/4},
  c determined by P in [1, sqrt(X)], and |bc - 9ad| <= P pinning d to a short
  interval.

disc < 0: reduce the positive definite quadratic factor of f (monic x^2+pxy+qy^2
  with |p| <= 1 <= q at the reduced position).  Then v^2 >= 3/4 forces
  a <= (16/27)^{1/4} X^{1/4}, the real root alpha lies in a window of width 2
  around -b/a, and d = -(a alpha^3 + b alpha^2 + c alpha) maps that window to a
  short d-interval.

Both scans intersect the loop windows with the exact band |disc| < X, then
filter, canonicalize and deduplicate; completeness is enforced by the brute
oracle at 10^4 and a bounds-inflation audit.  brute_force_classes is the
independent completeness oracle: per-coefficient boxes at twice the derived
bounds, no reduction-position windows, plus a generator-word search validating
that equivalent forms canonicalize identically.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .exact import CubicNumberField
from .forms import (
    BinaryCubicForm,
    act_coeffs,
    content,
    discriminant,
    is_irreducible,
)
from .maximality import is_maximal_at_array, is_maximal, primes_upto, CongruencePredicate

__all__ = [
    "EnumerationTask",
    "FieldClassRecord",
    "canonicalize",
    "is_canonical",
    "enumerate_classes",
    "brute_force_classes",
    "records_dtype",
    "write_forms_csv",
    "read_forms_csv",
]

REC_DTYPE = np.dtype(
    [
        ("a", np.int64),
        ("b", np.int64),
        ("c", np.int64),
        ("d", np.int64),
        ("disc", np.int64),
        ("i", np.uint8),
        ("s3", np.uint8),
        ("maximal", np.uint8),
        ("x", np.float64),
        ("y", np.float64),
    ]
)


def records_dtype():
    return REC_DTYPE


@dataclass(frozen=True)
class FieldClassRecord:
    """One GL2(Z)-class of irreducible forms: canonical form plus invariants."""

    a: int
    b: int
    c: int
    d: int
    disc: int
    i: int
    s3: bool
    maximal: bool
    x: float
    y: float


@dataclass(frozen=True)
class EnumerationTask:
    xmax: int
    signature: str = "both"  # "0", "1", "both"
    maximal_only: bool = False
    include_c3: bool = False
    congruence: CongruencePredicate | None = None

    def __post_init__(self):
        if self.xmax < 1:
            raise ValueError("xmax >= 1 required")
        if self.xmax > 10**9:
            raise ValueError("xmax beyond supported desk scale (10^9)")
        if self.signature not in ("0", "1", "both"):
            raise ValueError("signature must be '0', '1' or 'both'")


# -- small unimodular matrices for the residual sweep -------------------------


def _small_unimodular(bound: int):
    out = []
    rng = range(-bound, bound + 1)
    for p in rng:
        for q in rng:
            for r in rng:
                for s in rng:
                    if p * s - q * r in (1, -1):
                        out.append(((p, q), (r, s)))
    return out


_U1 = _small_unimodular(1)
_U2 = _small_unimodular(2)


def _gram_transform_num(G, u):
    (A, B), (_, C) = G
    (p, q), (r, s) = u
    A2 = A * p * p + 2 * B * p * r + C * r * r
    B2 = A * p * q + B * (p * s + q * r) + C * r * s
    C2 = A * q * q + 2 * B * q * s + C * s * s
    return ((A2, B2), (B2, C2))


def _reduce_gram_scalar(A, B, C):
    """Column-op reduction of a positive definite Gram; returns M (=((p,q),(r,s)))
    with M^T G M weakly reduced, B >= 0, plus the reduced entries.  Exact on ints."""
    p, q, r, s = 1, 0, 0, 1
    for _ in range(20000):
        if 2 * abs(B) <= A <= C:
            break
        t = (2 * B + A) // (2 * A) if isinstance(A, int) else math.floor((2 * B + A) / (2 * A))
        if t:
            B, C = B - t * A, C - 2 * t * B + t * t * A
            q, s = q - t * p, s - t * r
        if A > C:
            A, C = C, A
            p, q, r, s = q, p, s, r
    else:
        raise ArithmeticError("Gram reduction did not terminate")
    if B < 0:
        B, q, s = -B, -q, -s
    return (p, q, r, s), (A, B, C)


def _i1_float_gram(a, b, c, d, alpha):
    """Rank-2 shape Gram entries for disc<0 from the real root alpha.
    Vectorizes over ndarrays."""
    q2 = -d / (a * alpha)                   # |beta|^2
    u = (-b / a - alpha) / 2.0              # Re beta
    th1 = (a * alpha + b) * alpha + c
    A = a * a * alpha * alpha + 2 * a * a * q2 - b * b / 3.0
    B = a * alpha * th1 + 2 * a * a * u * q2 + 2 * a * b * q2 + 2 * a * c * u + b * c / 3.0
    C = (
        th1 * th1
        + 2
        * (
            a * a * q2 * q2
            + 2 * a * b * u * q2
            + a * c * (4 * u * u - 2 * q2)
            + b * b * q2
            + 2 * b * c * u
            + c * c
        )
        - c * c / 3.0
    )
    return A, B, C


def _real_root_neg_disc(a, b, c, d):
    """The single real root for disc<0, vectorized (stable Cardano + Newton)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    p = c / a - b * b / (3 * a * a)
    q = 2 * b**3 / (27 * a**3) - b * c / (3 * a * a) + d / a
    delta = q * q / 4 + p**3 / 27
    delta = np.maximum(delta, 0.0)
    m = -q / 2
    s = m + np.where(m >= 0, 1.0, -1.0) * np.sqrt(delta)
    t1 = np.cbrt(s)
    small = np.abs(t1) < 1e-300
    t1 = np.where(small, 1.0, t1)
    t = np.where(small, np.cbrt(-q), t1 - p / (3 * t1))
    alpha = t - b / (3 * a)
    for _ in range(3):
        f = ((a * alpha + b) * alpha + c) * alpha + d
        df = (3 * a * alpha + 2 * b) * alpha + c
        alpha = alpha - np.where(df != 0, f / np.where(df != 0, df, 1.0), 0.0)
    return alpha


def _real_roots_pos_disc(a, b, c, d):
    """All three real roots for disc>0, vectorized (trigonometric form)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    p = c / a - b * b / (3 * a * a)
    q = 2 * b**3 / (27 * a**3) - b * c / (3 * a * a) + d / a
    p = np.minimum(p, -1e-300)
    mm = 2 * np.sqrt(-p / 3)
    arg = np.clip(3 * q / (p * mm), -1.0, 1.0)
    phi = np.arccos(arg)
    roots = []
    for k in range(3):
        t = mm * np.cos((phi - 2 * math.pi * k) / 3.0)
        alpha = t - b / (3 * a)
        for _ in range(2):
            f = ((a * alpha + b) * alpha + c) * alpha + d
            df = (3 * a * alpha + 2 * b) * alpha + c
            alpha = alpha - np.where(np.abs(df) > 1e-300, f / np.where(df != 0, df, 1.0), 0.0)
        roots.append(alpha)
    return roots


# -- scalar canonicalization ---------------------------------------------------


def _float_gram_of(f: BinaryCubicForm):
    D = discriminant(f)
    a, b, c, d = f.coeffs()
    if D > 0:
        h_P = b * b - 3 * a * c
        h_Q = b * c - 9 * a * d
        h_R = c * c - 3 * b * d
        return ((2 * h_P, h_Q), (h_Q, 2 * h_R)), True
    alpha = float(_real_root_neg_disc(a, b, c, d))
    A, B, C = _i1_float_gram(float(a), float(b), float(c), float(d), alpha)
    return ((A, B), (B, C)), False


def _weakly_reduced_num(G, margin=0.0):
    (A, B), (_, C) = G
    return 2 * abs(B) <= A + margin and A <= C + margin


def canonicalize(f: BinaryCubicForm) -> BinaryCubicForm:
    """Canonical representative of the GL2(Z)-class of an irreducible form."""
    D = discriminant(f)
    if D == 0:
        raise ValueError("zero discriminant")
    if not is_irreducible(f):
        raise ValueError("canonicalize requires an irreducible form")
    G, exact_ints = _float_gram_of(f)
    (p, q, r, s), (A, B, C) = _reduce_gram_scalar(G[0][0], G[0][1], G[1][1])
    Gred = ((A, B), (B, C))
    h = BinaryCubicForm(*act_coeffs(p, r, q, s, *f.coeffs()))  # act by M^T

    scale = max(abs(A), abs(C), 1e-300 if not exact_ints else 1)
    margin = 0 if exact_ints else 1e-7 * scale
    ambiguous = False
    cands = []
    for u in _U2:
        Gu = _gram_transform_num(Gred, u)
        (Au, Bu), (_, Cu) = Gu
        s1 = Au - 2 * abs(Bu)
        s2 = Cu - Au
        if exact_ints:
            ok = s1 >= 0 and s2 >= 0
        else:
            if min(abs(s1), abs(s2)) <= margin and not (s1 < -margin or s2 < -margin):
                ambiguous = True
                continue
            ok = s1 > -margin and s2 > -margin
        if ok:
            (up, uq), (ur, us) = u
            cands.append(act_coeffs(up, ur, uq, us, *h.coeffs()))  # act by u^T

    if ambiguous and not exact_ints:
        a, b, c, d = f.coeffs()
        K = CubicNumberField(a, b, c, d)
        Ge = K.shape_gram_elems()
        # transform exactly to the reduced position found by floats
        M0 = ((p, q), (r, s))
        Ge = K.gram_transform(Ge, M0)
        cands = []
        for u in _U2:
            if K.weakly_reduced(K.gram_transform(Ge, u)):
                (up, uq), (ur, us) = u
                cands.append(act_coeffs(up, ur, uq, us, *h.coeffs()))
    pos = [t for t in cands if t[0] > 0]
    if not pos:
        raise ArithmeticError("no positive-leading candidate found")
    return BinaryCubicForm(*min(pos))


def is_canonical(f: BinaryCubicForm) -> bool:
    return canonicalize(f) == f


# -- vectorized batch canonicalization ----------------------------------------


def _reduce_gram_arrays(A, B, C):
    """Vectorized column-op reduction; A,B,C same-dtype arrays (int64 or float)."""
    n = A.shape[0]
    p = np.ones(n, dtype=np.int64)
    q = np.zeros(n, dtype=np.int64)
    r = np.zeros(n, dtype=np.int64)
    s = np.ones(n, dtype=np.int64)
    A, B, C = A.copy(), B.copy(), C.copy()
    for _ in range(128):
        done = (2 * np.abs(B) <= A) & (A <= C)
        if done.all():
            break
        act_m = ~done
        if np.issubdtype(A.dtype, np.integer):
            t = np.where(act_m, (2 * B + A) // (2 * A), 0)
        else:
            t = np.where(act_m, np.floor((2 * B + A) / (2 * A)), 0.0)
        nz = t != 0
        if nz.any():
            Bn = B - t * A
            Cn = C - 2 * t * B + t * t * A
            B, C = np.where(nz, Bn, B), np.where(nz, Cn, C)
            ti = t.astype(np.int64)
            q = np.where(nz, q - ti * p, q)
            s = np.where(nz, s - ti * r, s)
        sw = act_m & (A > C)
        if sw.any():
            A2 = np.where(sw, C, A)
            C2 = np.where(sw, A, C)
            A, C = A2, C2
            p2 = np.where(sw, q, p)
            q2 = np.where(sw, p, q)
            r2 = np.where(sw, s, r)
            s2 = np.where(sw, r, s)
            p, q, r, s = p2, q2, r2, s2
    else:
        raise ArithmeticError("vectorized Gram reduction did not terminate")
    neg = B < 0
    B = np.abs(B)
    q = np.where(neg, -q, q)
    s = np.where(neg, -s, s)
    return (A, B, C), (p, q, r, s)


def _canonicalize_batch(a, b, c, d):
    """Canonical rows for irreducible forms (mixed signature), vectorized with
    a scalar fallback for reduction-boundary cases.  Returns (N,4) int64."""
    n = len(a)
    out = np.empty((n, 4), dtype=np.int64)
    D = (
        18 * a * b * c * d
        + b * b * c * c
        - 4 * a * c**3
        - 4 * b**3 * d
        - 27 * a * a * d * d
    )
    pos = D > 0
    slow = np.zeros(n, dtype=bool)

    for sig_mask, ints in ((pos, True), (~pos, False)):
        idx = np.nonzero(sig_mask)[0]
        if len(idx) == 0:
            continue
        aa, bb, cc, dd = a[idx], b[idx], c[idx], d[idx]
        if ints:
            P = bb * bb - 3 * aa * cc
            Q = bb * cc - 9 * aa * dd
            R = cc * cc - 3 * bb * dd
            A, B, C = 2 * P, Q.copy(), 2 * R
        else:
            alpha = _real_root_neg_disc(aa, bb, cc, dd)
            Af, Bf, Cf = _i1_float_gram(
                aa.astype(float), bb.astype(float), cc.astype(float), dd.astype(float), alpha
            )
            A, B, C = Af, Bf, Cf
        (Ar, Br, Cr), (p, q, r, s) = _reduce_gram_arrays(A, B, C)
        # boundary of the weak domain -> scalar exact path
        if ints:
            bdry = (Ar == 2 * Br) | (Ar == Cr)
        else:
            scale = np.maximum(np.abs(Ar), np.abs(Cr))
            m = 1e-7 * scale
            bdry = (np.abs(Ar - 2 * Br) <= m) | (np.abs(Cr - Ar) <= m)
        slow[idx[bdry]] = True
        # generic: act by M^T then pick min of the {I, diag(1,-1)} images with a>0
        ha, hb, hc, hd = act_coeffs(p, r, q, s, aa, bb, cc, dd)
        neg = ha < 0
        sign = np.where(neg, -1, 1)
        ha, hb, hc, hd = ha * sign, hb * sign, hc * sign, hd * sign
        flip = (hb > 0) | ((hb == 0) & (hd > 0))
        fs = np.where(flip, -1, 1)
        out[idx, 0] = ha
        out[idx, 1] = hb * fs
        out[idx, 2] = hc
        out[idx, 3] = hd * fs

    for j in np.nonzero(slow)[0]:
        g = canonicalize(BinaryCubicForm(int(a[j]), int(b[j]), int(c[j]), int(d[j])))
        out[j] = g.coeffs()
    return out


# -- coefficient bounds (see module docstring for the derivations) -------------


def _i0_bounds(X: int, scale: float = 1.0):
    amax = int(math.floor(scale * (2.0 / 3.0) ** 1.5 * X**0.25)) + 1
    return amax


def _i0_bmax(a: int, X: int, scale: float = 1.0) -> int:
    return int(math.floor(scale * (1.5 * a + 3.0 * math.sqrt(2.0) * X**0.25))) + 1


def _i1_bounds(X: int, scale: float = 1.0):
    amax = int(math.floor(scale * (16.0 / 27.0) ** 0.25 * X**0.25)) + 1
    return amax


def _i1_bmax(a: int, X: int, scale: float = 1.0) -> int:
    return int(math.floor(scale * (1.5 * a + X**0.25 / 3.0**0.25))) + 1


def _i1_aux(a: int, X: int, scale: float = 1.0):
    v2max = min(4.0 * X / (9.0 * a**4), (X / 4.0) ** (1.0 / 3.0) / a ** (4.0 / 3.0))
    s2max = max(0.0, math.sqrt(X / (3.0 * a**4)) - 0.75)
    alpha_max = 0.5 + math.sqrt(s2max)
    qmax = 0.25 + v2max
    cmax = int(math.floor(scale * scale * a * (qmax + alpha_max))) + 1
    return alpha_max * scale, cmax


def _ceil_div(x, y):
    return -((-x) // y)


def _disc_d_windows(a, b, c, X, want_positive):
    """d-intervals where the discriminant lies in (0, X) resp. (-X, 0).

    disc as a function of d is a downward parabola
    -27 a^2 d^2 + (18abc - 4b^3) d + (b^2 c^2 - 4 a c^3); each band is a union
    of at most two integer intervals, returned with +-1 float slack.
    Vectorized over c; returns (lo1, hi1, lo2, hi2) with hi < lo for empty.
    """
    a = float(a)
    b = float(b)
    c = np.asarray(c, dtype=float)
    A2 = 27.0 * a * a
    beta = 18.0 * a * b * c - 4.0 * b**3
    gamma = b * b * c * c - 4.0 * a * c**3
    vx = beta / (2 * A2)  # vertex
    # roots of disc = 0: -A2 d^2 + beta d + gamma = 0
    disc0 = beta * beta + 4.0 * A2 * gamma
    discX = beta * beta + 4.0 * A2 * (gamma - (-X))  # disc = -X
    discP = beta * beta + 4.0 * A2 * (gamma - X)     # disc = +X
    sq0 = np.sqrt(np.maximum(disc0, 0.0))
    r0m, r0p = (beta - sq0) / (2 * A2), (beta + sq0) / (2 * A2)
    if want_positive:
        # inside (r0m, r0p), minus middle where disc >= X
        has = disc0 > 0
        sqP = np.sqrt(np.maximum(discP, 0.0))
        rXm, rXp = (beta - sqP) / (2 * A2), (beta + sqP) / (2 * A2)
        hasP = discP > 0
        lo1 = np.where(has, np.floor(r0m) - 1, 1.0)
        hi1 = np.where(has, np.where(hasP, np.ceil(rXm) + 1, np.ceil(r0p) + 1), 0.0)
        lo2 = np.where(has & hasP, np.floor(rXp) - 1, 1.0)
        hi2 = np.where(has & hasP, np.ceil(r0p) + 1, 0.0)
    else:
        # outside [r0m, r0p] (when real), inside [rXm, rXp] for disc > -X
        sqX = np.sqrt(np.maximum(discX, 0.0))
        rXm, rXp = (beta - sqX) / (2 * A2), (beta + sqX) / (2 * A2)
        hasX = discX > 0
        has0 = disc0 > 0
        lo1 = np.where(hasX, np.floor(rXm) - 1, 1.0)
        hi1 = np.where(hasX, np.where(has0, np.ceil(r0m) + 1, np.ceil(rXp) + 1), 0.0)
        lo2 = np.where(hasX & has0, np.floor(r0p) - 1, 1.0)
        hi2 = np.where(hasX & has0, np.ceil(rXp) + 1, 0.0)
    return lo1, hi1, lo2, hi2


def _expand_windows(c, los, his, extra_lo=None, extra_hi=None):
    """Materialize (c_rep, d) pairs for up to two windows per c, intersected
    with an optional extra integer window."""
    cs, ds = [], []
    for lo, hi in zip(los, his):
        lo = lo.astype(np.int64)
        hi = hi.astype(np.int64)
        if extra_lo is not None:
            lo = np.maximum(lo, extra_lo)
            hi = np.minimum(hi, extra_hi)
        cnt = np.maximum(hi - lo + 1, 0)
        tot = int(cnt.sum())
        if tot == 0:
            continue
        c_rep = np.repeat(c, cnt)
        offs = np.arange(tot, dtype=np.int64) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        d = np.repeat(lo, cnt) + offs
        cs.append(c_rep)
        ds.append(d)
    if not cs:
        return (np.empty(0, dtype=np.int64),) * 2
    return np.concatenate(cs), np.concatenate(ds)


def _disc_vec(a, b, c, d):
    return (
        18 * a * b * c * d
        + b * b * c * c
        - 4 * a * c**3
        - 4 * b**3 * d
        - 27 * a * a * d * d
    )


def _reducible_mask(a_val: int, b, c, d, roots):
    """Exact rational-root screen given float roots; vectorized per a-block."""
    n = len(b)
    red = np.zeros(n, dtype=bool)
    divs = [q for q in range(1, abs(a_val) + 1) if a_val % q == 0]
    for root in roots:
        for qd in divs:
            pnum = np.rint(qd * root)
            ok = np.abs(qd * root - pnum) < 0.25
            pnum = pnum.astype(np.int64)
            val = (
                a_val * pnum**3
                + b * pnum * pnum * qd
                + c * pnum * qd * qd
                + d * qd**3
            )
            red |= ok & (val == 0)
    return red


def _scan_i0(X: int, a: int, b: int, scale: float = 1.0):
    """Weakly Hessian-reduced candidates (0 < disc < X) for fixed (a, b)."""
    Pmax = math.isqrt(max(X - 1, 1))
    c_lo = _ceil_div(b * b - int(scale * scale * Pmax), 3 * a)
    c_hi = (b * b - 1) // (3 * a)
    if c_hi < c_lo:
        return None
    c = np.arange(c_lo, c_hi + 1, dtype=np.int64)
    P = b * b - 3 * a * c
    # |Q| <= P: d in [(bc-P)/9a, (bc+P)/9a]
    dq_lo = _ceil_div_vec(b * c - P, 9 * a)
    dq_hi = (b * c + P) // (9 * a)
    lo1, hi1, lo2, hi2 = _disc_d_windows(a, b, c, X, want_positive=True)
    cc, dd = _expand_windows(c, (lo1, lo2), (hi1, hi2), dq_lo, dq_hi)
    if len(cc) == 0:
        return None
    aa = np.full_like(cc, a)
    bb = np.full_like(cc, b)
    D = _disc_vec(aa, bb, cc, dd)
    keep = (D > 0) & (D < X) & (dd != 0)
    # full weak reduction: P <= R
    keep &= (cc * cc - 3 * bb * dd) >= (bb * bb - 3 * aa * cc)
    if not keep.any():
        return None
    return aa[keep], bb[keep], cc[keep], dd[keep]


def _ceil_div_vec(x, y):
    return -((-x) // y)


def _scan_i1(X: int, a: int, b: int, scale: float = 1.0):
    """Quadratic-factor-reduced candidates (-X < disc < 0) for fixed (a, b)."""
    alpha_max, cmax = _i1_aux(a, X, scale)
    c = np.arange(-cmax, cmax + 1, dtype=np.int64)
    # alpha window [-b/a - 1, -b/a + 1] (from |p| <= 1) clipped to |alpha| <= alpha_max
    wlo = max(-b / a - 1.0 - 1e-9, -alpha_max)
    whi = min(-b / a + 1.0 + 1e-9, alpha_max)
    if whi <= wlo:
        return None
    # d = delta(alpha) = -((a alpha + b) alpha + c) alpha; extremes at endpoints
    # or critical points of delta (roots of 3a t^2 + 2b t + c = 0)
    cand_ts = [np.full(len(c), wlo), np.full(len(c), whi)]
    discq = float(b * b) - 3.0 * a * c.astype(float)
    sq = np.sqrt(np.maximum(discq, 0.0))
    for sgn in (1.0, -1.0):
        t = (-b + sgn * sq) / (3.0 * a)
        cand_ts.append(np.clip(t, wlo, whi))
    vals = []
    for t in cand_ts:
        vals.append(-(((a * t + b) * t + c) * t))
    vals = np.stack(vals)
    dq_lo = np.floor(vals.min(axis=0)).astype(np.int64) - 1
    dq_hi = np.ceil(vals.max(axis=0)).astype(np.int64) + 1
    lo1, hi1, lo2, hi2 = _disc_d_windows(a, b, c, X, want_positive=False)
    cc, dd = _expand_windows(c, (lo1, lo2), (hi1, hi2), dq_lo, dq_hi)
    if len(cc) == 0:
        return None
    aa = np.full_like(cc, a)
    bb = np.full_like(cc, b)
    D = _disc_vec(aa, bb, cc, dd)
    keep = (D < 0) & (D > -X) & (dd != 0)
    if not keep.any():
        return None
    aa, bb, cc, dd = aa[keep], bb[keep], cc[keep], dd[keep]
    # reduced quadratic factor: |p| <= 1 and q >= 1 at the real root
    alpha = _real_root_neg_disc(aa, bb, cc, dd)
    pq = bb / aa + alpha
    qq = -dd / (aa * alpha)
    tol = 3e-6
    keep2 = (np.abs(pq) <= 1.0 + tol) & (qq >= 1.0 - tol)
    if not keep2.any():
        return None
    return aa[keep2], bb[keep2], cc[keep2], dd[keep2], alpha[keep2]


def _scan_unit(args):
    """Worker: scan one (signature, a, b-range) unit; returns canonical rows."""
    sig, a, b_lo, b_hi, X, scale = args
    rows = []
    for b in range(b_lo, b_hi + 1):
        if sig == 0:
            got = _scan_i0(X, a, b, scale)
            if got is None:
                continue
            aa, bb, cc, dd = got
            roots = _real_roots_pos_disc(aa, bb, cc, dd)
        else:
            got = _scan_i1(X, a, b, scale)
            if got is None:
                continue
            aa, bb, cc, dd, alpha = got
            roots = [alpha]
        red = _reducible_mask(a, bb, cc, dd, roots)
        keep = ~red
        if not keep.any():
            continue
        rows.append(_canonicalize_batch(aa[keep], bb[keep], cc[keep], dd[keep]))
    if not rows:
        return np.empty((0, 4), dtype=np.int64)
    return np.unique(np.concatenate(rows), axis=0)


def _work_units(X: int, sigs, scale: float = 1.0):
    units = []
    for sig in sigs:
        amax = _i0_bounds(X, scale) if sig == 0 else _i1_bounds(X, scale)
        for a in range(1, amax + 1):
            bmax = _i0_bmax(a, X, scale) if sig == 0 else _i1_bmax(a, X, scale)
            # small a dominates the work; slice its b-range finer
            step = max(8, (2 * bmax + 1) // max(1, 24 // a))
            b = -bmax
            while b <= bmax:
                units.append((sig, a, b, min(b + step - 1, bmax), X, scale))
                b += step
    return units


def _threads_from_env(threads):
    env = os.environ.get("SHAPELAB_THREADS")
    if env:
        return max(1, int(env))
    if threads is None:
        return 1
    return max(1, int(threads))


def _dedupe_rows(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    return np.unique(rows, axis=0)


def _shape_from_canonical(rows: np.ndarray):
    """Shape coordinates for canonical rows (both signatures), vectorized."""
    a = rows[:, 0].astype(np.int64)
    b = rows[:, 1].astype(np.int64)
    c = rows[:, 2].astype(np.int64)
    d = rows[:, 3].astype(np.int64)
    D = _disc_vec(a, b, c, d)
    x = np.empty(len(rows))
    y = np.empty(len(rows))
    pos = D > 0
    if pos.any():
        P = (b * b - 3 * a * c)[pos].astype(float)
        Q = (b * c - 9 * a * d)[pos].astype(float)
        x[pos] = np.abs(Q) / (2 * P)
        y[pos] = np.sqrt(3.0 * D[pos].astype(float)) / (2 * P)
    neg = ~pos
    if neg.any():
        alpha = _real_root_neg_disc(a[neg], b[neg], c[neg], d[neg])
        A, B, C = _i1_float_gram(
            a[neg].astype(float), b[neg].astype(float), c[neg].astype(float),
            d[neg].astype(float), alpha
        )
        det = A * C - B * B
        rel = np.abs(det - np.abs(D[neg].astype(float)) / 3.0) / (np.abs(D[neg].astype(float)) / 3.0)
        if rel.max(initial=0.0) > 1e-9:
            raise ArithmeticError("shape Gram determinant check failed in bulk path")
        x[neg] = np.abs(B) / A
        y[neg] = np.sqrt(np.maximum(det, 0.0)) / A
    # snap to the domain boundary within 1e-9
    x = np.where(np.abs(x) <= 1e-9, 0.0, x)
    x = np.where(np.abs(x - 0.5) <= 1e-9, 0.5, x)
    r2 = x * x + y * y
    snap = np.abs(r2 - 1.0) <= 1e-9
    y = np.where(snap, np.sqrt(np.maximum(1.0 - x * x, 0.0)), y)
    return x, y


def _square_mask(D: np.ndarray) -> np.ndarray:
    """Exact square test for positive int64 values."""
    out = np.zeros(len(D), dtype=bool)
    pos = D > 0
    r = np.sqrt(D[pos].astype(float)).astype(np.int64)
    sub = D[pos]
    hit = np.zeros(len(sub), dtype=bool)
    for off in (-1, 0, 1):
        s = r + off
        hit |= s * s == sub
    out[pos] = hit
    return out


def _maximal_mask(rows: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Vectorized maximality over all classes: local tests at primes with p^2 | disc."""
    absD = np.abs(D)
    out = np.ones(len(rows), dtype=bool)
    pmax = math.isqrt(int(absD.max(initial=1)))
    for p in primes_upto(max(pmax, 2)):
        sel = absD % (p * p) == 0
        if not sel.any():
            continue
        sub = rows[sel]
        ok = is_maximal_at_array(sub[:, 0], sub[:, 1], sub[:, 2], sub[:, 3], p)
        cur = out[sel]
        cur &= ok
        out[sel] = cur
    return out


def build_records(rows: np.ndarray, with_shapes: bool = True) -> np.ndarray:
    """Build the record array (sorted by (|disc|, a, b, c, d)) from canonical rows."""
    rec = np.zeros(len(rows), dtype=REC_DTYPE)
    if len(rows) == 0:
        return rec
    D = _disc_vec(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3])
    rec["a"], rec["b"], rec["c"], rec["d"] = rows.T
    rec["disc"] = D
    rec["i"] = (D < 0).astype(np.uint8)
    rec["s3"] = (~_square_mask(D)).astype(np.uint8)
    rec["maximal"] = _maximal_mask(rows, D).astype(np.uint8)
    if with_shapes:
        x, y = _shape_from_canonical(rows)
        rec["x"], rec["y"] = x, y
    order = np.lexsort((rec["d"], rec["c"], rec["b"], rec["a"], np.abs(rec["disc"])))
    return rec[order]


def enumerate_classes(
    task: EnumerationTask,
    threads: int | None = None,
    bound_scale: float = 1.0,
    with_shapes: bool = True,
) -> np.ndarray:
    """One canonical representative per GL2(Z)-class of irreducible forms with
    |disc| < xmax, streamed as a record array sorted by (|disc|, a, b, c, d)."""
    X = task.xmax
    sigs = {"0": (0,), "1": (1,), "both": (0, 1)}[task.signature]
    units = _work_units(X, sigs, bound_scale)
    nthreads = _threads_from_env(threads)
    if nthreads > 1 and len(units) > 4:
        import multiprocessing as mp

        with mp.Pool(nthreads) as pool:
            parts = pool.map(_scan_unit, units, chunksize=1)
    else:
        parts = [_scan_unit(u) for u in units]
    rows = _dedupe_rows(np.concatenate(parts)) if parts else np.empty((0, 4), np.int64)
    rec = build_records(rows, with_shapes=with_shapes)
    # filters
    keep = np.ones(len(rec), dtype=bool)
    if not task.include_c3:
        keep &= rec["s3"] == 1
    if task.maximal_only:
        keep &= rec["maximal"] == 1
    if task.congruence is not None:
        m = task.congruence.m
        resid = np.stack(
            [rec["a"] % m, rec["b"] % m, rec["c"] % m, rec["d"] % m], axis=1
        ).astype(np.int64)
        targets = np.array(sorted(task.congruence.residues), dtype=np.int64)
        if len(targets) == 0:
            keep &= False
        else:
            rv = resid.copy().view([("", np.int64)] * 4).ravel()
            tv = np.ascontiguousarray(targets).view([("", np.int64)] * 4).ravel()
            keep &= np.isin(rv, tv)
    return rec[keep]


# -- independent brute-force oracle -------------------------------------------


_GENS = [
    ((0, 1), (1, 0)),
    ((1, 1), (0, 1)),
    ((1, -1), (0, 1)),
    ((1, 0), (1, 1)),
    ((1, 0), (-1, 1)),
    ((1, 0), (0, -1)),
    ((-1, 0), (0, 1)),
]


def brute_force_classes(X: int, cross_check: bool = True) -> np.ndarray:
    """Completeness oracle for X <= 10^4: box-scan per-coefficient ranges at
    twice the derived reduction bounds with no reduction-position windows,
    dedupe through the canonical section, and (optionally) cross-validate the
    section with a generator-word search inside discriminant classes."""
    if X > 10**4:
        raise ValueError("brute_force_classes supports X <= 10^4")
    rows = []
    amax = 2 * max(_i0_bounds(X), _i1_bounds(X))
    for a in range(1, amax + 1):
        bmax = 2 * max(_i0_bmax(a, X), _i1_bmax(a, X))
        _, cmax_i1 = _i1_aux(a, X)
        T0 = 0.5 + math.sqrt(2.0) * X**0.25 / a
        cmax = 2 * max(int(3 * a * T0 * T0) + 1, cmax_i1)
        for b in range(-bmax, bmax + 1):
            c = np.arange(-cmax, cmax + 1, dtype=np.int64)
            # d confined by |disc| < X: union of the two signature bands,
            # each padded by doubling its width about its center
            win = []
            for wantpos in (True, False):
                lo1, hi1, lo2, hi2 = _disc_d_windows(a, b, c, X, wantpos)
                for lo, hi in ((lo1, hi1), (lo2, hi2)):
                    mid = (lo + hi) / 2.0
                    half = np.maximum(hi - lo, 0) / 2.0
                    win.append((np.floor(mid - 2 * half) - 2, np.ceil(mid + 2 * half) + 2))
            cc = np.concatenate([np.repeat(c, np.maximum(h - l + 1, 0).astype(np.int64)) for l, h in win])
            dd = np.concatenate(
                [
                    _expand_windows(c, (l,), (h,))[1]
                    for l, h in win
                ]
            )
            if len(cc) == 0:
                continue
            aa = np.full_like(cc, a)
            bb = np.full_like(cc, b)
            D = _disc_vec(aa, bb, cc, dd)
            keep = (D != 0) & (np.abs(D) < X) & (dd != 0)
            if not keep.any():
                continue
            aa, bb, cc, dd, D = aa[keep], bb[keep], cc[keep], dd[keep], D[keep]
            pos = D > 0
            groups = []
            if pos.any():
                roots = _real_roots_pos_disc(aa[pos], bb[pos], cc[pos], dd[pos])
                red = _reducible_mask(a, bb[pos], cc[pos], dd[pos], roots)
                groups.append((aa[pos][~red], bb[pos][~red], cc[pos][~red], dd[pos][~red]))
            if (~pos).any():
                alpha = _real_root_neg_disc(aa[~pos], bb[~pos], cc[~pos], dd[~pos])
                red = _reducible_mask(a, bb[~pos], cc[~pos], dd[~pos], [alpha])
                groups.append((aa[~pos][~red], bb[~pos][~red], cc[~pos][~red], dd[~pos][~red]))
            for ga, gb, gc, gd in groups:
                if len(ga):
                    rows.append(_canonicalize_batch(ga, gb, gc, gd))
    all_rows = _dedupe_rows(np.concatenate(rows)) if rows else np.empty((0, 4), np.int64)
    if cross_check:
        _word_search_check(all_rows)
    return build_records(all_rows)


def _word_search_check(rows: np.ndarray, max_group: int = 40, depth: int = 6):
    """BFS over GL2(Z) generator words: any two forms connected by a word must
    canonicalize identically (validates that the section is an orbit invariant)."""
    if len(rows) == 0:
        return
    D = _disc_vec(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3])
    order = np.argsort(D, kind="stable")
    rows = rows[order]
    D = D[order]
    starts = np.nonzero(np.diff(D, prepend=D[0] - 1))[0]
    for k, st in enumerate(starts):
        en = starts[k + 1] if k + 1 < len(starts) else len(rows)
        group = rows[st:en]
        if len(group) < 2 or len(group) > max_group:
            continue
        cap = 6 * int(np.abs(group).max()) + 40
        canon = {tuple(int(v) for v in g): tuple(int(v) for v in g) for g in group}
        for g in group:
            seen = {tuple(int(v) for v in g)}
            frontier = [tuple(int(v) for v in g)]
            for _ in range(depth):
                nxt = []
                for f in frontier:
                    for (p, q), (r, s) in _GENS:
                        img = act_coeffs(p, q, r, s, *f)
                        if max(abs(v) for v in img) > cap or img in seen:
                            continue
                        seen.add(img)
                        nxt.append(img)
                frontier = nxt
            hits = [h for h in seen if h in canon and h != tuple(int(v) for v in g)]
            for h in hits:
                if canon[h] != canon[tuple(int(v) for v in g)]:
                    raise AssertionError(
                        f"section not orbit-invariant: {g} ~ {h} canonicalize apart"
                    )


# -- CSV ------------------------------------------------------------------------

CSV_HEADER = "a,b,c,d,disc,i,s3,maximal,x,y"


def write_forms_csv(rec: np.ndarray, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rec:
            fh.write(
                f"{row['a']},{row['b']},{row['c']},{row['d']},{row['disc']},"
                f"{row['i']},{row['s3']},{row['maximal']},"
                f"{float(row['x'])!r},{float(row['y'])!r}\n"
            )


def read_forms_csv(path: str) -> np.ndarray:
    import pandas as pd

    df = pd.read_csv(path, float_precision="round_trip")
    if list(df.columns) != CSV_HEADER.split(","):
        raise ValueError(f"unexpected forms.csv header: {list(df.columns)}")
    rec = np.zeros(len(df), dtype=REC_DTYPE)
    for name in REC_DTYPE.names:
        rec[name] = df[name].to_numpy()
    return rec
