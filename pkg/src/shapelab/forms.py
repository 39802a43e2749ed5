"""Exact integer algebra of binary cubic forms.

A form (a,b,c,d) stands for f(x,y) = a x^3 + b x^2 y + c x y^2 + d y^3 with
arbitrary-precision integer coefficients.  GL2(Z) acts by substitution
(gamma . f)(x,y) = f((x,y) gamma); one GL2(Z)-class corresponds to one
isomorphism class of cubic rings, with the ring structure given by the
classical multiplication table on the basis <1, omega, theta>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "BinaryCubicForm",
    "UnimodularMatrix2",
    "HessianForm",
    "CubicRingTable",
    "EmbeddingData",
    "discriminant",
    "hessian",
    "act",
    "act_coeffs",
    "classify",
    "ring_table",
    "embeddings",
    "content",
    "is_irreducible",
]


@dataclass(frozen=True)
class BinaryCubicForm:
    a: int
    b: int
    c: int
    d: int

    def coeffs(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, x: int, y: int):
        a, b, c, d = self.coeffs()
        return a * x**3 + b * x**2 * y + c * x * y**2 + d * y**3

    def __neg__(self) -> "BinaryCubicForm":
        return BinaryCubicForm(-self.a, -self.b, -self.c, -self.d)


@dataclass(frozen=True)
class UnimodularMatrix2:
    """Integer matrix [[p, q], [r, s]] with determinant +-1."""

    p: int
    q: int
    r: int
    s: int

    def __post_init__(self):
        if self.p * self.s - self.q * self.r not in (1, -1):
            raise ValueError(f"matrix {self.rows()} is not unimodular")

    def rows(self):
        return ((self.p, self.q), (self.r, self.s))

    def det(self) -> int:
        return self.p * self.s - self.q * self.r

    def __matmul__(self, other: "UnimodularMatrix2") -> "UnimodularMatrix2":
        return UnimodularMatrix2(
            self.p * other.p + self.q * other.r,
            self.p * other.q + self.q * other.s,
            self.r * other.p + self.s * other.r,
            self.r * other.q + self.s * other.s,
        )


IDENTITY2 = UnimodularMatrix2(1, 0, 0, 1)


@dataclass(frozen=True)
class HessianForm:
    """Quadratic covariant (P, Q, R) = (b^2-3ac, bc-9ad, c^2-3bd).

    Satisfies Q^2 - 4 P R = -3 disc(f) exactly.
    """

    P: int
    Q: int
    R: int

    def disc(self) -> int:
        return self.Q * self.Q - 4 * self.P * self.R


@dataclass(frozen=True)
class CubicRingTable:
    """Structure constants of the cubic ring R(f) on the basis <1, omega, theta>.

    omega*theta = -ad
    omega^2     = -ac - b*omega + a*theta
    theta^2     = -bd - d*omega + c*theta
    """

    omega_theta: int               # constant term of omega*theta
    omega_sq: tuple[int, int, int]   # (const, omega, theta) coords of omega^2
    theta_sq: tuple[int, int, int]   # (const, omega, theta) coords of theta^2
    trace_omega: int
    trace_theta: int

    def multiply(self, u, v):
        """Product of u = (u0,u1,u2), v = (v0,v1,v2) in coords on <1, omega, theta>."""
        u0, u1, u2 = u
        v0, v1, v2 = v
        w0 = u0 * v0
        w1 = u0 * v1 + u1 * v0
        w2 = u0 * v2 + u2 * v0
        # omega^2 term
        s0, s1, s2 = self.omega_sq
        w0 += u1 * v1 * s0
        w1 += u1 * v1 * s1
        w2 += u1 * v1 * s2
        # theta^2 term
        t0, t1, t2 = self.theta_sq
        w0 += u2 * v2 * t0
        w1 += u2 * v2 * t1
        w2 += u2 * v2 * t2
        # omega*theta terms (scalar)
        w0 += (u1 * v2 + u2 * v1) * self.omega_theta
        return (w0, w1, w2)


def discriminant(f: BinaryCubicForm | tuple) -> int:
    """disc(f) = 18abcd + b^2 c^2 - 4 a c^3 - 4 b^3 d - 27 a^2 d^2."""
    a, b, c, d = f.coeffs() if isinstance(f, BinaryCubicForm) else f
    return (
        18 * a * b * c * d
        + b * b * c * c
        - 4 * a * c**3
        - 4 * b**3 * d
        - 27 * a * a * d * d
    )


def hessian(f: BinaryCubicForm | tuple) -> HessianForm:
    a, b, c, d = f.coeffs() if isinstance(f, BinaryCubicForm) else f
    return HessianForm(b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)


def act_coeffs(p, q, r, s, a, b, c, d):
    """Coefficients of f((x,y) @ [[p,q],[r,s]]).  Works on ints or ndarrays."""
    a2 = a * p**3 + b * p * p * q + c * p * q * q + d * q**3
    b2 = (
        3 * a * p * p * r
        + b * (p * p * s + 2 * p * q * r)
        + c * (2 * p * q * s + q * q * r)
        + 3 * d * q * q * s
    )
    c2 = (
        3 * a * p * r * r
        + b * (2 * p * r * s + q * r * r)
        + c * (p * s * s + 2 * q * r * s)
        + 3 * d * q * s * s
    )
    d2 = a * r**3 + b * r * r * s + c * r * s * s + d * s**3
    return a2, b2, c2, d2


def act(gamma: UnimodularMatrix2, f: BinaryCubicForm) -> BinaryCubicForm:
    """(gamma . f)(x,y) = f((x,y) gamma).  disc is preserved."""
    a2, b2, c2, d2 = act_coeffs(gamma.p, gamma.q, gamma.r, gamma.s, *f.coeffs())
    return BinaryCubicForm(a2, b2, c2, d2)


def content(f: BinaryCubicForm | tuple) -> int:
    a, b, c, d = f.coeffs() if isinstance(f, BinaryCubicForm) else f
    return math.gcd(math.gcd(abs(a), abs(b)), math.gcd(abs(c), abs(d)))


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


def _has_rational_root(a: int, b: int, c: int, d: int) -> bool:
    """True iff a x^3 + b x^2 + c x + d has a rational root (a != 0, d != 0)."""
    for qd in _divisors(a):
        for pd in _divisors(d):
            for p in (pd, -pd):
                if math.gcd(p, qd) != 1:
                    continue
                if a * p**3 + b * p * p * qd + c * p * qd * qd + d * qd**3 == 0:
                    return True
    return False


def is_irreducible(f: BinaryCubicForm | tuple) -> bool:
    """True iff f has no linear factor over Q (equivalently no rational point in P^1)."""
    a, b, c, d = f.coeffs() if isinstance(f, BinaryCubicForm) else f
    if a == 0 or d == 0:
        return False
    return not _has_rational_root(a, b, c, d)


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def classify(f: BinaryCubicForm):
    """Classify a form: kind in {zero_disc, reducible, irreducible_c3, irreducible_s3},
    signature i in {0, 1} (i=0 iff disc>0), and content.

    An irreducible form with square discriminant generates a cyclic cubic field;
    non-square discriminant gives the generic S3 case.
    """
    D = discriminant(f)
    k = content(f)
    if D == 0:
        return ("zero_disc", None, k)
    i = 0 if D > 0 else 1
    if not is_irreducible(f):
        return ("reducible", i, k)
    if _is_square(D):
        return ("irreducible_c3", i, k)
    return ("irreducible_s3", i, k)


def ring_table(f: BinaryCubicForm) -> CubicRingTable:
    a, b, c, d = f.coeffs()
    return CubicRingTable(
        omega_theta=-a * d,
        omega_sq=(-a * c, -b, a),
        theta_sq=(-b * d, -d, c),
        trace_omega=-b,
        trace_theta=c,
    )


@dataclass(frozen=True)
class EmbeddingData:
    """Certified embeddings of the cubic ring R(f) into R x C^s.

    roots: the three complex roots of f(x,1), complex-conjugate pair last for i=1.
    radius[j] is a certified bound on |roots[j] - exact root|.
    omega[j] = a*roots[j], theta[j] = a*roots[j]^2 + b*roots[j] + c.
    """

    form: BinaryCubicForm
    roots: tuple[complex, complex, complex]
    radius: tuple[float, float, float]
    omega: tuple[complex, complex, complex]
    theta: tuple[complex, complex, complex]
    signature: int


def _exact_eval(a, b, c, d, zr: Fraction, zi: Fraction):
    """f(z) and f'(z) at z = zr + i*zi, evaluated exactly over Q(i)."""

    def cmul(ur, ui, vr, vi):
        return ur * vr - ui * vi, ur * vi + ui * vr

    fr, fi = Fraction(a), Fraction(0)
    for coef in (b, c, d):
        fr, fi = cmul(fr, fi, zr, zi)
        fr += coef
    gr, gi = Fraction(3 * a), Fraction(0)
    for coef in (2 * b, c):
        gr, gi = cmul(gr, gi, zr, zi)
        gr += coef
    return (fr, fi), (gr, gi)


def _exact_newton_step(a, b, c, d, z: complex) -> tuple[complex, float]:
    """One Newton step with the residual evaluated exactly; returns the new
    root approximation and a rigorous inclusion radius 3|f(z)/f'(z)| at z."""
    zr, zi = Fraction(z.real), Fraction(z.imag)
    (fr, fi), (gr, gi) = _exact_eval(a, b, c, d, zr, zi)
    g2 = gr * gr + gi * gi
    if g2 == 0:
        return z, math.inf
    cr = (fr * gr + fi * gi) / g2
    ci = (fi * gr - fr * gi) / g2
    step = complex(float(cr), float(ci))
    radius = 3.0 * math.sqrt(float(cr * cr + ci * ci))
    return z - step, radius


def _certify_roots(a, b, c, d, roots):
    """Polish each root with exactly-evaluated Newton steps and return rigorous
    inclusion radii 3|f(z)/f'(z)| (every such disk contains a true root; if the
    three disks are pairwise disjoint each contains exactly one)."""
    out = []
    rad = []
    for z in roots:
        radius = math.inf
        for _ in range(3):
            z2, radius = _exact_newton_step(a, b, c, d, z)
            if z2 == z:
                break
            z = z2
        _, radius = _exact_newton_step(a, b, c, d, z)
        if math.isinf(radius):
            return None, None
        out.append(z)
        rad.append(radius)
    for j in range(3):
        for k in range(j + 1, 3):
            if abs(out[j] - out[k]) <= rad[j] + rad[k]:
                return None, None
    return out, rad


def embeddings(f: BinaryCubicForm, target_precision: float = 1e-14) -> EmbeddingData:
    """Complex roots of f(x,1) with certified error radii, plus basis images.

    Requires a != 0 and disc != 0.  The certified radius of each root is
    at most target_precision * max(1, |root|).
    """
    a, b, c, d = f.coeffs()
    if a == 0:
        raise ValueError("a = 0: form has no degree-3 dehomogenization")
    D = discriminant(f)
    if D == 0:
        raise ValueError("zero discriminant")

    roots = np.roots([a, b, c, d]).astype(complex)
    # float Newton refinement, then exactly-evaluated polish + certification
    for _ in range(3):
        fz = ((a * roots + b) * roots + c) * roots + d
        dfz = (3 * a * roots + 2 * b) * roots + c
        step = np.where(dfz != 0, fz / np.where(dfz != 0, dfz, 1.0), 0.0)
        roots = roots - step

    # order: real roots first; for i=1 put the conjugate pair last
    if D > 0:
        roots = np.sort_complex(roots.real + 0j)
        sig = 0
    else:
        idx = np.argsort(np.abs(roots.imag))
        roots = roots[idx]
        roots[0] = roots[0].real + 0j
        z = roots[1] if roots[1].imag > 0 else roots[2]
        roots[1] = z
        roots[2] = z.conjugate()
        sig = 1

    roots, rad = _certify_roots(a, b, c, d, list(roots))
    if rad is None:
        raise ValueError("root certification failed (clustered roots)")
    if sig == 0:
        roots = sorted(z.real + 0j for z in roots)
    else:
        # keep the conjugate pair exact under polishing
        roots = [roots[0].real + 0j, roots[1], roots[1].conjugate()]
        rad[2] = rad[1]
    for z, r in zip(roots, rad):
        if r > target_precision * max(1.0, abs(z)):
            raise ValueError(
                f"root certification too weak: radius {r:.3e} at root {z}"
            )

    omega = tuple(a * z for z in roots)
    theta = tuple((a * z + b) * z + c for z in roots)
    return EmbeddingData(
        form=f,
        roots=tuple(complex(z) for z in roots),
        radius=tuple(float(r) for r in rad),
        omega=omega,
        theta=theta,
        signature=sig,
    )
