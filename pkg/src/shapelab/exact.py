"""Exact real-algebraic sign evaluation at the real root of a cubic.

Forms with negative discriminant have a single real root alpha.  The shape
Gram entries of such a form live in Q(alpha); reduction-domain comparisons on
the boundary (ties that floating point cannot decide) are settled here with
Fraction arithmetic: Sturm sequences isolate alpha, and signs of elements of
Q[alpha]/(f) are read off a sufficiently refined isolating interval.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["CubicNumberField", "sign_at_real_root"]


# -- polynomial helpers; coefficient lists are ascending, over Fraction --

def _trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _padd(p, q):
    n = max(len(p), len(q))
    return _trim([ (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n) ])


def _pneg(p):
    return [-x for x in p]


def _pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return _trim(out)


def _pdivmod(p, q):
    p = list(p)
    if not q:
        raise ZeroDivisionError
    quo = [Fraction(0)] * max(0, len(p) - len(q) + 1)
    while len(p) >= len(q) and p:
        k = len(p) - len(q)
        f = p[-1] / q[-1]
        quo[k] = f
        for i, y in enumerate(q):
            p[k + i] -= f * y
        _trim(p)
    return _trim(quo), p


def _peval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _pderiv(p):
    return _trim([i * c for i, c in enumerate(p)][1:])


def _sturm_chain(p):
    chain = [list(p), _pderiv(p)]
    while chain[-1]:
        _, rem = _pdivmod(chain[-2], chain[-1])
        if not rem:
            break
        chain.append(_pneg(rem))
    return [q for q in chain if q]


def _sign_changes(chain, x):
    signs = []
    for q in chain:
        v = _peval(q, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def _roots_in_open_interval(p, lo, hi):
    chain = _sturm_chain(p)
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


class CubicNumberField:
    """Arithmetic in Q[alpha]/(f) for an irreducible cubic f with disc < 0.

    Elements are triples of Fractions (c0, c1, c2) for c0 + c1 a + c2 a^2.
    alpha is pinned to the unique real root by a refinable isolating interval.
    """

    def __init__(self, a: int, b: int, c: int, d: int):
        self.coeffs = (a, b, c, d)
        self.f = [Fraction(d), Fraction(c), Fraction(b), Fraction(a)]
        self.lo, self.hi = self._isolate()

    # -- isolating interval for the single real root --

    def _isolate(self):
        a, b, c, d = self.coeffs
        m = 1 + max(abs(b), abs(c), abs(d)) / Fraction(abs(a))
        lo, hi = -m, m
        flo = _peval(self.f, lo)
        if flo == 0:
            lo -= 1
            flo = _peval(self.f, lo)
        # odd degree: exactly one sign change for disc<0
        for _ in range(8):
            mid = (lo + hi) / 2
            fm = _peval(self.f, mid)
            if fm == 0:
                lo, hi = mid - Fraction(1, 10**6), mid + Fraction(1, 10**6)
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        return lo, hi

    def _refine(self):
        mid = (self.lo + self.hi) / 2
        fm = _peval(self.f, mid)
        flo = _peval(self.f, self.lo)
        if fm == 0:
            eps = (self.hi - self.lo) / 4
            self.lo, self.hi = mid - eps, mid + eps
            return
        if (fm > 0) == (flo > 0):
            self.lo = mid
        else:
            self.hi = mid

    # -- element arithmetic --

    def elem(self, c0=0, c1=0, c2=0):
        return (Fraction(c0), Fraction(c1), Fraction(c2))

    def add(self, u, v):
        return (u[0] + v[0], u[1] + v[1], u[2] + v[2])

    def scale(self, u, k):
        k = Fraction(k)
        return (u[0] * k, u[1] * k, u[2] * k)

    def mul(self, u, v):
        prod = _pmul(list(u), list(v))
        _, rem = _pdivmod(prod, self.f)
        rem = rem + [Fraction(0)] * (3 - len(rem))
        return (rem[0], rem[1], rem[2])

    def inv(self, u):
        # extended Euclid in Q[x] for gcd(u, f) = 1 (f irreducible)
        r0, r1 = list(self.f), _trim(list(u))
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1 or (r1 and r1[0] != 0 and len(r1) > 1):
            q, r = _pdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _padd(s0, _pneg(_pmul(q, s1)))
            if not r1:
                raise ZeroDivisionError("element not invertible")
            if len(r1) == 1:
                break
        inv = _pmul(s1, [Fraction(1) / r1[0]])
        _, rem = _pdivmod(inv, self.f)
        rem = rem + [Fraction(0)] * (3 - len(rem))
        return (rem[0], rem[1], rem[2])

    def sign(self, u) -> int:
        """Sign of c0 + c1 alpha + c2 alpha^2 at the real root alpha."""
        p = _trim(list(u))
        if not p:
            return 0
        # zero iff f divides p, impossible for deg <= 2 nonzero
        chain = _sturm_chain(p) if len(p) > 1 else None
        for _ in range(20000):
            vlo, vhi = _peval(p, self.lo), _peval(p, self.hi)
            if vlo != 0 and vhi != 0 and (vlo > 0) == (vhi > 0):
                if len(p) == 1 or _roots_in_open_interval(p, self.lo, self.hi) == 0:
                    return 1 if vlo > 0 else -1
            self._refine()
        raise ArithmeticError("sign determination did not converge")

    # -- exact shape Gram for disc < 0 --

    def shape_gram_elems(self):
        """Entries (A, B, C) of the rank-2 shape Gram on (omega, theta),
        as elements of Q(alpha)."""
        a, b, c, d = self.coeffs
        alpha = self.elem(0, 1)
        q2 = self.scale(self.inv(alpha), Fraction(-d, a))          # |beta|^2
        u = self.scale(self.add(self.elem(Fraction(-b, a)), self.scale(alpha, -1)), Fraction(1, 2))
        theta1 = self.add(self.elem(c), self.mul(alpha, self.add(self.elem(b), self.scale(alpha, a))))
        # A = a^2 alpha^2 + 2 a^2 q2 - b^2/3
        A = self.add(
            self.scale(self.mul(alpha, alpha), a * a),
            self.add(self.scale(q2, 2 * a * a), self.elem(Fraction(-b * b, 3))),
        )
        # B = a*alpha*theta1 + 2a^2 u q2 + 2ab q2 + 2ac u + bc/3
        B = self.add(
            self.scale(self.mul(alpha, theta1), a),
            self.add(
                self.scale(self.mul(u, q2), 2 * a * a),
                self.add(
                    self.scale(q2, 2 * a * b),
                    self.add(self.scale(u, 2 * a * c), self.elem(Fraction(b * c, 3))),
                ),
            ),
        )
        # C = theta1^2 + 2(a^2 q2^2 + 2ab u q2 + ac(4u^2 - 2 q2) + b^2 q2 + 2bc u + c^2) - c^2/3
        tb2 = self.add(
            self.scale(self.mul(q2, q2), a * a),
            self.add(
                self.scale(self.mul(u, q2), 2 * a * b),
                self.add(
                    self.scale(self.add(self.scale(self.mul(u, u), 4), self.scale(q2, -2)), a * c),
                    self.add(
                        self.scale(q2, b * b),
                        self.add(self.scale(u, 2 * b * c), self.elem(c * c)),
                    ),
                ),
            ),
        )
        C = self.add(self.mul(theta1, theta1), self.add(self.scale(tb2, 2), self.elem(Fraction(-c * c, 3))))
        return A, B, C

    def gram_transform(self, G, u):
        """u^T G u for integer 2x2 u = ((p,q),(r,s)); G = (A, B, C) elements."""
        (p, q), (r, s) = u
        A, B, C = G
        A2 = self.add(self.scale(A, p * p), self.add(self.scale(B, 2 * p * r), self.scale(C, r * r)))
        B2 = self.add(self.scale(A, p * q), self.add(self.scale(B, p * s + q * r), self.scale(C, r * s)))
        C2 = self.add(self.scale(A, q * q), self.add(self.scale(B, 2 * q * s), self.scale(C, s * s)))
        return A2, B2, C2

    def weakly_reduced(self, G) -> bool:
        """|2B| <= A <= C decided exactly."""
        A, B, C = G
        twoB = self.scale(B, 2)
        if self.sign(self.add(A, self.scale(twoB, -1))) < 0:   # A - 2B < 0
            return False
        if self.sign(self.add(A, twoB)) < 0:                    # A + 2B < 0
            return False
        if self.sign(self.add(C, self.scale(A, -1))) < 0:       # C - A < 0
            return False
        return True


def sign_at_real_root(poly_ascending, a, b, c, d) -> int:
    """Sign of a rational-coefficient polynomial at the unique real root of f.

    The polynomial is reduced mod f first, so any degree is accepted.
    """
    K = CubicNumberField(a, b, c, d)
    p = [Fraction(x) for x in poly_ascending]
    _, rem = _pdivmod(p, K.f)
    rem = rem + [Fraction(0)] * (3 - len(rem))
    return K.sign((rem[0], rem[1], rem[2]))
