"""p-adic maximality of cubic rings.

A form is non-maximal at p iff p divides its content, or some multiple root
(u0:v0) of f mod p in P^1(F_p) admits a lift with f(u,v) = 0 mod p^2.  Since
f'(u0,v0) = 0 mod p at a multiple root, the lift condition collapses to
f(u0,v0) = 0 mod p^2, which makes the test a per-point congruence: maximality
is determined by f mod p^2.  Only primes with p^2 | disc can fail.

An independent cross-check for monic forms is provided by the classical
Dedekind criterion for Z[x]/(g).
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .forms import BinaryCubicForm, content, discriminant

__all__ = [
    "is_maximal_at",
    "is_maximal",
    "is_maximal_at_array",
    "dedekind_oracle",
    "local_density",
    "CongruencePredicate",
    "factorize",
    "primes_upto",
]


def primes_upto(n: int) -> list[int]:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(math.isqrt(n)) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


# -- integer factorization: trial division then Brent-Pollard rho ------------

_SMALL_PRIMES = primes_upto(10000)


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for n < 3.3e24 with these bases
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    import random

    rnd = random.Random(0xC0FFEE ^ n)
    while True:
        y, c, m = rnd.randrange(1, n), rnd.randrange(1, n), 128
        g, r, q = 1, 1, 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n|; raises on failure rather than guessing."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        if n == 1:
            return out
    stack = [n]
    guard = 0
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        guard += 1
        if guard > 200:
            raise ArithmeticError(f"factorization of {n} did not complete")
        d = _brent_rho(m)
        stack.extend([d, m // d])
    return dict(sorted(out.items()))


# -- maximality test ----------------------------------------------------------


def _fp_poly_gcd(u: list[int], v: list[int], p: int) -> list[int]:
    """gcd in F_p[x]; coefficients ascending, normalized monic."""

    def trim(w):
        while w and w[-1] % p == 0:
            w.pop()
        return w

    u = trim([x % p for x in u])
    v = trim([x % p for x in v])
    while v:
        inv = pow(v[-1], p - 2, p)
        r = list(u)
        while len(r) >= len(v):
            if r[-1] % p:
                f = r[-1] * inv % p
                k = len(r) - len(v)
                for i, y in enumerate(v):
                    r[k + i] = (r[k + i] - f * y) % p
            trim(r)
            if not r:
                break
        u, v = v, trim(r)
    if u:
        inv = pow(u[-1], p - 2, p)
        u = [x * inv % p for x in u]
    return u


def _sqrt_mod_p(a: int, p: int):
    """Tonelli-Shanks; None if a is a non-residue."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _multiple_root_candidates(a: int, b: int, c: int, d: int, p: int):
    """Finite points t in F_p where f(x,1) could have a multiple root."""
    if p <= 1000:
        return list(range(p))
    g = _fp_poly_gcd([d, c, b, a], [c, 2 * b, 3 * a], p)
    deg = len(g) - 1
    if deg <= 0:
        return []
    if deg == 1:
        return [(-g[0]) % p]
    if deg == 2:
        disc = (g[1] * g[1] - 4 * g[0]) % p
        s = _sqrt_mod_p(disc, p)
        if s is None:
            return []
        inv2 = pow(2, p - 2, p)
        return list({(-g[1] + s) * inv2 % p, (-g[1] - s) * inv2 % p})
    # deg 3: f' = 0 in F_p[x]; fall back to roots of f itself (p in {2,3} only)
    return list(range(p)) if p <= 3 else []


def is_maximal_at(f: BinaryCubicForm | tuple, p: int) -> bool:
    """True iff the cubic ring R(f) tensored with Z_p is maximal."""
    a, b, c, d = f.coeffs() if isinstance(f, BinaryCubicForm) else f
    D = discriminant((a, b, c, d))
    if D == 0:
        raise ValueError("zero discriminant")
    if content((a, b, c, d)) % p == 0:
        return False
    p2 = p * p
    if D % p2 != 0:
        return True  # non-maximality at p forces p^2 | disc
    # finite points: f(t,1) = 0 mod p^2 and f'(t,1) = 0 mod p
    for t in _multiple_root_candidates(a, b, c, d, p):
        ft = (((a * t + b) * t + c) * t + d) % p2
        if ft == 0 and ((3 * a * t + 2 * b) * t + c) % p == 0:
            return False
    # point at infinity (1:0): multiple iff p | a, p | b; lift iff p^2 | a
    if a % p2 == 0 and b % p == 0:
        return False
    return True


def is_maximal_at_array(a, b, c, d, p: int):
    """Vectorized is_maximal_at over int64 coefficient arrays."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    d = np.asarray(d, dtype=np.int64)
    p2 = p * p
    nonmax = (a % p == 0) & (b % p == 0) & (c % p == 0) & (d % p == 0)
    for t in range(p):
        ft = ((((a * t) % p2 + b) * t) % p2 + c) * t % p2
        ft = (ft + d) % p2
        fpt = ((3 * a * t + 2 * b) * t + c) % p
        nonmax |= (ft == 0) & (fpt == 0)
    nonmax |= (a % p2 == 0) & (b % p == 0)
    return ~nonmax


def is_maximal(f: BinaryCubicForm | tuple) -> bool:
    """Maximality of R(f): conjunction of the local tests at primes with p^2 | disc."""
    coeffs = f.coeffs() if isinstance(f, BinaryCubicForm) else f
    D = discriminant(coeffs)
    if D == 0:
        raise ValueError("zero discriminant")
    for p, e in factorize(D).items():
        if e >= 2 and not is_maximal_at(coeffs, p):
            return False
    return True


# -- Dedekind criterion for monic cubics (independent oracle) -----------------


def _fp_roots(coeffs: list[int], p: int) -> list[int]:
    return [t for t in range(p) if sum(ci * pow(t, i, p) for i, ci in enumerate(coeffs)) % p == 0]


def _fp_factor_monic(coeffs: list[int], p: int):
    """Factor a monic polynomial over F_p into monic irreducibles (trial roots;
    intended for moderate p)."""
    if p > 200000:
        raise ValueError("dedekind_oracle supports p <= 200000")
    coeffs = [x % p for x in coeffs]
    factors: dict[tuple, int] = {}
    work = list(coeffs)

    def divide_linear(w, t):
        # synthetic division of ascending-coefficient monic poly by (x - t)
        n = len(w) - 1
        out = [0] * n
        acc = w[n]
        for i in range(n - 1, -1, -1):
            out[i] = acc
            acc = (w[i] + acc * t) % p
        return out, acc

    changed = True
    while len(work) > 1 and changed:
        changed = False
        for t in range(p):
            q, r = divide_linear(work, t)
            if r % p == 0:
                key = ((-t) % p, 1)
                factors[key] = factors.get(key, 0) + 1
                work = q
                changed = True
                break
    if len(work) > 1:
        # irreducible tail of degree >= 2 (monic)
        inv = pow(work[-1], p - 2, p)
        tail = tuple(x * inv % p for x in work)
        factors[tail] = factors.get(tail, 0) + 1
    return factors


def _poly_mul_mod(u, v, p):
    out = [0] * (len(u) + len(v) - 1)
    for i, x in enumerate(u):
        for j, y in enumerate(v):
            out[i + j] = (out[i + j] + x * y) % p
    return out


def dedekind_oracle(g_coeffs, p: int) -> bool:
    """Dedekind's criterion: is Z[x]/(g) maximal at p?  g monic cubic,
    coefficients ascending (g0, g1, g2, 1)."""
    g = [int(x) for x in g_coeffs]
    if len(g) != 4 or g[3] != 1:
        raise ValueError("monic cubic required, ascending coefficients")
    factors = _fp_factor_monic(g, p)
    g1 = [1]
    h = [1]
    for fac, e in factors.items():
        fac = list(fac) if len(fac) > 2 else [fac[0], 1]
        g1 = _poly_mul_mod(g1, fac, p)
        for _ in range(e - 1):
            h = _poly_mul_mod(h, fac, p)
    # lift g1, h to Z with coefficients in [0, p)
    gh = [0] * (len(g1) + len(h) - 1)
    for i, x in enumerate(g1):
        for j, y in enumerate(h):
            gh[i + j] += x * y
    T = [(gh[i] if i < len(gh) else 0) - g[i] for i in range(4)]
    if any(t % p for t in T):
        raise ArithmeticError("internal: g1*h != g mod p")
    T = [t // p for t in T]
    gcd1 = _fp_poly_gcd(T, g1, p)
    gcd2 = _fp_poly_gcd(gcd1, h, p)
    return len(gcd2) == 1  # gcd is a nonzero constant


# -- exact local densities over (Z/p^2)^4 --------------------------------------


class CongruencePredicate:
    """Coefficient-vector congruence class: (a,b,c,d) mod m in a residue set."""

    def __init__(self, m: int, residues):
        if m < 1 or m > 10**6:
            raise ValueError("modulus out of range (1 <= m <= 10^6)")
        self.m = m
        self.residues = frozenset(tuple(int(x) % m for x in r) for r in residues)

    def density(self) -> Fraction:
        return Fraction(len(self.residues), self.m**4)


def local_density(p: int, what="maximal") -> Fraction:
    """Exact p-adic density by exhaustive count over (Z/p^2)^4.

    what = "maximal" counts forms maximal at p; a CongruencePredicate counts
    its congruence class (its modulus must divide p^2 in that case).
    """
    if p not in (2, 3, 5, 7):
        raise ValueError("exhaustive mode supports p in {2, 3, 5, 7}")
    p2 = p * p
    if isinstance(what, CongruencePredicate):
        if p2 % what.m != 0:
            raise ValueError(f"modulus {what.m} does not divide p^2 = {p2}")
        return what.density()
    if what != "maximal":
        raise ValueError(f"unknown predicate {what!r}")
    vals = np.arange(p2, dtype=np.int64)
    b, c, d = np.meshgrid(vals, vals, vals, indexing="ij")
    b, c, d = b.ravel(), c.ravel(), d.ravel()
    count = 0
    for a_res in range(p2):
        a = np.full_like(b, a_res)
        count += int(np.count_nonzero(is_maximal_at_array(a, b, c, d, p)))
    return Fraction(count, p2**4)
