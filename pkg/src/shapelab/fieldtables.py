"""Ingestion of external degree-3/4/5 field tables and their lattice shapes.

Input rows carry a label, degree, signature, discriminant, monic defining
polynomial and an integral basis in the power basis.  Each accepted record
must pass the covolume gate |det Gram| = |disc| (a wrong basis or wrong
discriminant is rejected, not repaired); shapes are the q-Gram of the basis
projected orthogonally to 1, reduced canonically (rank 2) or
LLL+Minkowski-reduced and normalized to determinant 1 (rank 3, 4).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .shape import (
    EmbeddingMatrix,
    ShapeGram,
    UHPoint,
    gauss_reduce,
    gram_det_check,
    lll_minkowski_reduce,
    shape_via_sublattice,
    snap_uh_point,
)

__all__ = [
    "FieldTableRecord",
    "ShapeRecord45",
    "FieldTableError",
    "parse_field_table",
    "serialize_field_table",
    "shape_of_record",
    "d4_symmetry_test",
]

CSV_COLUMNS = "label,degree,i,disc,poly,basis"


class FieldTableError(ValueError):
    """Parse/validation failure with a stable error code and line number."""

    def __init__(self, code: str, line: int, msg: str):
        super().__init__(f"line {line}: [{code}] {msg}")
        self.code = code
        self.line = line


@dataclass(frozen=True)
class FieldTableRecord:
    label: str
    degree: int
    i: int
    disc: int
    poly: tuple  # ascending integer coefficients, monic, length degree+1
    basis: tuple  # degree x degree Fractions, rows = basis elements in power basis


@dataclass(frozen=True)
class ShapeRecord45:
    label: str
    degree: int
    i: int
    disc: int
    gram: tuple          # reduced (n-1)x(n-1), det normalized to 1
    diag_sorted: tuple
    cosines: tuple
    d4_symmetric: bool | None = None
    x: float | None = None   # rank-2 canonical coordinates (degree 3 only)
    y: float | None = None


def _parse_rational(tok: str, line: int) -> Fraction:
    tok = tok.strip()
    try:
        if "/" in tok:
            num, den = tok.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(tok))
    except (ValueError, ZeroDivisionError) as e:
        raise FieldTableError("bad_rational", line, f"cannot parse rational {tok!r}: {e}")


def _count_real_roots(poly, line: int) -> tuple[int, np.ndarray]:
    roots = np.roots(list(reversed(poly)))
    coeffs = np.array(poly, dtype=float)
    for _ in range(3):
        fz = np.zeros_like(roots)
        dfz = np.zeros_like(roots)
        for k in range(len(poly) - 1, -1, -1):
            fz = fz * roots + coeffs[k]
        for k in range(len(poly) - 1, 0, -1):
            dfz = dfz * roots + k * coeffs[k]
        roots = roots - np.where(dfz != 0, fz / np.where(dfz != 0, dfz, 1), 0)
    n = len(poly) - 1
    rad = []
    for z in roots:
        fz = sum(poly[k] * z**k for k in range(n + 1))
        dfz = sum(k * poly[k] * z ** (k - 1) for k in range(1, n + 1))
        if dfz == 0:
            raise FieldTableError("bad_poly", line, "repeated roots (zero derivative)")
        rad.append(n * abs(fz / dfz))
    for j in range(n):
        for k in range(j + 1, n):
            if abs(roots[j] - roots[k]) <= rad[j] + rad[k]:
                raise FieldTableError("bad_poly", line, "root certification failed")
    imag_scale = np.abs(roots.imag)
    sep = min(
        abs(roots[j] - roots[k]) for j in range(n) for k in range(j + 1, n)
    )
    real_mask = imag_scale < max(1e-10, 0.01 * sep)
    return int(real_mask.sum()), roots


def parse_field_table(text: str) -> list[FieldTableRecord]:
    """Parse the CSV field table; every invariant violation is a distinct
    FieldTableError with line diagnostics."""
    records = []
    lines = text.splitlines()
    if not lines:
        return records
    start = 0
    if lines[0].strip().replace(" ", "") == CSV_COLUMNS:
        start = 1
    for ln in range(start, len(lines)):
        raw = lines[ln].strip()
        if not raw or raw.startswith("#"):
            continue
        parts = raw.split(",")
        if len(parts) != 6:
            raise FieldTableError("bad_row", ln + 1, f"expected 6 columns, got {len(parts)}")
        label = parts[0].strip()
        try:
            degree = int(parts[1])
            sig = int(parts[2])
            disc = int(parts[3])
        except ValueError as e:
            raise FieldTableError("bad_int", ln + 1, str(e))
        if degree not in (3, 4, 5):
            raise FieldTableError("degree_mismatch", ln + 1, f"degree {degree} not in 3..5")
        poly = tuple(int(t) for t in parts[4].split())
        if len(poly) != degree + 1:
            raise FieldTableError(
                "degree_mismatch", ln + 1,
                f"polynomial has {len(poly) - 1} != {degree} degree",
            )
        if poly[-1] != 1:
            raise FieldTableError("degree_mismatch", ln + 1, "polynomial must be monic")
        toks = parts[5].split(";")
        if len(toks) != degree * degree:
            raise FieldTableError(
                "bad_basis", ln + 1, f"basis needs {degree * degree} entries, got {len(toks)}"
            )
        vals = [_parse_rational(t, ln + 1) for t in toks]
        basis = tuple(
            tuple(vals[r * degree + c] for c in range(degree)) for r in range(degree)
        )
        if basis[0] != tuple([Fraction(1)] + [Fraction(0)] * (degree - 1)):
            raise FieldTableError("bad_first_row", ln + 1, "first basis row must be (1,0,...,0)")
        mat = np.array([[float(v) for v in row] for row in basis])
        if abs(np.linalg.det(mat)) < 1e-12:
            raise FieldTableError("singular_basis", ln + 1, "basis matrix is singular")
        nreal, _ = _count_real_roots(poly, ln + 1)
        if nreal != degree - 2 * sig:
            raise FieldTableError(
                "root_count_mismatch", ln + 1,
                f"{nreal} real roots inconsistent with i={sig}",
            )
        records.append(
            FieldTableRecord(label=label, degree=degree, i=sig, disc=disc, poly=poly, basis=basis)
        )
    return records


def serialize_field_table(records) -> str:
    out = [CSV_COLUMNS]
    for r in records:
        poly = " ".join(str(c) for c in r.poly)
        basis = ";".join(
            (f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator))
            for row in r.basis
            for v in row
        )
        out.append(f"{r.label},{r.degree},{r.i},{r.disc},{poly},{basis}")
    return "\n".join(out) + "\n"


def _embedding_matrix(rec: FieldTableRecord) -> EmbeddingMatrix:
    n = rec.degree
    _, roots = _count_real_roots(rec.poly, 0)
    r = n - 2 * rec.i
    order = np.argsort(np.abs(roots.imag), kind="stable")
    roots = roots[order]
    reals = np.sort(roots[:r].real)
    cplx = [z if z.imag > 0 else z.conjugate() for z in roots[r::2]]
    emb_roots = [complex(t) for t in reals] + list(cplx)
    rows = []
    for row in rec.basis:
        vals = []
        for th in emb_roots:
            vals.append(sum(float(row[k]) * th**k for k in range(n)))
        rows.append(tuple(vals))
    return EmbeddingMatrix(n=n, r=r, rows=tuple(rows))


def shape_of_record(rec: FieldTableRecord, d4_test: bool = False) -> ShapeRecord45:
    """Shape of the ring spanned by the record basis.

    Gate: |det(full q-Gram)| must equal |disc| within 1e-8 relative, otherwise
    the record is rejected (wrong basis or wrong discriminant).  The projected
    Gram is cross-checked against the trace-zero sublattice definition.
    """
    em = _embedding_matrix(rec)
    n, r = em.n, em.r
    rows = [np.asarray(row, dtype=complex) for row in em.rows]
    G = np.empty((n, n))
    for j in range(n):
        for k in range(j, n):
            real = float(np.sum(rows[j][:r].real * rows[k][:r].real))
            cplx = 2.0 * float(np.sum((rows[j][r:] * rows[k][r:].conj()).real))
            G[j, k] = G[k, j] = real + cplx
    rel = gram_det_check(G, rec.disc)
    if rel > 1e-8:
        raise FieldTableError(
            "covolume_mismatch", 0,
            f"{rec.label}: |det Gram| vs |disc| relative error {rel:.2e}",
        )
    # projection of rows 2..n orthogonally to 1
    tr = [float(np.sum(rows[j][:r].real) + 2 * np.sum(rows[j][r:].real)) for j in range(n)]
    P = np.empty((n - 1, n - 1))
    for j in range(1, n):
        for k in range(j, n):
            P[j - 1, k - 1] = P[k - 1, j - 1] = G[j, k] - tr[j] * tr[k] / n
    sub = shape_via_sublattice(em)  # also cross-checks the two definitions
    if n == 3:
        pt, _ = gauss_reduce(ShapeGram.from_matrix(P))
        pt2, _ = gauss_reduce(sub)
        if abs(pt.x - pt2.x) > 1e-9 or abs(pt.y - pt2.y) > 1e-9 * max(1.0, pt.y):
            raise FieldTableError("covolume_mismatch", 0, "shape definitions disagree")
        det = np.linalg.det(P)
        gram = P / math.sqrt(det)
        red, _ = gauss_reduce(ShapeGram.from_matrix(gram))
        A = 1.0 / pt.y
        gram_canon = ((A, A * pt.x), (A * pt.x, A * (pt.x**2 + pt.y**2)))
        rec45 = ShapeRecord45(
            label=rec.label,
            degree=n,
            i=rec.i,
            disc=rec.disc,
            gram=tuple(tuple(float(v) for v in row) for row in gram_canon),
            diag_sorted=tuple(sorted((gram_canon[0][0], gram_canon[1][1]))),
            cosines=(float(gram_canon[0][1] / math.sqrt(gram_canon[0][0] * gram_canon[1][1])),),
            x=pt.x,
            y=pt.y,
        )
        return rec45
    red, _ = lll_minkowski_reduce(P)
    red_sub, _ = lll_minkowski_reduce(sub.matrix())
    if not np.allclose(red.matrix(), red_sub.matrix(), rtol=1e-9, atol=1e-9):
        raise FieldTableError("covolume_mismatch", 0, "shape definitions disagree")
    M = red.matrix()
    diag = tuple(sorted(float(M[j, j]) for j in range(n - 1)))
    cos = tuple(
        float(M[j, k] / math.sqrt(M[j, j] * M[k, k]))
        for j in range(n - 1)
        for k in range(j + 1, n - 1)
    )
    d4 = None
    if n == 4 and d4_test:
        d4 = d4_symmetry_test(M)
    return ShapeRecord45(
        label=rec.label,
        degree=n,
        i=rec.i,
        disc=rec.disc,
        gram=tuple(tuple(float(v) for v in row) for row in M),
        diag_sorted=diag,
        cosines=cos,
        d4_symmetric=d4,
    )


def d4_symmetry_test(G, rel_tol: float = 1e-6) -> bool:
    """Is there an integer involution U != +-I with U^T G U = G?

    Candidate columns are integer vectors of matching norm with entries
    bounded by ceil(max diag / min diag) + 1 (isometries map a reduced basis
    to short vectors); the bound is heuristic but ample for reduced Grams.
    """
    G = np.asarray(G, dtype=float)
    m = G.shape[0]
    diag = np.diag(G)
    bound = int(math.ceil(diag.max() / diag.min())) + 1
    scale = float(np.abs(G).max())
    cand: list[list[np.ndarray]] = [[] for _ in range(m)]
    for v in itertools.product(range(-bound, bound + 1), repeat=m):
        if all(x == 0 for x in v):
            continue
        vv = np.array(v)
        qv = float(vv @ G @ vv)
        for j in range(m):
            if abs(qv - diag[j]) <= rel_tol * max(diag[j], scale):
                cand[j].append(vv)
    for cols in itertools.product(*cand):
        U = np.stack(cols, axis=1)
        det = round(float(np.linalg.det(U)))
        if det not in (1, -1):
            continue
        if not np.allclose(U.T @ G @ U, G, rtol=0, atol=rel_tol * scale):
            continue
        if not np.array_equal(U @ U, np.eye(m, dtype=U.dtype)):
            continue
        if np.array_equal(U, np.eye(m, dtype=U.dtype)) or np.array_equal(
            U, -np.eye(m, dtype=U.dtype)
        ):
            continue
        return True
    return False
