"""Small exact linear algebra over Fractions (dimension <= 4 throughout)."""

from __future__ import annotations

from fractions import Fraction

from .errors import PreconditionError

Mat = list[list[Fraction]]
Vec = list[Fraction]


def mat(rows) -> Mat:
    return [[Fraction(x) for x in r] for r in rows]


def zeros(n: int, m: int | None = None) -> Mat:
    m = n if m is None else m
    return [[Fraction(0)] * m for _ in range(n)]


def eye(n: int) -> Mat:
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def mat_mul(a: Mat, b: Mat) -> Mat:
    n, k, m = len(a), len(b), len(b[0])
    out = zeros(n, m)
    for i in range(n):
        ai = a[i]
        for j in range(m):
            s = Fraction(0)
            for t in range(k):
                s += ai[t] * b[t][j]
            out[i][j] = s
    return out


def mat_vec(a: Mat, v: Vec) -> Vec:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def transpose(a: Mat) -> Mat:
    return [list(r) for r in zip(*a)]


def mat_add(a: Mat, b: Mat) -> Mat:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Mat, b: Mat) -> Mat:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Mat, c) -> Mat:
    c = Fraction(c)
    return [[c * x for x in r] for r in a]


def mat_eq(a: Mat, b: Mat) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def det(a: Mat) -> Fraction:
    n = len(a)
    m = [row[:] for row in a]
    d = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            if m[r][c] != 0:
                f = m[r][c] * inv
                for j in range(c, n):
                    m[r][j] -= f * m[c][j]
    return d


def mat_inv(a: Mat) -> Mat:
    n = len(a)
    m = [row[:] + e for row, e in zip(a, eye(n))]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise PreconditionError("matrix is singular")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [row[n:] for row in m]


def rank(a: Mat) -> int:
    if not a:
        return 0
    m = [row[:] for row in a]
    nrows, ncols = len(m), len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == nrows:
            break
    return r


def nullspace(rows: Mat) -> list[Vec]:
    """Basis of the right kernel of a rational matrix (free-column style)."""
    if not rows:
        return []
    m = [list(map(Fraction, r)) for r in rows]
    nrows, ncols = len(m), len(m[0])
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    pivot_cols = {c for _, c in pivots}
    basis = []
    for c in range(ncols):
        if c in pivot_cols:
            continue
        v = [Fraction(0)] * ncols
        v[c] = Fraction(1)
        for rr, cc in pivots:
            v[cc] = -m[rr][c]
        basis.append(v)
    return basis


def in_span(vectors: list[Vec], v: Vec) -> bool:
    base = [list(map(Fraction, w)) for w in vectors]
    return rank(base) == rank(base + [list(map(Fraction, v))])


def char_poly(a: Mat) -> list[Fraction]:
    """Coefficients [c_0, ..., c_n] of det(xI - A) via Faddeev-LeVerrier."""
    n = len(a)
    coeffs = [Fraction(1)]
    mk = [row[:] for row in a]
    for k in range(1, n + 1):
        if k > 1:
            mk = mat_mul(a, mk)
        tr = sum(mk[i][i] for i in range(n))
        c = -tr / k
        coeffs.append(c)
        for i in range(n):
            mk[i][i] += c
    # [1, c1, ..., cn] for x^n + c1 x^(n-1) + ... + cn
    return coeffs


def poly_eval(coeffs: list[Fraction], x: Fraction) -> Fraction:
    out = Fraction(0)
    for c in coeffs:
        out = out * x + c
    return out
