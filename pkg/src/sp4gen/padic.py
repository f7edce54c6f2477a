"""Exact p-adic helpers on top of ``fractions.Fraction``.

Everything here is elementary plumbing: valuations, unit parts, Legendre
symbols, square roots mod p^k, the p-part fractional map used by additive
characters, and a small integer Hermite normal form for lattice comparisons.
No floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError

Rat = Fraction | int


def pval(x: Rat, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise PreconditionError("valuation of zero is undefined (use +infinity sentinel)")
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x: Rat, p: int) -> Fraction:
    """x * p**(-val(x)); numerator and denominator both coprime to p."""
    return Fraction(x) / Fraction(p) ** pval(x, p)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for odd p, a coprime to p; returns +-1."""
    a %= p
    if a == 0:
        raise PreconditionError("legendre symbol needs a unit")
    s = pow(a, (p - 1) // 2, p)
    return 1 if s == 1 else -1


def unit_residue(x: Rat, p: int) -> int:
    """Residue mod p of the unit part of x (an integer in 1..p-1)."""
    u = unit_part(x, p)
    return u.numerator * pow(u.denominator, -1, p) % p


def is_unit_square(x: Rat, p: int) -> bool:
    """Whether a p-adic unit rational is a square in Z_p (tame: residue test)."""
    if pval(x, p) != 0:
        raise PreconditionError("is_unit_square needs valuation 0")
    return legendre(unit_residue(x, p), p) == 1


def least_nonresidue(p: int) -> int:
    """Least positive quadratic non-residue mod p (the canonical unit u)."""
    for a in range(2, p):
        if legendre(a, p) == -1:
            return a
    raise PreconditionError(f"p={p} has no non-residue; p must be an odd prime")


def sqrt_mod_p(a: int, p: int) -> int:
    """A square root of a mod p (Tonelli-Shanks), a a quadratic residue."""
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        raise PreconditionError("not a quadratic residue")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = least_nonresidue(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def sqrt_mod_pk(a: int, p: int, k: int) -> int:
    """Square root of a unit square a mod p^k, by Newton lifting."""
    r = sqrt_mod_p(a, p)
    mod = p
    while mod < p**k:
        mod = min(mod * mod, p**k)
        r = (r + a * pow(r, -1, mod)) * pow(2, -1, mod) % mod
    assert (r * r - a) % p**k == 0
    return r


def padic_fractional_part(x: Rat, p: int) -> Fraction:
    """The p-power part of x mod 1: a fraction c/p^k in [0, 1).

    Additive mod 1, vanishes exactly on rationals that are p-integral.
    """
    x = Fraction(x)
    if x == 0:
        return Fraction(0)
    k = -pval(x, p)
    if k <= 0:
        return Fraction(0)
    pk = p**k
    # x = numerator / (d' * p^k) with d' coprime to p
    assert x.denominator % pk == 0
    dprime = x.denominator // pk
    c = x.numerator * pow(dprime, -1, pk) % pk
    return Fraction(c, pk)


def rat_range_units(p: int, bound: int) -> list[int]:
    """Integers in [1, bound] coprime to p (sampling helpers)."""
    return [a for a in range(1, bound + 1) if a % p != 0]


# ---------------------------------------------------------------------------
# Integer lattices: Hermite normal form for exact lattice comparisons.


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Row-style HNF of an integer matrix whose rows generate a full lattice.

    Returns a canonical upper-triangular generator matrix, suitable for
    equality tests between lattices given by different generating sets.
    """
    m = [list(map(int, r)) for r in rows]
    ncols = len(m[0]) if m else 0
    basis: list[list[int]] = []
    for col in range(ncols):
        # gather rows with a nonzero entry in this column, reduce pairwise
        while True:
            pivots = [r for r in m if r[col] != 0]
            if len(pivots) <= 1:
                break
            pivots.sort(key=lambda r: abs(r[col]))
            a, b = pivots[0], pivots[1]
            qq = b[col] // a[col]
            for j in range(ncols):
                b[j] -= qq * a[j]
            m = [r for r in m if any(r)]
        piv = next((r for r in m if r[col] != 0), None)
        if piv is None:
            continue
        if piv[col] < 0:
            for j in range(ncols):
                piv[j] = -piv[j]
        basis.append(piv)
        m = [r for r in m if r is not piv]
    if m and any(any(r) for r in m):
        raise PreconditionError("generators not reduced to triangular form")
    # reduce entries above each pivot
    for i in range(len(basis) - 1, -1, -1):
        pcol = next(j for j in range(ncols) if basis[i][j] != 0)
        for k in range(i):
            if basis[k][pcol] != 0:
                qq = basis[k][pcol] // basis[i][pcol]
                for j in range(ncols):
                    basis[k][j] -= qq * basis[i][j]
    return tuple(tuple(r) for r in basis)


def lattice_key(gens: Iterable[Sequence[Fraction]], p: int) -> tuple:
    """Canonical key of the Z_(p)-lattice spanned by rational generators.

    Row reduction over the local ring Z_(p): rows may be scaled by rationals
    of valuation 0 and combined with p-integral coefficients.  Pivots are
    normalized to p-powers and entries above pivots reduced mod the pivot,
    so two generating sets span the same lattice iff their keys coincide.
    """
    rows = [list(map(Fraction, g)) for g in gens]
    rows = [r for r in rows if any(x != 0 for x in r)]
    if not rows:
        return ()
    ncols = len(rows[0])
    echelon: list[list[Fraction]] = []
    for col in range(ncols):
        cand = [r for r in rows if r[col] != 0]
        if not cand:
            continue
        piv = min(cand, key=lambda r: pval(r[col], p))
        rows.remove(piv)
        v = pval(piv[col], p)
        scale = Fraction(p) ** v / piv[col]  # valuation-0 unit of Z_(p)
        piv = [x * scale for x in piv]
        for r in rows:
            if r[col] != 0:
                c = r[col] / piv[col]
                assert pval(c, p) >= 0
                for j in range(ncols):
                    r[j] -= c * piv[j]
        rows = [r for r in rows if any(x != 0 for x in r)]
        echelon.append(piv)
    if rows:
        raise PreconditionError("generators did not reduce to echelon form")
    # reduce entries above each pivot: subtract the p-integral part of
    # entry/pivot, leaving the canonical p-fractional residue
    for i in range(len(echelon) - 1, -1, -1):
        pcol = next(j for j in range(ncols) if echelon[i][j] != 0)
        for k in range(i):
            x = echelon[k][pcol]
            if x == 0:
                continue
            c = x / echelon[i][pcol]
            c -= padic_fractional_part(c, p)
            for j in range(ncols):
                echelon[k][j] -= c * echelon[i][j]
    return tuple(tuple(r) for r in echelon)
