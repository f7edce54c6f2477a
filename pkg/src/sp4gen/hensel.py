"""Certified isotropy search for diagonal forms over Q_p (p odd).

The decision procedure for "does sum d_i x_i^2 = 0 have a nontrivial zero"
returns either a witness vector carrying a Hensel certificate (a primitive
root mod p^j whose gradient valuation m satisfies j >= 2m+1, so Newton
iteration converges to an exact root), or an exhaustion proof: the tree of
primitive roots mod p^j, explored level by level, dies at some j <= depth.
Both outcomes are machine-checkable; no sign is ever returned uncertified.

Completeness of the finding pass rests on valuation descent: a primitive
exact isotropic vector has a unit coordinate either in a unit-coefficient
slot, or (after dividing unit slots by p) in the descended form, and in both
cases zeroing the other slots leaves a mod-p root with unit gradient.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import PreconditionError, PrecisionError
from .padic import pval

_TREE_CAP = 200_000
_NEWTON_CAP = 64


@dataclass(frozen=True)
class IsotropyWitness:
    """Primitive integer vector v with q(v) = 0 mod p^(2*depth).

    grad_val is the valuation m of the gradient at v; the certificate is
    2*depth >= 2m+1, which it always satisfies by construction (m <= 1).
    """

    vector: tuple[int, ...]
    depth: int
    grad_val: int


@dataclass(frozen=True)
class AbsenceProof:
    """No primitive root of q exists mod p^died_at (hence none at all)."""

    died_at: int
    depth_requested: int


def _norm_coeffs(diag: list[Fraction], p: int) -> tuple[list[int], list[Fraction]]:
    """Normalize coefficients to integers of valuation 0 or 1.

    Each d_i is multiplied by the square (den_i / p^{t_i})^2; the returned
    scales map normalized witness coordinates y back to original ones via
    x_i = scale_i * y_i.
    """
    coeffs, scales = [], []
    for d in diag:
        d = Fraction(d)
        if d == 0:
            raise PreconditionError("diagonal entry zero; form must be regular")
        v = pval(d, p)
        t = (v - (v % 2)) // 2  # v = 2t + (v mod 2), hence d/p^(2t) has valuation 0 or 1
        d = d / Fraction(p) ** (2 * t)
        den = d.denominator
        coeffs.append(int(d * den * den))
        scales.append(Fraction(den, 1) / Fraction(p) ** t)
    return coeffs, scales


def _eval(coeffs, v) -> int:
    return sum(c * x * x for c, x in zip(coeffs, v))


def _grad_val(coeffs, v, p: int, cap: int) -> int:
    best = cap
    for c, x in zip(coeffs, v):
        g = 2 * c * x
        if g == 0 or g % p**cap == 0:
            continue
        w = 0
        while g % p == 0:
            g //= p
            w += 1
        best = min(best, w)
    return best


def newton_refine(coeffs: list[int], v: tuple[int, ...], p: int, target: int) -> tuple[int, ...]:
    """Lift a certified root to q(v) = 0 mod p^target by 1-variable Newton.

    Requires q(v) = 0 mod p^(2m+1), m the gradient valuation at v.
    """
    m = _grad_val(coeffs, v, p, _NEWTON_CAP)
    if m >= _NEWTON_CAP or _eval(coeffs, v) % p ** (2 * m + 1) != 0:
        raise PreconditionError("vector does not carry a Hensel certificate")
    i = min(
        (j for j in range(len(v)) if coeffs[j] * v[j] % p**_NEWTON_CAP),
        key=lambda j: pval(2 * coeffs[j] * v[j], p),
    )
    mod = p ** (target + m)
    vv = [x % mod for x in v]
    for _ in range(_NEWTON_CAP):
        f = _eval(coeffs, vv)
        if f % p**target == 0:
            return tuple(x % p**target for x in vv)
        df = 2 * coeffs[i] * vv[i]
        assert pval(df, p) == m, "Newton step must preserve the gradient valuation"
        unit = (df // p**m) % mod
        vv[i] = (vv[i] - (f // p**m) * pow(unit, -1, mod)) % mod
    raise PrecisionError("Newton iteration failed to converge (bug)")


def _unit_slot_root(coeffs: list[int], p: int) -> tuple[int, ...] | None:
    """A mod-p root supported on unit-coefficient slots, with a unit coordinate.

    Such a root has gradient valuation 0, i.e. is already a certificate.
    Zeroing non-unit slots loses no generality mod p.
    """
    units = [i for i, c in enumerate(coeffs) if c % p != 0]
    if not units:
        return None
    for assign in itertools.product(range(p), repeat=len(units)):
        if all(a == 0 for a in assign):
            continue
        if sum(coeffs[i] * a * a for i, a in zip(units, assign)) % p == 0:
            v = [0] * len(coeffs)
            for i, a in zip(units, assign):
                v[i] = a
            return tuple(v)
    return None


def find_certified_root(coeffs: list[int], p: int, depth: int) -> IsotropyWitness | None:
    """Two-level certified search; returns a witness refined to 2*depth digits."""
    v0 = _unit_slot_root(coeffs, p)
    if v0 is not None:
        vec = newton_refine(coeffs, v0, p, 2 * depth)
        return IsotropyWitness(vec, depth, _grad_val(coeffs, vec, p, _NEWTON_CAP))
    # descent: substitute x_i -> p x_i on unit slots and divide the form by p
    desc = [c * p if c % p != 0 else c // p for c in coeffs]
    v1 = _unit_slot_root(desc, p)
    if v1 is not None:
        refined = newton_refine(desc, v1, p, 2 * depth)
        vec = tuple(x * p if coeffs[i] % p != 0 else x for i, x in enumerate(refined))
        # q(vec) = p * q_desc(refined) = 0 mod p^(2*depth+1)
        assert _eval(coeffs, vec) % p ** (2 * depth) == 0
        return IsotropyWitness(
            tuple(x % p ** (2 * depth) for x in vec), depth, _grad_val(coeffs, vec, p, _NEWTON_CAP)
        )
    return None


def prove_absence(coeffs: list[int], p: int, depth: int) -> AbsenceProof:
    """Exhaust primitive roots of q mod p^j level by level up to depth."""
    n = len(coeffs)
    frontier = [
        v
        for v in itertools.product(range(p), repeat=n)
        if any(v) and _eval(coeffs, v) % p == 0
    ]
    level = 1
    while frontier:
        if level >= depth:
            raise PrecisionError(f"primitive roots survive to depth {depth}; increase depth")
        mod_next = p ** (level + 1)
        children = []
        for v in frontier:
            for w in itertools.product(range(p), repeat=n):
                child = tuple(x + p**level * y for x, y in zip(v, w))
                if _eval(coeffs, child) % mod_next == 0:
                    children.append(child)
            if len(children) > _TREE_CAP:
                raise PrecisionError("root tree exceeded cap; increase depth or report")
        frontier = children
        level += 1
    return AbsenceProof(died_at=level, depth_requested=depth)


def isotropy_decision(diag, p: int, depth: int) -> tuple[bool, IsotropyWitness | AbsenceProof]:
    """Decide isotropy of a diagonal form over Q_p, with certificate.

    Witness coordinates refer to the normalized form; use
    isotropy_decision_with_map to pull them back to the caller's coordinates.
    """
    isotropic, witness, _scales = isotropy_decision_with_map(diag, p, depth)
    return isotropic, witness


def isotropy_decision_with_map(
    diag, p: int, depth: int
) -> tuple[bool, IsotropyWitness | AbsenceProof, list[Fraction]]:
    if depth < 2:
        raise PreconditionError("depth must be at least 2")
    coeffs, scales = _norm_coeffs([Fraction(d) for d in diag], p)
    hit = find_certified_root(coeffs, p, depth)
    if hit is not None:
        assert _eval(coeffs, hit.vector) % p ** (2 * depth) == 0
        return True, hit, scales
    proof = prove_absence(coeffs, p, depth)
    return False, proof, scales
