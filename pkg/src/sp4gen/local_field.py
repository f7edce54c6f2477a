"""Arithmetic of F = Q_p (p odd) at the level the genericity decision needs.

Square classes of F and of a quadratic extension E0, the tame Hilbert symbol
with an independent solubility oracle, norm-group membership for quadratic
extensions, the coset of the trace kernel inside E0*/(F* E0*^2), and the
standard additive character with conductor p_F.

Everything decision-facing works on square-class coordinates; explicit field
models (see :mod:`sp4gen.quadmodel`) appear only inside sampling oracles.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import PreconditionError, SchemaError, UnsupportedModeError
from .padic import (
    Rat,
    is_unit_square,
    least_nonresidue,
    legendre,
    padic_fractional_part,
    pval,
    unit_part,
    unit_residue,
)

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _is_odd_prime_power(q: int) -> bool:
    if q < 3 or q % 2 == 0:
        return False
    for p in _SMALL_PRIMES:
        if q % p == 0:
            while q % p == 0:
                q //= p
            return q == 1
    # q has no small factor; accept primes only
    return all(q % d for d in range(3, int(q**0.5) + 1, 2))


@dataclass(frozen=True)
class LocalField:
    """F = Q_p in concrete mode (p given), or the abstract residue datum q.

    Abstract mode retains only q (an odd prime power); it supports everything
    that depends on q mod 4 alone.  Concrete matrix computations require
    q = p prime, with uniformizer fixed as p.
    """

    q: int
    p: int | None = None

    def __post_init__(self):
        if not _is_odd_prime_power(self.q):
            raise SchemaError(f"q={self.q} must be an odd prime power >= 3")
        if self.p is not None:
            if self.p != self.q:
                raise SchemaError("concrete mode requires q = p prime")
            if any(self.p % d == 0 for d in range(3, int(self.p**0.5) + 1, 2)):
                raise SchemaError(f"p={self.p} must be an odd prime")

    @classmethod
    def concrete(cls, p: int) -> "LocalField":
        return cls(q=p, p=p)

    @property
    def is_concrete(self) -> bool:
        return self.p is not None

    def require_concrete(self) -> int:
        if self.p is None:
            raise UnsupportedModeError("operation needs a concrete prime p")
        return self.p

    @property
    def nonresidue(self) -> int:
        """Canonical non-square unit u: least positive non-residue mod p."""
        return least_nonresidue(self.require_concrete())

    @property
    def minus_one_is_square(self) -> bool:
        return self.q % 4 == 1


@dataclass(frozen=True)
class SquareClass:
    """An element of F*/(F*)^2 in coordinates (valuation parity, unit bit).

    unit_nonsquare = 1 means the unit part is a non-square mod p.  The four
    classes form a Klein group under multiplication (bitwise xor).
    """

    val_parity: int
    unit_nonsquare: int

    def __post_init__(self):
        if self.val_parity not in (0, 1) or self.unit_nonsquare not in (0, 1):
            raise SchemaError("square-class coordinates are bits")

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return SquareClass(self.val_parity ^ other.val_parity, self.unit_nonsquare ^ other.unit_nonsquare)

    @property
    def is_identity(self) -> bool:
        return self.val_parity == 0 and self.unit_nonsquare == 0

    _NAMES = {(0, 0): "1", (0, 1): "u", (1, 0): "p", (1, 1): "up"}

    def __str__(self) -> str:
        return self._NAMES[(self.val_parity, self.unit_nonsquare)]

    @classmethod
    def from_str(cls, s: str) -> "SquareClass":
        for bits, name in cls._NAMES.items():
            if name == s:
                return cls(*bits)
        raise SchemaError(f"unknown square class {s!r} (expected 1,u,p,up)")

    def representative(self, field: LocalField) -> Fraction:
        """The canonical representative p^val_parity * u^unit_nonsquare."""
        p = field.require_concrete()
        return Fraction(p**self.val_parity * field.nonresidue**self.unit_nonsquare)


SQUARE_CLASSES = tuple(SquareClass(a, b) for a in (0, 1) for b in (0, 1))
ONE = SquareClass(0, 0)


def class_of_minus_one(field: LocalField) -> SquareClass:
    return ONE if field.minus_one_is_square else SquareClass(0, 1)


def square_class(x: Rat, field: LocalField) -> SquareClass:
    """Square class of a nonzero rational in F = Q_p (concrete mode only)."""
    p = field.require_concrete()
    if Fraction(x) == 0:
        raise PreconditionError("zero has no square class")
    v = pval(x, p)
    return SquareClass(v % 2, 0 if is_unit_square(unit_part(x, p), p) else 1)


def hilbert_symbol(a: SquareClass, b: SquareClass, field: LocalField) -> int:
    """Tame Hilbert symbol (a, b)_F on square classes; total, +-1 valued.

    (a,b) = eps^(alpha*beta) * leg(u_b)^alpha * leg(u_a)^beta where alpha,
    beta are the valuation parities, leg of the canonical non-square is -1,
    and eps = leg(-1) = +1 iff q = 1 mod 4.  Works in abstract mode.
    """
    eps = 1 if field.minus_one_is_square else -1
    s = eps ** (a.val_parity * b.val_parity)
    s *= (-1) ** (a.val_parity * b.unit_nonsquare)
    s *= (-1) ** (b.val_parity * a.unit_nonsquare)
    return s


def hilbert_symbol_rat(a: Rat, b: Rat, field: LocalField) -> int:
    return hilbert_symbol(square_class(a, field), square_class(b, field), field)


def hilbert_solubility_oracle(a: Rat, b: Rat, p: int, depth: int | None = None) -> int:
    """Independent oracle: is a x^2 + b y^2 = 1 soluble over Q_p?

    Searches the homogenization a X^2 + b Y^2 = Z^2 over primitive triples
    mod p^k (scaling solutions into primitive ones), returning +1 exactly when
    a Hensel-liftable certificate is found and -1 only with an exhaustion
    proof at depth k >= 2*max(|val a|, |val b|) + 4.  Never guesses a sign.
    """
    from .hensel import isotropy_decision  # local import: hensel depends on padic only

    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise PreconditionError("coefficients must be nonzero")
    need = 2 * max(abs(pval(a, p)), abs(pval(b, p))) + 4
    k = need if depth is None else depth
    if k < need:
        raise PreconditionError(f"depth {k} below certified bound {need}")
    isotropic, _witness = isotropy_decision([a, b, Fraction(-1)], p, k)
    return 1 if isotropic else -1


@dataclass(frozen=True)
class QuadExt:
    """A quadratic extension E = F(sqrt(d)) given by the class d != 1."""

    base: LocalField
    disc: SquareClass

    def __post_init__(self):
        if self.disc.is_identity:
            raise SchemaError("disc must be a nontrivial square class")

    @property
    def ramified(self) -> bool:
        return self.disc.val_parity == 1

    def disc_representative(self) -> Fraction:
        return self.disc.representative(self.base)

    def __str__(self) -> str:
        kind = "ramified" if self.ramified else "unramified"
        return f"F(sqrt({self.disc}))/{kind}, q={self.base.q}"


def norm_group_contains(ext: QuadExt, x: SquareClass) -> bool:
    """Whether the class x lies in N_{E/F}(E*), i.e. (x, disc E) = +1."""
    return hilbert_symbol(x, ext.disc, ext.base) == 1


@dataclass(frozen=True)
class E0SquareClass:
    """An element of E0*/(E0*)^2 for a quadratic E0/F, in two bits.

    For unramified E0 the unit bit refers to the degree-2 residue field; for
    ramified E0 it refers to k_F.  Serialized as 1, v, t, vt (t = uniformizer
    parity, v = unit non-square bit).
    """

    host: QuadExt
    val_parity: int
    unit_nonsquare: int

    def __post_init__(self):
        if self.val_parity not in (0, 1) or self.unit_nonsquare not in (0, 1):
            raise SchemaError("E0 square-class coordinates are bits")

    def __mul__(self, other: "E0SquareClass") -> "E0SquareClass":
        if other.host != self.host:
            raise PreconditionError("classes live over different extensions")
        return E0SquareClass(self.host, self.val_parity ^ other.val_parity, self.unit_nonsquare ^ other.unit_nonsquare)

    _NAMES = {(0, 0): "1", (0, 1): "v", (1, 0): "t", (1, 1): "vt"}

    def __str__(self) -> str:
        return self._NAMES[(self.val_parity, self.unit_nonsquare)]

    @classmethod
    def from_str(cls, host: QuadExt, s: str) -> "E0SquareClass":
        for bits, name in cls._NAMES.items():
            if name == s:
                return cls(host, *bits)
        raise SchemaError(f"unknown E0 square class {s!r} (expected 1,v,t,vt)")


def e0_contains_F_times_squares(e0: QuadExt, x: E0SquareClass) -> bool:
    """Membership of x in the index-2 subgroup F* E0*^2 of E0*.

    Unramified E0: every unit of F is a square in E0 and p realizes the odd
    valuations, so membership only constrains the unit bit.  Ramified E0:
    units of F cover both residue classes while all of F* E0*^2 sits in even
    E0-valuation, so membership only constrains the valuation parity.
    """
    if x.host != e0:
        raise PreconditionError("class does not live over this extension")
    if e0.ramified:
        return x.val_parity == 0
    return x.unit_nonsquare == 0


class TraceKernelCoset(Enum):
    INSIDE_F_E0SQ = "inside_FE0sq"
    OUTSIDE_F_E0SQ = "outside_FE0sq"


def trace_kernel_coset(e0: QuadExt) -> TraceKernelCoset:
    """Which F* E0*^2-coset of E0* contains the nonzero trace-kernel elements.

    The kernel of tr_{E0/F} is F*.sqrt(d).  For unramified E0 the residue of
    sqrt(d) is a square in the degree-2 residue field iff (-1)^((q+1)/2) = 1,
    i.e. iff q = 3 mod 4; for ramified E0 the kernel has odd valuation.  Hence
    the kernel sits inside F* E0*^2 exactly when E0 is unramified and
    q = 3 mod 4.  Must agree with trace_kernel_sampling_oracle.
    """
    if not e0.ramified and e0.base.q % 4 == 3:
        return TraceKernelCoset.INSIDE_F_E0SQ
    return TraceKernelCoset.OUTSIDE_F_E0SQ


def trace_kernel_sampling_oracle(e0: QuadExt, samples: int = 48, seed: int = 0) -> TraceKernelCoset:
    """Ground-truth check of trace_kernel_coset in the explicit model F[t]/(t^2-d).

    Generates nonzero trace-zero elements (pure multiples of sqrt(d)), computes
    their square classes in the model, asserts they land in a single
    F* E0*^2-coset, and returns that coset.
    """
    from .quadmodel import QuadModel

    p = e0.base.require_concrete()
    model = QuadModel.from_ext(e0)
    rng = random.Random(seed)
    verdicts = set()
    for _ in range(samples):
        b = Fraction(rng.choice([c for c in range(1, 40) if c % p]))
        b *= Fraction(p) ** rng.randrange(-2, 3)
        if rng.random() < 0.5:
            b = -b
        x = model.element(Fraction(0), b)  # b * sqrt(d): trace zero by construction
        assert x.trace() == 0 and not x.is_zero()
        verdicts.add(e0_contains_F_times_squares(e0, x.square_class(e0)))
    if len(verdicts) != 1:
        raise PreconditionError("sampling oracle saw trace-kernel elements in both cosets (bug)")
    inside = verdicts.pop()
    return TraceKernelCoset.INSIDE_F_E0SQ if inside else TraceKernelCoset.OUTSIDE_F_E0SQ


@dataclass(frozen=True)
class AdditiveCharacter:
    """psi_F with conductor p_F, valued in Q/Z via the p-power fractional part.

    psi_F(x) is the class of the p-part of x/p mod 1; it vanishes exactly on
    p_F and is additive.  All downstream decisions depend only on vanishing,
    which is independent of the normalization choice.
    """

    field: LocalField

    def __call__(self, x: Rat) -> Fraction:
        p = self.field.require_concrete()
        return padic_fractional_part(Fraction(x) / p, p)

    def is_trivial_on(self, x: Rat) -> bool:
        return self(x) == 0


def all_quadratic_extensions(field: LocalField) -> tuple[QuadExt, ...]:
    """The three quadratic extensions of F up to isomorphism."""
    return tuple(QuadExt(field, c) for c in SQUARE_CLASSES if not c.is_identity)
