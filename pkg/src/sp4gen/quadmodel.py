"""Explicit models E0 = F[t]/(t^2 - d) and E = E0[b]/(b^2 - gamma).

These exist to back the sampling oracles and the matrix-realization builder;
the decision path itself runs on square-class coordinates.  Elements are exact
rational pairs a + b*sqrt(d), quartic elements are pairs of those.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import PreconditionError
from .local_field import E0SquareClass, LocalField, QuadExt, square_class
from .padic import Rat, is_unit_square, pval


@dataclass(frozen=True)
class QuadModel:
    """The quadratic field F(sqrt(d)) with d an explicit rational."""

    p: int
    d: Fraction

    def __post_init__(self):
        v = pval(self.d, self.p)
        if v not in (0, 1):
            raise PreconditionError("model disc must be normalized to valuation 0 or 1")
        if v == 0 and is_unit_square(self.d, self.p):
            raise PreconditionError("disc is a square; not a quadratic extension")

    @classmethod
    def from_ext(cls, ext: QuadExt) -> "QuadModel":
        return cls(ext.base.require_concrete(), ext.disc_representative())

    @property
    def ramified(self) -> bool:
        return pval(self.d, self.p) % 2 == 1

    def element(self, a: Rat, b: Rat = 0) -> "QuadElem":
        return QuadElem(self, Fraction(a), Fraction(b))

    def zero(self) -> "QuadElem":
        return self.element(0)

    def one(self) -> "QuadElem":
        return self.element(1)

    def sqrt_d(self) -> "QuadElem":
        return self.element(0, 1)

    def ext(self, field: LocalField) -> QuadExt:
        return QuadExt(field, square_class(self.d, field))


@dataclass(frozen=True)
class QuadElem:
    """a + b*sqrt(d) with exact rational a, b."""

    model: QuadModel
    a: Fraction
    b: Fraction

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __add__(self, other):
        other = self._coerce(other)
        return QuadElem(self.model, self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        other = self._coerce(other)
        return QuadElem(self.model, self.a - other.a, self.b - other.b)

    def __neg__(self):
        return QuadElem(self.model, -self.a, -self.b)

    def __mul__(self, other):
        other = self._coerce(other)
        d = self.model.d
        return QuadElem(
            self.model,
            self.a * other.a + d * self.b * other.b,
            self.a * other.b + self.b * other.a,
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def _coerce(self, other) -> "QuadElem":
        if isinstance(other, QuadElem):
            if other.model != self.model:
                raise PreconditionError("elements of different models")
            return other
        return QuadElem(self.model, Fraction(other), Fraction(0))

    def conj(self) -> "QuadElem":
        return QuadElem(self.model, self.a, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a - self.model.d * self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise PreconditionError("not invertible")
        return QuadElem(self.model, self.a / n, -self.b / n)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def scale(self, c: Rat) -> "QuadElem":
        return QuadElem(self.model, self.a * Fraction(c), self.b * Fraction(c))

    # -- valuation and square class ------------------------------------------

    def valuation(self) -> int:
        """Valuation normalized so nu(E0*) = Z (uniformizer sqrt(d) if ramified)."""
        if self.is_zero():
            raise PreconditionError("valuation of zero")
        p, d = self.model.p, self.model.d
        if self.model.ramified:
            # nu(a) = 2 nu_F(a), nu(b sqrt d) = 2 nu_F(b) + nu_F(d); parities differ
            vals = []
            if self.a:
                vals.append(2 * pval(self.a, p))
            if self.b:
                vals.append(2 * pval(self.b, p) + pval(d, p))
            return min(vals)
        # unramified: nu = nu_F on F, and min is exact because d is a non-square unit
        vals = []
        if self.a:
            vals.append(pval(self.a, p))
        if self.b:
            vals.append(pval(self.b, p) + pval(d, p) // 2)
        return min(vals)

    def square_class(self, host: QuadExt) -> E0SquareClass:
        """Square class in E0*/(E0*)^2 with the coordinates of E0SquareClass."""
        p = self.model.p
        v = self.valuation()
        if self.model.ramified:
            # divide by sqrt(d)^v, then read the residue in k_F
            w = self
            # sqrt(d)^2 = d, so sqrt(d)^v = d^(v//2) * sqrt(d)^(v%2)
            w = w.scale(Fraction(self.model.d) ** -(v // 2))
            if v % 2:
                w = w / self.model.sqrt_d()
            # w is now a unit: its residue is that of the F-part
            assert w.valuation() == 0
            assert pval(w.a, p) == 0, "unit part of ramified element has unit F-component"
            bit = 0 if is_unit_square(w.a, p) else 1
            return E0SquareClass(host, v % 2, bit)
        # unramified: unit part u has N(u) a unit; u is a square iff N(u) is one mod p
        w = self.scale(Fraction(p) ** (-v))
        n = w.norm()
        assert pval(n, p) == 0
        bit = 0 if is_unit_square(n, p) else 1
        return E0SquareClass(host, v % 2, bit)

    def __str__(self):
        return f"({self.a} + {self.b}*sqrt({self.model.d}))"


@dataclass(frozen=True)
class QuarticModel:
    """E = E0(beta) with beta^2 = gamma in E0; conjugation fixes E0, beta -> -beta.

    Elements are z0 + z1*beta with z0, z1 in E0.  The model also provides the
    regular representation of multiplication as exact 4x4 rational matrices in
    the F-basis (1, s, beta, s*beta), s = sqrt(d).
    """

    e0: QuadModel
    gamma: QuadElem

    def __post_init__(self):
        if self.gamma.model != self.e0:
            raise PreconditionError("gamma must live in E0")

    def element(self, z0: QuadElem, z1: QuadElem | None = None) -> "QuarticElem":
        if z1 is None:
            z1 = self.e0.zero()
        return QuarticElem(self, z0, z1)

    def beta(self) -> "QuarticElem":
        return QuarticElem(self, self.e0.zero(), self.e0.one())

    def from_coords(self, c) -> "QuarticElem":
        c = [Fraction(x) for x in c]
        return QuarticElem(self, self.e0.element(c[0], c[1]), self.e0.element(c[2], c[3]))

    @property
    def e_over_e0_ramified(self) -> bool:
        """Whether E/E0 is ramified: gamma of odd valuation (tame setting)."""
        return self.gamma.valuation() % 2 == 1

    def is_quadratic_over_e0(self, host: QuadExt) -> bool:
        """[E:E0] = 2, i.e. gamma is a non-square in E0."""
        cls = self.gamma.square_class(host)
        return not (cls.val_parity == 0 and cls.unit_nonsquare == 0)


@dataclass(frozen=True)
class QuarticElem:
    model: QuarticModel
    z0: QuadElem
    z1: QuadElem

    def is_zero(self) -> bool:
        return self.z0.is_zero() and self.z1.is_zero()

    def __add__(self, other):
        other = self._coerce(other)
        return QuarticElem(self.model, self.z0 + other.z0, self.z1 + other.z1)

    def __sub__(self, other):
        other = self._coerce(other)
        return QuarticElem(self.model, self.z0 - other.z0, self.z1 - other.z1)

    def __neg__(self):
        return QuarticElem(self.model, -self.z0, -self.z1)

    def __mul__(self, other):
        other = self._coerce(other)
        g = self.model.gamma
        return QuarticElem(
            self.model,
            self.z0 * other.z0 + g * self.z1 * other.z1,
            self.z0 * other.z1 + self.z1 * other.z0,
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def _coerce(self, other) -> "QuarticElem":
        if isinstance(other, QuarticElem):
            if other.model != self.model:
                raise PreconditionError("elements of different models")
            return other
        if isinstance(other, QuadElem):
            return QuarticElem(self.model, other, self.model.e0.zero())
        return QuarticElem(self.model, self.model.e0.element(Fraction(other)), self.model.e0.zero())

    def conj(self) -> "QuarticElem":
        """The involution fixing E0 (beta -> -beta); beta is skew for it."""
        return QuarticElem(self.model, self.z0, -self.z1)

    def norm_to_e0(self) -> QuadElem:
        return self.z0 * self.z0 - self.model.gamma * self.z1 * self.z1

    def trace_to_f(self) -> Fraction:
        return 2 * self.z0.trace()

    def coords(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.z0.a, self.z0.b, self.z1.a, self.z1.b)

    def mult_matrix(self) -> list[list[Fraction]]:
        """4x4 matrix of multiplication by self in the basis (1, s, b, sb)."""
        cols = []
        e0, m = self.model.e0, self.model
        basis = [
            m.element(e0.one()),
            m.element(e0.sqrt_d()),
            m.beta(),
            m.element(e0.zero(), e0.sqrt_d()),
        ]
        for w in basis:
            cols.append((self * w).coords())
        return [[cols[j][i] for j in range(4)] for i in range(4)]
