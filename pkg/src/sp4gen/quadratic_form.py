"""Quadratic forms over Q_p in dimensions 1-4 and the symplectic link.

The central objects: the form v -> h(v, beta v) attached to a skew element
beta of a symplectic space, its invariants (determinant class and Hasse
symbol), isotropy in the four low dimensions, certified isotropic-vector
search, and the totally isotropic flags that turn isotropic vectors into
maximal unipotent subgroups.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .errors import InvariantViolation, PreconditionError
from .hensel import isotropy_decision_with_map
from .local_field import (
    LocalField,
    SquareClass,
    class_of_minus_one,
    hilbert_symbol,
    square_class,
)
from .padic import pval

DEFAULT_DEPTH = 6


def symplectic_gram(n_pairs: int) -> la.Mat:
    """Gram matrix J of h in the basis (e_-N, ..., e_-1, e_1, ..., e_N),
    h(e_-i, e_j) = delta_ij, h(e_i, e_j) = h(e_-i, e_-j) = 0."""
    n = 2 * n_pairs
    j = la.zeros(n)
    for i in range(1, n_pairs + 1):
        j[n_pairs - i][n_pairs + i - 1] = Fraction(1)
        j[n_pairs + i - 1][n_pairs - i] = Fraction(-1)
    return j


@dataclass(frozen=True)
class SymplecticSpace:
    """Standard symplectic space of dimension 2N with its basis labels."""

    n_pairs: int

    def __post_init__(self):
        if self.n_pairs not in (1, 2):
            raise PreconditionError("only N in {1, 2} supported")

    @property
    def dim(self) -> int:
        return 2 * self.n_pairs

    @property
    def gram(self) -> la.Mat:
        return symplectic_gram(self.n_pairs)

    @property
    def labels(self) -> tuple[int, ...]:
        n = self.n_pairs
        return tuple(range(-n, 0)) + tuple(range(1, n + 1))

    def index(self, label: int) -> int:
        return self.labels.index(label)

    def basis_vector(self, label: int) -> la.Vec:
        v = [Fraction(0)] * self.dim
        v[self.index(label)] = Fraction(1)
        return v

    def pair(self, v: la.Vec, w: la.Vec) -> Fraction:
        return sum(
            (x * y for x, y in zip(la.mat_vec(self.gram, w), v)), Fraction(0)
        )

    def is_symplectic(self, g: la.Mat) -> bool:
        return la.mat_eq(la.mat_mul(la.mat_mul(la.transpose(g), self.gram), g), self.gram)

    def is_skew(self, b: la.Mat) -> bool:
        jb = la.mat_mul(self.gram, b)
        return la.mat_eq(jb, la.transpose(jb))


def check_skew(space: SymplecticSpace, beta: la.Mat) -> None:
    if not space.is_skew(beta):
        raise InvariantViolation("matrix is not skew for the symplectic form (J*beta not symmetric)")


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric Gram matrix over exact rationals with a host prime."""

    gram: tuple[tuple[Fraction, ...], ...]
    field: LocalField
    degenerate: bool = False

    @classmethod
    def from_rows(cls, rows, field: LocalField) -> "QuadraticForm":
        g = la.mat(rows)
        if not la.mat_eq(g, la.transpose(g)):
            raise PreconditionError("Gram matrix must be symmetric")
        degenerate = la.det(g) == 0
        return cls(tuple(tuple(r) for r in g), field, degenerate)

    @classmethod
    def diagonal(cls, entries, field: LocalField) -> "QuadraticForm":
        n = len(entries)
        g = la.zeros(n)
        for i, d in enumerate(entries):
            g[i][i] = Fraction(d)
        return cls.from_rows(g, field)

    @property
    def dim(self) -> int:
        return len(self.gram)

    def rows(self) -> la.Mat:
        return la.mat(self.gram)

    def value(self, v: la.Vec) -> Fraction:
        gv = la.mat_vec(self.rows(), v)
        return sum((x * y for x, y in zip(v, gv)), Fraction(0))

    def gradient(self, v: la.Vec) -> la.Vec:
        return [2 * x for x in la.mat_vec(self.rows(), v)]


def gram_from_beta(space: SymplecticSpace, beta: la.Mat, field: LocalField) -> QuadraticForm:
    """The form Q(v) = h(v, beta v); its Gram matrix is J*beta.

    Skewness of beta makes J*beta symmetric; non-skew input is rejected.
    """
    check_skew(space, beta)
    jb = la.mat_mul(space.gram, beta)
    degenerate = la.det(jb) == 0
    return QuadraticForm(tuple(tuple(r) for r in jb), field, degenerate)


def diagonalize(q: QuadraticForm) -> tuple[list[Fraction], la.Mat]:
    """Congruence diagonalization: returns (diag, C) with C^T G C diagonal.

    Pivoting: first nonzero diagonal entry; if the remaining block has an
    all-zero diagonal, add row j to row i for some nonzero G[i][j] first.
    Deterministic and exact.
    """
    g = q.rows()
    n = q.dim
    c = la.eye(n)
    order: list[int] = []
    active = list(range(n))
    while active:
        piv = next((i for i in active if g[i][i] != 0), None)
        if piv is None:
            ij = next(
                ((i, j) for i in active for j in active if i != j and g[i][j] != 0),
                None,
            )
            if ij is None:
                # remaining block identically zero: radical coordinates
                order.extend(active)
                break
            i, j = ij
            # basis change e_i -> e_i + e_j makes the (i,i) entry 2*G[i][j]
            for r in range(n):
                c[r][i] += c[r][j]
            for r in range(n):
                g[r][i] += g[r][j]
            for r in range(n):
                g[i][r] += g[j][r]
            continue
        d = g[piv][piv]
        for j in active:
            if j == piv:
                continue
            f = g[piv][j] / d
            if f:
                for r in range(n):
                    c[r][j] -= f * c[r][piv]
                for r in range(n):
                    g[r][j] -= f * g[r][piv]
                for r in range(n):
                    g[j][r] -= f * g[piv][r]
        order.append(piv)
        active.remove(piv)
    # permute columns of C into elimination order
    cc = [[c[r][j] for j in order] for r in range(n)]
    diag = [g[j][j] for j in order]
    return diag, cc


@dataclass(frozen=True)
class FormInvariants:
    dim: int
    det_class: SquareClass
    hasse: int

    def to_json(self):
        return {"dim": self.dim, "det": str(self.det_class), "hasse": self.hasse}


def invariants(q: QuadraticForm) -> FormInvariants:
    """Determinant square class and Hasse symbol prod_{i<j} (d_i, d_j)."""
    if q.degenerate:
        diag, _ = diagonalize(q)
        radical = sum(1 for d in diag if d == 0)
        raise PreconditionError(f"form is degenerate (radical dimension {radical})")
    diag, _ = diagonalize(q)
    classes = [square_class(d, q.field) for d in diag]
    det = SquareClass(0, 0)
    for c in classes:
        det = det * c
    h = 1
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            h *= hilbert_symbol(classes[i], classes[j], q.field)
    return FormInvariants(q.dim, det, h)


def is_isotropic(q: QuadraticForm) -> bool:
    """Isotropy over Q_p in dimensions 1-4 via the invariant criteria.

    dim 1: never.  dim 2: iff -det is a square.  dim 3: iff the Hasse symbol
    equals (-1, -det).  dim 4: always except det square with Hasse equal to
    -(-1,-1), the unique anisotropic class.  Pinned against the exhaustive
    certified search in the test suite.
    """
    if q.degenerate:
        raise PreconditionError("isotropy criterion needs a regular form")
    if q.dim > 4:
        raise PreconditionError("dimension > 4 out of scope")
    inv = invariants(q)
    f = q.field
    minus_one = class_of_minus_one(f)
    if q.dim == 1:
        return False
    if q.dim == 2:
        return (inv.det_class * minus_one).is_identity
    if q.dim == 3:
        return inv.hasse == hilbert_symbol(minus_one, minus_one * inv.det_class, f)
    return not (
        inv.det_class.is_identity
        and inv.hasse == -hilbert_symbol(minus_one, minus_one, f)
    )


@dataclass(frozen=True)
class IsotropicVector:
    """A nontrivial zero of Q: exact rational, or certified mod p^(2*depth)."""

    vector: tuple[Fraction, ...]
    exact: bool
    depth: int | None = None

    def to_json(self):
        return {
            "vector": [str(x) for x in self.vector],
            "exact": self.exact,
            "depth": self.depth,
        }


@dataclass(frozen=True)
class AbsenceReport:
    """Anisotropy certificate: the primitive root tree died at this level."""

    died_at: int
    depth: int

    def to_json(self):
        return {"anisotropic": True, "tree_died_at": self.died_at, "depth": self.depth}


def _small_exact_search(diag: list[Fraction], bound: int = 6) -> tuple[int, ...] | None:
    """Meet-in-the-middle scan for small integer zeros of a diagonal form."""
    from itertools import product

    n = len(diag)
    if n == 1:
        return None
    half = n // 2
    lo, hi = diag[:half], diag[half:]
    table: dict[Fraction, tuple[int, ...]] = {}
    for xs in product(range(0, bound + 1), repeat=len(lo)):
        val = sum((d * x * x for d, x in zip(lo, xs)), Fraction(0))
        if any(xs):
            table.setdefault(val, xs)
    for ys in product(range(0, bound + 1), repeat=len(hi)):
        val = -sum((d * y * y for d, y in zip(hi, ys)), Fraction(0))
        xs = table.get(val)
        if xs is not None:
            return tuple(xs) + tuple(ys)
        if any(ys) and val == 0:
            return (0,) * len(lo) + tuple(ys)
    return None


def find_isotropic_vector(
    q: QuadraticForm, depth: int = DEFAULT_DEPTH
) -> IsotropicVector | AbsenceReport:
    """Certified isotropic-vector search agreeing with is_isotropic.

    Returns an exact rational witness when a small one exists, otherwise a
    Hensel-certified p-adic witness (Q(v) = 0 mod p^(2*depth), unit-depth
    gradient); for anisotropic forms, an exhaustion proof.  Degenerate forms
    yield an exact radical vector.
    """
    p = q.field.require_concrete()
    if q.degenerate:
        diag, c = diagonalize(q)
        k = diag.index(Fraction(0))
        v = [c[r][k] for r in range(q.dim)]
        return IsotropicVector(tuple(v), exact=True)
    diag, c = diagonalize(q)
    small = _small_exact_search(diag)
    if small is not None:
        v = la.mat_vec(c, [Fraction(x) for x in small])
        assert q.value(v) == 0 and any(v)
        return IsotropicVector(tuple(v), exact=True)
    isotropic, witness, scales = isotropy_decision_with_map(diag, p, depth)
    if not isotropic:
        if is_isotropic(q):
            raise InvariantViolation("oracle says anisotropic, invariants say isotropic")
        return AbsenceReport(died_at=witness.died_at, depth=depth)
    if not is_isotropic(q):
        raise InvariantViolation("oracle found a witness on an invariant-anisotropic form")
    y = [s * x for s, x in zip(scales, witness.vector)]
    v = la.mat_vec(c, y)
    val = q.value(v)
    if val != 0:
        # the normalization identity makes q(v) the oracle's integer value
        assert pval(val, p) >= 2 * depth, "certificate too shallow"
    return IsotropicVector(tuple(v), exact=(val == 0), depth=depth)


def refine_witness(q: QuadraticForm, depth: int) -> IsotropicVector:
    """A witness at a caller-chosen certificate depth (for psi vanishing)."""
    out = find_isotropic_vector(q, depth)
    if isinstance(out, AbsenceReport):
        raise PreconditionError("form is anisotropic; no witness to refine")
    return out


@dataclass(frozen=True)
class IsotropicFlag:
    """V1 in V2 in V3 = V1-perp, totally isotropic for h, with the exact
    symplectic basis (f_-2, f_-1, f_1, f_2) adapted to it (V1 = <f_-2>,
    V2 = <f_-2, f_-1>).  beta-compatibility is exact when the seed vector is.
    """

    basis: tuple[tuple[Fraction, ...], ...]  # columns f_-2, f_-1, f_1, f_2
    seed_exact: bool
    degenerate_direction: bool  # beta*v was in V1, completion rule used

    def basis_matrix(self) -> la.Mat:
        return [list(col) for col in zip(*self.basis)]

    def v1(self) -> la.Vec:
        return list(self.basis[0])

    def v2_basis(self) -> list[la.Vec]:
        return [list(self.basis[0]), list(self.basis[1])]

    def v3_basis(self) -> list[la.Vec]:
        return [list(self.basis[0]), list(self.basis[1]), list(self.basis[2])]


def _hyperbolic_partner(space: SymplecticSpace, v: la.Vec) -> la.Vec:
    for lbl in space.labels:
        e = space.basis_vector(lbl)
        val = space.pair(v, e)
        if val != 0:
            return [x / val for x in e]
    raise PreconditionError("zero vector has no symplectic partner")


def _project_off_pair(space: SymplecticSpace, a: la.Vec, b: la.Vec, z: la.Vec) -> la.Vec:
    """Projection onto the h-complement of the hyperbolic pair (a, b), h(a,b)=1."""
    ha = space.pair(z, a)
    hb = space.pair(z, b)
    return [x + ha * y - hb * w for x, y, w in zip(z, b, a)]


def build_flag(
    space: SymplecticSpace,
    beta: la.Mat,
    v: la.Vec,
    seed_exact: bool = True,
) -> IsotropicFlag:
    """Flag construction from an isotropic vector of Q(v) = h(v, beta v).

    V1 = <v>; V2 = <v, beta v> unless beta v lies in V1, in which case V2 is
    completed by the first standard basis vector h-orthogonal to v and
    independent of it; V3 = V1-perp.  The conditions beta V1 in V2 and
    beta V2 in V3 are equivalent by skewness and hold by construction.
    """
    check_skew(space, beta)
    if all(x == 0 for x in v):
        raise PreconditionError("isotropic seed vector must be nonzero")
    if seed_exact:
        gv = la.mat_vec(la.mat_mul(space.gram, beta), v)
        if sum((x * y for x, y in zip(v, gv)), Fraction(0)) != 0:
            raise PreconditionError("seed vector is not isotropic for h(v, beta v)")
    bv = la.mat_vec(beta, v)
    degenerate_direction = la.in_span([v], bv)
    if degenerate_direction:
        # deterministic completion: first standard basis vector h-orthogonal
        # to v and independent of it; nullspace fallback when none qualifies
        w = None
        for lbl in space.labels:
            e = space.basis_vector(lbl)
            if space.pair(e, v) == 0 and not la.in_span([v], e):
                w = e
                break
        if w is None:
            jv = la.mat_vec(space.gram, v)
            for cand in la.nullspace([jv]):
                if not la.in_span([v], cand):
                    w = cand
                    break
        if w is None:
            raise InvariantViolation("no isotropic completion found (impossible in dim 4)")
    else:
        w = bv
    # exact symplectic basis: f_-2 = v with partner f_2, then (f_-1, f_1)
    f_m2 = list(v)
    f_2 = _hyperbolic_partner(space, f_m2)
    w1 = _project_off_pair(space, f_m2, f_2, w)
    if all(x == 0 for x in w1):
        raise InvariantViolation("flag second vector collapsed under projection")
    f_m1 = w1
    f_1 = None
    for lbl in space.labels:
        z = _project_off_pair(space, f_m2, f_2, space.basis_vector(lbl))
        val = space.pair(f_m1, z)
        if val != 0:
            f_1 = [x / val for x in z]
            break
    if f_1 is None:
        raise InvariantViolation("could not complete symplectic basis")
    basis = (tuple(f_m2), tuple(f_m1), tuple(f_1), tuple(f_2))
    flag = IsotropicFlag(basis, seed_exact, degenerate_direction)
    b = flag.basis_matrix()
    if not space.is_symplectic(b):
        raise InvariantViolation("flag basis is not symplectic (bug)")
    return flag


def flag_postconditions_hold(space: SymplecticSpace, beta: la.Mat, flag: IsotropicFlag) -> bool:
    """beta V1 in V2 and beta V2 in V3 (exact; use with exact seeds)."""
    v2 = flag.v2_basis()
    v3 = flag.v3_basis()
    bv1 = la.mat_vec(beta, flag.v1())
    if not la.in_span(v2, bv1):
        return False
    for w in v2:
        if not la.in_span(v3, la.mat_vec(beta, w)):
            return False
    return True


def classify_flag_degeneracy(
    space: SymplecticSpace, beta: la.Mat, flag: IsotropicFlag
) -> str:
    """'nondegenerate' iff beta V1 not in V1 and beta V2 not in V2."""
    bv1 = la.mat_vec(beta, flag.v1())
    v1_stable = la.in_span([flag.v1()], bv1)
    v2 = flag.v2_basis()
    v2_stable = all(la.in_span(v2, la.mat_vec(beta, w)) for w in v2)
    return "degenerate" if (v1_stable or v2_stable) else "nondegenerate"


def quaternary_class_forms(field: LocalField):
    """All 256 diagonal forms with entries among the class representatives."""
    from itertools import product

    from .local_field import SQUARE_CLASSES

    reps = [c.representative(field) for c in SQUARE_CLASSES]
    for combo in product(reps, repeat=4):
        yield QuadraticForm.diagonal(list(combo), field)
