"""Strata over F and the arithmetic genericity conditions.

A stratum is abstract class data (which quadratic extensions occur, the
square classes of the relevant determinants, the depths); the decision
operations consume only that.  Matrix strata (explicit skew beta plus a
self-dual lattice sequence in adapted coordinates) exist to cross-check the
class arithmetic against isotropy of h(v, beta v) and to run the valuation
certificates for the one-parameter subgroup thresholds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .errors import InvariantViolation, PreconditionError, SchemaError
from .lattice import INF, LatticeSequence
from .local_field import (
    AdditiveCharacter,
    E0SquareClass,
    LocalField,
    QuadExt,
    SquareClass,
    TraceKernelCoset,
    e0_contains_F_times_squares,
    norm_group_contains,
    square_class,
    trace_kernel_coset,
)
from .padic import pval
from .quadratic_form import SymplecticSpace, check_skew

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# Abstract strata (cases I-IV)


@dataclass(frozen=True)
class CaseI:
    """Skew element generating a biquadratic quartic extension.

    e0 is the fixed field of the involution; beta_detdelta the class of
    beta*det(delta) in E0; n the stratum depth.  E/E0 is ramified exactly
    when E0/F is unramified (the biquadratic field contains the unramified
    quadratic), which forces n odd in that branch.
    """

    e0: QuadExt
    beta_detdelta: E0SquareClass
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise SchemaError("depth n must be positive")
        if self.beta_detdelta.host != self.e0:
            raise SchemaError("beta_detdelta must be an E0 square class over e0")
        if not self.e0.ramified and self.n % 2 == 0:
            raise SchemaError(
                "biquadratic stratum with unramified E0 has E/E0 ramified, so n is odd"
            )

    @property
    def e_over_e0_ramified(self) -> bool:
        return not self.e0.ramified

    case = "I"


@dataclass(frozen=True)
class CaseII:
    """Skew element generating a quadratic extension acting on all of V."""

    ext: QuadExt
    detdelta: SquareClass
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise SchemaError("depth n must be positive")

    case = "II"


@dataclass(frozen=True)
class CaseIII:
    """Orthogonal sum of two quadratic skew strata.

    ext is the common isomorphism class when isomorphic (None otherwise);
    ratio is the class of beta_1/beta_2 in F*.
    """

    base: LocalField
    isomorphic: bool
    detdelta: SquareClass
    ratio: SquareClass
    n1: int
    n2: int
    ext: QuadExt | None = None

    def __post_init__(self):
        if not (self.n1 >= self.n2 >= 1):
            raise SchemaError("depths must satisfy n1 >= n2 >= 1")
        if self.isomorphic and self.ext is None:
            raise SchemaError("isomorphic case needs the common extension")
        if self.ext is not None and self.ext.base != self.base:
            raise SchemaError("extension must live over the base field")

    case = "III"


@dataclass(frozen=True)
class CaseIV:
    """Sum of a nonzero quadratic stratum and a two-dimensional null one."""

    ext1: QuadExt
    n1: int
    epsilon: int

    def __post_init__(self):
        if self.n1 < 1:
            raise SchemaError("depth n1 must be positive")
        if self.epsilon not in (0, 1):
            raise SchemaError("epsilon is a bit")

    case = "IV"


Stratum = CaseI | CaseII | CaseIII | CaseIV


@dataclass(frozen=True)
class FlagDecision:
    exists: bool
    reason: dict

    def to_json(self):
        return {"exists": self.exists, **self.reason}


def decide_flag_existence(s: Stratum) -> FlagDecision:
    """Does a maximal unipotent subgroup carrying psi_beta as a character exist?

    Case I: the form h(v, beta v) is anisotropic iff the coset of
    beta*det(delta) differs from the coset of the trace kernel in
    E0*/(F* E0*^2); no flag exists exactly then.  Case II: no flag iff
    det(delta) is a non-norm from E.  Case III: no flag iff the extensions
    are isomorphic and ratio*det(delta) is a non-norm.  Case IV: always.
    """
    if isinstance(s, CaseI):
        member = e0_contains_F_times_squares(s.e0, s.beta_detdelta)
        kernel_inside = trace_kernel_coset(s.e0) is TraceKernelCoset.INSIDE_F_E0SQ
        anisotropic = member != kernel_inside
        return FlagDecision(
            not anisotropic,
            {
                "case": "I",
                "beta_detdelta_in_FE0sq": member,
                "trace_kernel_inside_FE0sq": kernel_inside,
                "q_mod_4": s.e0.base.q % 4,
                "e0_ramified": s.e0.ramified,
            },
        )
    if isinstance(s, CaseII):
        member = norm_group_contains(s.ext, s.detdelta)
        return FlagDecision(
            member,
            {"case": "II", "det_delta": str(s.detdelta), "det_delta_is_norm": member},
        )
    if isinstance(s, CaseIII):
        if not s.isomorphic:
            return FlagDecision(True, {"case": "III", "extensions_isomorphic": False})
        cls = s.ratio * s.detdelta
        member = norm_group_contains(s.ext, cls)
        return FlagDecision(
            member,
            {
                "case": "III",
                "extensions_isomorphic": True,
                "ratio_times_det_delta": str(cls),
                "is_norm": member,
            },
        )
    if isinstance(s, CaseIV):
        return FlagDecision(True, {"case": "IV", "null_block": True})
    raise SchemaError(f"not a stratum: {s!r}")


def classify_character(s: Stratum) -> str:
    """Degeneracy of psi_beta on its unipotent subgroup (when one exists)."""
    if not decide_flag_existence(s).exists:
        raise PreconditionError("no maximal unipotent subgroup carries psi_beta")
    return "nondegenerate" if s.case in ("I", "III") else "degenerate"


# -- JSON ---------------------------------------------------------------------


def stratum_to_json(s: Stratum) -> dict:
    base: dict = {"case": s.case}
    if isinstance(s, CaseI):
        f = s.e0.base
        base.update(
            q=f.q,
            p=f.p,
            E0={"disc": str(s.e0.disc)},
            beta_detdelta_E0=str(s.beta_detdelta),
            n=s.n,
        )
    elif isinstance(s, CaseII):
        f = s.ext.base
        base.update(q=f.q, p=f.p, E={"disc": str(s.ext.disc)}, det_delta=str(s.detdelta), n=s.n)
    elif isinstance(s, CaseIII):
        ext = {"disc": str(s.ext.disc)} if s.isomorphic else "nonisomorphic"
        base.update(
            q=s.base.q,
            p=s.base.p,
            E=ext,
            det_delta=str(s.detdelta),
            ratio=str(s.ratio),
            n1=s.n1,
            n2=s.n2,
        )
    else:
        f = s.ext1.base
        base.update(q=f.q, p=f.p, E1={"disc": str(s.ext1.disc)}, n1=s.n1, epsilon=s.epsilon)
    return base


def stratum_from_json(data: dict) -> Stratum:
    try:
        case = data["case"]
        q = int(data["q"])
        p = data.get("p")
        f = LocalField(q, int(p) if p is not None else None)
        if case == "I":
            e0 = QuadExt(f, SquareClass.from_str(data["E0"]["disc"]))
            return CaseI(e0, E0SquareClass.from_str(e0, data["beta_detdelta_E0"]), int(data["n"]))
        if case == "II":
            ext = QuadExt(f, SquareClass.from_str(data["E"]["disc"]))
            return CaseII(ext, SquareClass.from_str(data["det_delta"]), int(data["n"]))
        if case == "III":
            e = data["E"]
            iso = e != "nonisomorphic"
            ext = QuadExt(f, SquareClass.from_str(e["disc"])) if iso else None
            return CaseIII(
                f,
                iso,
                SquareClass.from_str(data["det_delta"]),
                SquareClass.from_str(data["ratio"]),
                int(data["n1"]),
                int(data["n2"]),
                ext,
            )
        if case == "IV":
            ext1 = QuadExt(f, SquareClass.from_str(data["E1"]["disc"]))
            return CaseIV(ext1, int(data["n1"]), int(data["epsilon"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad stratum JSON: {exc}") from exc
    raise SchemaError(f"unknown stratum case {case!r}")


# ---------------------------------------------------------------------------
# psi_beta on one-parameter subgroups


def psi_beta_value(space: SymplecticSpace, beta: la.Mat, x: la.Mat, f: LocalField) -> Fraction:
    """psi_F(tr(beta (x - 1))) as an exact element of Q/Z; x must be symplectic."""
    if not space.is_symplectic(x):
        raise PreconditionError("x is not symplectic")
    n = space.dim
    tr = Fraction(0)
    for i in range(n):
        for j in range(n):
            delta = x[j][i] - (1 if i == j else 0)
            if delta:
                tr += beta[i][j] * delta
    return AdditiveCharacter(f)(tr)


def root_generator(space: SymplecticSpace, k: int) -> la.Mat:
    """t_k with t_k(e_k) = e_{-k} and zero elsewhere (a long-root generator)."""
    t = la.zeros(space.dim)
    t[space.index(-k)][space.index(k)] = Fraction(1)
    return t


@dataclass(frozen=True)
class PsiBetaThreshold:
    """psi_beta is nontrivial on gU_k(s)g^{-1} exactly for s <= s_max."""

    k: int
    s_max: int | float  # -inf when the pairing vanishes identically
    pairing: Fraction


def root_threshold(
    space: SymplecticSpace, beta: la.Mat, g: la.Mat, k: int, f: LocalField
) -> PsiBetaThreshold:
    """s_max = -nu_F h(g e_-k, beta g e_-k)."""
    p = f.require_concrete()
    v = la.mat_vec(g, space.basis_vector(-k))
    pairing = space.pair(v, la.mat_vec(beta, v))
    if pairing == 0:
        return PsiBetaThreshold(k, NEG_INF, Fraction(0))
    return PsiBetaThreshold(k, -pval(pairing, p), pairing)


def conjugated_root_element(
    space: SymplecticSpace, g: la.Mat, k: int, x: Fraction
) -> la.Mat:
    """1 + x * g t_k g^{-1}, an exact symplectic unipotent element."""
    t = root_generator(space, k)
    gt = la.mat_mul(la.mat_mul(g, t), la.mat_inv(g))
    m = la.eye(space.dim)
    for i in range(space.dim):
        for j in range(space.dim):
            m[i][j] += Fraction(x) * gt[i][j]
    return m


# ---------------------------------------------------------------------------
# Matrix strata


@dataclass(frozen=True)
class MatrixStratum:
    """Explicit realization: skew beta and a self-dual chain, adapted basis.

    block_slots maps block index (1, 2) to its pair of basis labels for the
    split cases; block 2 is the null block in case IV.  For case I the chain
    is the period-2 principal chain and d its duality invariant.
    """

    case: str
    field: LocalField
    space: SymplecticSpace
    beta: tuple[tuple[Fraction, ...], ...]
    chain: LatticeSequence
    n: int
    d: int | None = None
    block_slots: dict | None = None
    block_chains: dict | None = None
    block_n: dict | None = None
    epsilon: int | None = None

    def beta_mat(self) -> la.Mat:
        return la.mat(self.beta)

    def validate(self) -> None:
        check_skew(self.space, self.beta_mat())
        p = self.field.require_concrete()
        if self.chain.valuation_endo(self.beta_mat(), p) != -self.n:
            raise InvariantViolation("chain valuation of beta is not -n")
        d = self.chain.duality_invariant()
        if d is None:
            raise InvariantViolation("chain is not self-dual")
        if self.d is not None and d != self.d:
            raise InvariantViolation("stored duality invariant mismatch")


def biquadratic_test(space: SymplecticSpace, beta: la.Mat, f: LocalField) -> bool:
    """Whether a degree-4 skew generator spans a biquadratic extension.

    The norm of beta down to F is det(beta); the extension is biquadratic
    exactly when that determinant is a square.  Requires 1, beta, beta^2,
    beta^3 linearly independent.
    """
    powers = [la.eye(space.dim), beta]
    powers.append(la.mat_mul(beta, beta))
    powers.append(la.mat_mul(powers[2], beta))
    flat = [[m[i][j] for i in range(space.dim) for j in range(space.dim)] for m in powers]
    if la.rank(flat) != 4:
        raise PreconditionError("beta does not generate a degree-4 algebra")
    return square_class(la.det(beta), f).is_identity


# -- membership in the congruence subgroups used by the certificates ----------


def in_principal_congruence(ms: MatrixStratum, x: la.Mat, level: int) -> bool:
    """x in P_level(Lambda): symplectic with x - 1 of chain valuation >= level."""
    p = ms.field.require_concrete()
    if not ms.space.is_symplectic(x):
        return False
    delta = la.mat_sub(x, la.eye(ms.space.dim))
    if all(v == 0 for row in delta for v in row):
        return True
    return ms.chain.valuation_endo(delta, p) >= level


def _block_submatrix(ms: MatrixStratum, m: la.Mat, bi: int, bj: int) -> la.Mat:
    rows = [ms.space.index(l) for l in ms.block_slots[bi]]
    cols = [ms.space.index(l) for l in ms.block_slots[bj]]
    return [[m[r][c] for c in cols] for r in rows]


def in_split_subgroup(ms: MatrixStratum, x: la.Mat, a1: int, a2: int) -> bool:
    """x in (1 + a_{a1}(L^1) + a_{a2}(L^2) + a_max(L)) cap G, blockwise test."""
    p = ms.field.require_concrete()
    if not ms.space.is_symplectic(x):
        return False
    a = max(a1, a2)
    delta = la.mat_sub(x, la.eye(ms.space.dim))
    # off-diagonal blocks must come from the full-lattice term
    off = [row[:] for row in delta]
    for bi, labels in ms.block_slots.items():
        idx = [ms.space.index(l) for l in labels]
        for r in idx:
            for c in idx:
                off[r][c] = Fraction(0)
    if any(v != 0 for row in off for v in row) and ms.chain.valuation_endo(off, p) < a:
        return False
    for bi, bound in ((1, a1), (2, a2)):
        blk = _block_submatrix(ms, delta, bi, bi)
        if all(v == 0 for row in blk for v in row):
            continue
        if ms.block_chains[bi].valuation_endo(blk, p) < bound:
            return False
    return True


def block_projection(ms: MatrixStratum, v: la.Vec, bi: int) -> la.Vec:
    keep = {ms.space.index(l) for l in ms.block_slots[bi]}
    return [x if i in keep else Fraction(0) for i, x in enumerate(v)]


def block_vector_valuation(ms: MatrixStratum, v: la.Vec, bi: int) -> int | float:
    """Chain valuation of a vector supported on one block (INF for zero)."""
    p = ms.field.require_concrete()
    proj = block_projection(ms, v, bi)
    if all(x == 0 for x in proj):
        return INF
    comp = [proj[ms.space.index(l)] for l in ms.block_slots[bi]]
    seq = ms.block_chains[bi]
    return seq.valuation_vector(comp, p)


# -- parahoric sampling --------------------------------------------------------


def _elementary_generators(space: SymplecticSpace) -> list[la.Mat]:
    """Nilpotent root generators N with 1 + xN symplectic for every x.

    Long roots: the t_k.  Short roots: E_{ij} +- its symplectic mirror
    E_{sigma(j) sigma(i)} where sigma flips the sign of the basis label;
    the correct sign is selected by the symplectic filter.
    """
    n = space.dim
    cands = [root_generator(space, k) for k in space.labels]
    for li in space.labels:
        for lj in space.labels:
            if li == lj:
                continue
            i, j = space.index(li), space.index(lj)
            mi, mj = space.index(-lj), space.index(-li)
            if (mi, mj) == (i, j):
                continue  # long-root positions already included
            for sign in (1, -1):
                m = la.zeros(n)
                m[i][j] += Fraction(1)
                m[mi][mj] += Fraction(sign)
                cands.append(m)
    out, seen = [], set()
    for m in cands:
        key = tuple(tuple(r) for r in m)
        if key in seen:
            continue
        seen.add(key)
        if all(
            space.is_symplectic(la.mat_add(la.eye(n), la.mat_scale(m, x)))
            for x in (Fraction(1), Fraction(2))
        ):
            out.append(m)
    return out


def sample_parahoric(ms: MatrixStratum, rng: random.Random, count: int) -> list[la.Mat]:
    """Elements of P(Lambda): products of <= 6 elementary generators whose
    parameters are valuated into a_0(Lambda), rejection-checked."""
    if ms.space.n_pairs != 2:
        raise PreconditionError("parahoric sampling implemented for N = 2")
    p = ms.field.require_concrete()
    space = ms.space
    gens = _elementary_generators(space)
    units = [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2), Fraction(3)]
    units = [u for u in units if pval(u, p) == 0]
    out = [la.eye(space.dim)]
    guard = 0
    while len(out) < count:
        guard += 1
        if guard > 200 * count:
            raise PreconditionError("parahoric sampling failed to converge")
        g = la.eye(space.dim)
        for _ in range(rng.randrange(1, 7)):
            if rng.random() < 0.25:
                t1, t2 = rng.choice(units), rng.choice(units)
                step = la.zeros(space.dim)
                for lbl, val in ((-2, t1), (-1, t2), (1, 1 / t2), (2, 1 / t1)):
                    step[space.index(lbl)][space.index(lbl)] = Fraction(val)
            else:
                ngen = rng.choice(gens)
                lift = max(0, -ms.chain.valuation_endo(ngen, p))
                x = rng.choice(units) * Fraction(p) ** (lift + rng.randrange(0, 2))
                step = la.mat_add(la.eye(space.dim), la.mat_scale(ngen, x))
            g = la.mat_mul(g, step)
        if not space.is_symplectic(g):
            continue
        if ms.chain.valuation_endo(g, p) < 0:
            continue
        if ms.chain.valuation_endo(la.mat_inv(g), p) < 0:
            continue
        out.append(g)
    return out[:count]


# ---------------------------------------------------------------------------
# Certificates for the nontriviality of psi_beta on congruence subgroups


def _check_threshold_against_direct(
    ms: MatrixStratum, g: la.Mat, k: int, thr: PsiBetaThreshold
) -> None:
    """Lemma-level check: direct psi evaluation at s_max and s_max + 1."""
    p = ms.field.require_concrete()
    if thr.s_max == NEG_INF:
        x = conjugated_root_element(ms.space, g, k, Fraction(1))
        if psi_beta_value(ms.space, ms.beta_mat(), x, ms.field) != 0:
            raise InvariantViolation("threshold says trivial but psi_beta is not")
        return
    s = int(thr.s_max)
    at = conjugated_root_element(ms.space, g, k, Fraction(p) ** s)
    above = conjugated_root_element(ms.space, g, k, Fraction(p) ** (s + 1))
    if psi_beta_value(ms.space, ms.beta_mat(), at, ms.field) == 0:
        raise InvariantViolation("psi_beta vanished at the threshold")
    if psi_beta_value(ms.space, ms.beta_mat(), above, ms.field) != 0:
        raise InvariantViolation("psi_beta nonzero above the threshold")


def certify_max_simple(ms: MatrixStratum, samples: list[la.Mat]) -> dict:
    """Case I: psi_beta is nontrivial on gU_k cap P_{[n/2]+1}(Lambda).

    The intersection index s = nu(e_k) + 1 + [([n/2] - d + 1)/2] is verified
    against direct congruence-subgroup membership, then compared with the
    threshold from the pairing.
    """
    if ms.case != "I":
        raise PreconditionError("certificate applies to case I strata")
    p = ms.field.require_concrete()
    d = ms.chain.duality_invariant()
    level = ms.n // 2 + 1
    checked = 0
    for g in samples:
        for k in ms.space.labels:
            nu_ek = ms.chain.max_index_with_alpha_le(k, 0)
            s = nu_ek + 1 + _floor_div(ms.n // 2 - d + 1, 2)
            member = conjugated_root_element(ms.space, g, k, Fraction(p) ** s)
            below = conjugated_root_element(ms.space, g, k, Fraction(p) ** (s - 1))
            if not in_principal_congruence(ms, member, level):
                raise InvariantViolation(f"intersection formula too small at k={k}")
            if in_principal_congruence(ms, below, level):
                raise InvariantViolation(f"intersection formula too large at k={k}")
            thr = root_threshold(ms.space, ms.beta_mat(), g, k, ms.field)
            _check_threshold_against_direct(ms, g, k, thr)
            if not s <= thr.s_max:
                raise InvariantViolation(
                    f"nontriviality fails: s={s} > s_max={thr.s_max} at k={k}"
                )
            value = psi_beta_value(ms.space, ms.beta_mat(), member, ms.field)
            if value == 0:
                raise InvariantViolation("certificate element has trivial psi_beta value")
            checked += 1
    return {"case": "I", "pairs_checked": checked, "level": level, "d": d}


def _floor_div(a: int, b: int) -> int:
    return a // b


def split_intersection_index(
    ms: MatrixStratum, g: la.Mat, k: int, a1: int, a2: int
) -> int | float:
    """s with gU_k g^{-1} cap L = gU_k(s)g^{-1} for the split subgroup L."""
    v = la.mat_vec(g, ms.space.basis_vector(-k))
    nu_ek = ms.chain.max_index_with_alpha_le(k, 0)
    terms = []
    for bi, bound in ((1, a1), (2, a2)):
        gi = block_vector_valuation(ms, v, bi)
        if gi != INF:
            terms.append(bound - gi)
    if not terms:
        raise InvariantViolation("g e_-k vanished entirely")
    return _floor_div(nu_ek + max(terms) + 3, 4)


def certify_split(ms: MatrixStratum, samples: list[la.Mat]) -> dict:
    """Cases II/III: psi_beta is nontrivial on gU_k g^{-1} cap L with
    L built from the levels [n_i/2] + 1 on the period-4 normalized chains."""
    if ms.case not in ("II", "III"):
        raise PreconditionError("certificate applies to cases II and III")
    p = ms.field.require_concrete()
    a1 = ms.block_n[1] // 2 + 1
    a2 = ms.block_n[2] // 2 + 1
    checked = 0
    for g in samples:
        for k in ms.space.labels:
            s = split_intersection_index(ms, g, k, a1, a2)
            member = conjugated_root_element(ms.space, g, k, Fraction(p) ** int(s))
            below = conjugated_root_element(ms.space, g, k, Fraction(p) ** (int(s) - 1))
            if not in_split_subgroup(ms, member, a1, a2):
                raise InvariantViolation(f"split intersection formula too small at k={k}")
            if in_split_subgroup(ms, below, a1, a2):
                raise InvariantViolation(f"split intersection formula too large at k={k}")
            thr = root_threshold(ms.space, ms.beta_mat(), g, k, ms.field)
            _check_threshold_against_direct(ms, g, k, thr)
            if not s <= thr.s_max:
                raise InvariantViolation(
                    f"nontriviality fails: s={s} > s_max={thr.s_max} at k={k}"
                )
            value = psi_beta_value(ms.space, ms.beta_mat(), member, ms.field)
            if value == 0:
                raise InvariantViolation("certificate element has trivial psi_beta value")
            checked += 1
    return {"case": ms.case, "pairs_checked": checked, "levels": (a1, a2)}


def check_null_block_threshold(ms: MatrixStratum, samples: list[la.Mat]) -> dict:
    """Case IV: the two-inequality criterion for nontriviality on yU_k cap L.

    L uses level 1 on the null block and [n/2] + 1 on the other; both sides
    of the criterion are computed independently (intersection index + pairing
    threshold vs. the valuation inequalities) and must agree.
    """
    if ms.case != "IV":
        raise PreconditionError("criterion applies to case IV strata")
    p = ms.field.require_concrete()
    r, s_blk = 1, 2  # block 1 carries beta, block 2 is null
    a_r = ms.n // 2 + 1
    a_s = 1
    eps = ms.epsilon
    checked = 0
    agree = 0
    for y in samples:
        for k in ms.space.labels:
            v = la.mat_vec(y, ms.space.basis_vector(-k))
            nu_emk = ms.chain.valuation_vector(v, p)
            proj_r = block_projection(ms, v, r)
            thr = root_threshold(ms.space, ms.beta_mat(), y, k, ms.field)
            idx = split_intersection_index(ms, y, k, a_r, a_s)
            member = conjugated_root_element(ms.space, y, k, Fraction(p) ** int(idx))
            below = conjugated_root_element(ms.space, y, k, Fraction(p) ** (int(idx) - 1))
            if not in_split_subgroup(ms, member, a_r, a_s):
                raise InvariantViolation(f"null-block intersection formula too small at k={k}")
            if in_split_subgroup(ms, below, a_r, a_s):
                raise InvariantViolation(f"null-block intersection formula too large at k={k}")
            lhs = idx <= thr.s_max
            if lhs and psi_beta_value(ms.space, ms.beta_mat(), member, ms.field) == 0:
                raise InvariantViolation("nontrivial claim but psi vanished on the witness")
            if all(x == 0 for x in proj_r):
                rhs = False
            else:
                y_r = block_vector_valuation(ms, v, r)
                y_s = block_vector_valuation(ms, v, s_blk)
                beta_v = la.mat_vec(ms.beta_mat(), proj_r)
                pairing = ms.space.pair(proj_r, beta_v)
                l_r = pval(pairing, p)
                rel = y_r == 2 * l_r + ms.n // 2 + 1 - eps
                if not rel:
                    raise InvariantViolation("valuation relation y_r = 2 l_r + [n/2]+1-eps fails")
                rhs = (y_r <= nu_emk + ms.n // 2 + 1 - 2 * eps) and (
                    y_s >= -nu_emk + 4 * l_r + 1
                )
            if lhs != rhs:
                raise InvariantViolation(
                    f"null-block criterion mismatch at k={k}: direct={lhs} inequalities={rhs}"
                )
            agree += int(lhs == rhs)
            checked += 1
    return {"case": "IV", "pairs_checked": checked, "agreed": agree}
