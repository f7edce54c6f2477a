"""Matrix realizations of strata, built from explicit field models.

Each builder fixes exact field data (a quadratic or quartic extension with a
skew generator and an anisotropic pairing parameter), assembles the symplectic
form via the trace pairing, produces an adapted symplectic basis, and emits a
MatrixStratum together with the abstract stratum carrying the same class data.
Every instance is verified on the spot: Gram = J, J*beta symmetric, the chain
is self-dual and adapted (lattice equality against the model), and the chain
valuation of beta equals -n.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .errors import InvariantViolation, PreconditionError
from .lattice import LatticeSequence, component_profile
from .local_field import LocalField, QuadExt, square_class
from .padic import lattice_key, legendre, pval
from .quadmodel import QuadElem, QuadModel, QuarticModel
from .quadratic_form import SymplecticSpace
from .strata import CaseI, CaseII, CaseIII, CaseIV, MatrixStratum, Stratum

SPACE = SymplecticSpace(2)


@dataclass(frozen=True)
class CorpusInstance:
    """A matrix stratum paired with its abstract class data.

    stratum is None exactly for the non-biquadratic degree-4 instances, whose
    class-level decision short-circuits to "flag exists".
    """

    matrix: MatrixStratum
    stratum: Stratum | None
    note: str = ""


def _qpow(x: QuadElem, k: int) -> QuadElem:
    out = x.model.one()
    base = x if k >= 0 else x.inverse()
    for _ in range(abs(k)):
        out = out * base
    return out


# ---------------------------------------------------------------------------
# Case I: quartic extensions E = E0(beta), beta^2 = gamma in E0


def _quartic_valuation(model: QuarticModel, z) -> int:
    """nu_E normalized so nu_E(E*) = Z; exact because residues never cancel."""
    vals = []
    ram = model.e_over_e0_ramified
    g_val = model.gamma.valuation()
    beta_val = g_val if ram else g_val // 2
    stretch = 2 if ram else 1  # nu_E restricted to E0 is stretch * nu_E0
    if not z.z0.is_zero():
        vals.append(stretch * z.z0.valuation())
    if not z.z1.is_zero():
        vals.append(stretch * z.z1.valuation() + beta_val)
    if not vals:
        raise PreconditionError("valuation of zero")
    return min(vals)


def _quartic_gram(model: QuarticModel, delta0) -> la.Mat:
    """Gram of h(x, y) = tr_{E/F}(x conj(y) delta0) in basis (1, s, b, sb)."""
    e0 = model.e0
    basis = [
        model.element(e0.one()),
        model.element(e0.sqrt_d()),
        model.beta(),
        model.element(e0.zero(), e0.sqrt_d()),
    ]
    g = la.zeros(4)
    for i, wi in enumerate(basis):
        for j, wj in enumerate(basis):
            g[i][j] = (wi * wj.conj() * delta0).trace_to_f()
    return g


def _h(gram: la.Mat, x: la.Vec, y: la.Vec) -> Fraction:
    return sum((x[i] * gram[i][j] * y[j] for i in range(4) for j in range(4)), Fraction(0))


def _project_pair(gram: la.Mat, a: la.Vec, b: la.Vec, z: la.Vec) -> la.Vec:
    """Projection off the hyperbolic pair (a, b) normalized to h(a, b) = 1."""
    ha, hb = _h(gram, z, a), _h(gram, z, b)
    return [z[i] + ha * b[i] - hb * a[i] for i in range(4)]


def _candidates_at(model: QuarticModel, integral_basis, target_val: int, e_over_f: int):
    """Model elements of exact valuation target_val: p-power shifts of the
    integral basis, plus pairwise sums for extra pairing choices."""
    out = []
    singles = []
    p = model.e0.p
    for b in integral_basis:
        v = _quartic_valuation(model, b)
        if (target_val - v) % e_over_f == 0:
            k = (target_val - v) // e_over_f
            cand = _scale_p(model, b, k)
            singles.append(cand)
            out.append(cand)
    for i in range(len(singles)):
        for j in range(i + 1, len(singles)):
            s = singles[i] + singles[j]
            if not s.is_zero() and _quartic_valuation(model, s) == target_val:
                out.append(s)
    return out


def _scale_p(model: QuarticModel, z, k: int):
    c = Fraction(model.e0.p) ** k
    return model.element(z.z0.scale(c), z.z1.scale(c))


def _adapted_basis(model: QuarticModel, gram: la.Mat, integral_basis, d: int, levels, e_over_f: int):
    """Symplectic basis with nu_E(e_-k) = levels[k] and nu_E(e_k) = d-1-levels[k].

    levels gives the valuations of (e_-2, e_-1); partners are forced by the
    duality/basis identity.  Returns coordinate columns or None.
    """
    p = model.e0.p
    v1, v2 = levels
    pools = [
        (_candidates_at(model, integral_basis, v1, e_over_f), v1,
         _candidates_at(model, integral_basis, d - 1 - v1, e_over_f), d - 1 - v1),
        (_candidates_at(model, integral_basis, v2, e_over_f), v2,
         _candidates_at(model, integral_basis, d - 1 - v2, e_over_f), d - 1 - v2),
    ]
    cands_a, _, cands_b, _ = pools[0]
    for va in cands_a:
        for vb in cands_b:
            ca, cb = list(va.coords()), list(vb.coords())
            pairing = _h(gram, ca, cb)
            if pairing == 0 or pval(pairing, p) != 0:
                continue
            f_m2 = ca
            f_2 = [x / pairing for x in cb]
            cands_a2, val_a2, cands_b2, val_b2 = pools[1]
            for wa in cands_a2:
                pa = _project_pair(gram, f_m2, f_2, list(wa.coords()))
                if all(x == 0 for x in pa) or _coords_val(model, pa) != val_a2:
                    continue
                for wb in cands_b2:
                    pb = _project_pair(gram, f_m2, f_2, list(wb.coords()))
                    if all(x == 0 for x in pb):
                        continue
                    pairing2 = _h(gram, pa, pb)
                    if pairing2 == 0 or pval(pairing2, p) != 0:
                        continue
                    f_1 = [x / pairing2 for x in pb]
                    if _coords_val(model, f_1) != val_b2:
                        continue
                    return [f_m2, pa, f_1, f_2]
    return None


def _coords_val(model: QuarticModel, coords: la.Vec) -> int:
    return _quartic_valuation(model, model.from_coords(coords))


def _flip_unit(model: QuadModel, rng: random.Random) -> QuadElem:
    """A unit of E0 whose residue is a non-square (flips the class bit)."""
    p = model.p
    for _ in range(500):
        x, y = rng.randrange(0, p * 3), rng.randrange(0, p * 3)
        cand = model.element(x, y)
        if cand.is_zero():
            continue
        try:
            if cand.valuation() != 0:
                continue
        except PreconditionError:
            continue
        n = cand.norm()
        if model.ramified:
            # residue of the F-part decides; need a non-square unit residue
            if pval(cand.a, p) == 0 and legendre(cand.a.numerator * cand.a.denominator, p) == -1:
                return cand
        else:
            if pval(n, p) == 0 and legendre(n.numerator * n.denominator, p) == -1:
                return cand
    raise PreconditionError("no flip unit found (bug)")


def build_case_i(field: LocalField, rng: random.Random, want: str) -> CorpusInstance:
    """Quartic instance; want in {'generic', 'nongeneric', 'nonbiquadratic'}."""
    p = field.require_concrete()
    u = field.nonresidue
    for _ in range(300):
        flavor = rng.choice(["unram_e0", "ram_e0"]) if want != "nonbiquadratic" else rng.choice(
            ["unram_e0", "unram_quartic"]
        )
        if flavor == "unram_e0":
            d0 = Fraction(u)
            e0_model = QuadModel(p, d0)
            n = rng.choice([1, 3])
            x, y = rng.randrange(1, 8), rng.randrange(1, 8)
            w = e0_model.element(x, y)
            if w.is_zero():
                continue
            try:
                if w.valuation() != 0:
                    continue
            except PreconditionError:
                continue
            gamma = _scale_p_quad(w, -n)
            biquad = square_class(gamma.norm(), field).is_identity
            if (want == "nonbiquadratic") == biquad:
                continue
            eta_val = (n + 1) // 2
            eta = e0_model.element(Fraction(p) ** eta_val, 0)
        elif flavor == "unram_quartic":
            d0 = Fraction(u)
            e0_model = QuadModel(p, d0)
            n = rng.choice([1, 2])
            x, y = rng.randrange(1, 8), rng.randrange(1, 8)
            w = e0_model.element(x, y)
            if w.is_zero():
                continue
            try:
                if w.valuation() != 0:
                    continue
            except PreconditionError:
                continue
            ext0 = QuadExt(field, square_class(d0, field))
            if w.square_class(ext0).unit_nonsquare != 1:
                continue  # need E/E0 unramified, i.e. non-square unit part
            gamma = _scale_p_quad(w, -2 * n)
            eta = e0_model.element(Fraction(p) ** n, 0)  # nu_E(delta0) = -n + n = 0
        else:
            d0 = Fraction(p * rng.choice([1, u]))
            e0_model = QuadModel(p, d0)
            n = rng.choice([1, 2, 3])
            x = rng.choice([c for c in range(1, 8) if c % p])
            y = rng.randrange(1, 8)
            w = e0_model.element(x, y)
            if w.valuation() != 0:
                continue
            ext0 = QuadExt(field, square_class(d0, field))
            if w.square_class(ext0).unit_nonsquare != 1:
                continue  # E/E0 must be unramified
            gamma = w.scale(Fraction(d0) ** (-n))
            want_aniso = want == "nongeneric"
            cands = [v for v in (n, n + 1) if (v % 2 == 0) == want_aniso]
            eta_val = cands[0]
            eta = _qpow(e0_model.sqrt_d(), eta_val)
        model = QuarticModel(e0_model, gamma)
        ext0 = QuadExt(field, square_class(d0, field))
        if not model.is_quadratic_over_e0(ext0):
            continue
        # target the verdict via the unit bit for unramified E0
        if flavor == "unram_e0" and want != "nonbiquadratic":
            kernel_inside = field.q % 4 == 3
            want_aniso = want == "nongeneric"
            # member (bit 0) != kernel_inside <=> anisotropic
            want_bit = 1 if (want_aniso == kernel_inside) else 0
            cls = (gamma * eta).square_class(ext0)
            if cls.unit_nonsquare != want_bit:
                eta = eta * _flip_unit(e0_model, rng)
        inst = _assemble_quartic(field, model, eta, n, want)
        if inst is not None:
            return inst
    raise PreconditionError(f"case I builder failed for want={want}")


def _scale_p_quad(z: QuadElem, k: int) -> QuadElem:
    return z.scale(Fraction(z.model.p) ** k)


def _assemble_quartic(
    field: LocalField, model: QuarticModel, eta: QuadElem, n: int, want: str
) -> CorpusInstance | None:
    p = field.require_concrete()
    e0_model = model.e0
    beta = model.beta()
    delta0 = model.element(e0_model.zero(), eta)  # beta * eta
    if model.gamma.b == 0:
        return None  # beta would generate a quadratic, not quartic, extension
    nu_beta = _quartic_valuation(model, beta)
    if nu_beta != -n:
        return None
    dval = _quartic_valuation(model, delta0)
    d = 1 - dval
    if d not in (0, 1):
        return None
    ram_e = model.e_over_e0_ramified
    e_over_f = (2 if ram_e else 1) * (2 if e0_model.ramified else 1)
    if e_over_f == 4:
        return None  # totally ramified quartics are not built here
    one = model.element(e0_model.one())
    s_elt = model.element(e0_model.sqrt_d())
    if ram_e:
        # E0 unramified, E/E0 ramified: pi_E = beta * p^((n+1)/2)
        pi_e = _scale_p(model, beta, (n + 1) // 2)
        basis_o = [one, s_elt, pi_e, s_elt * pi_e]
    else:
        # E/E0 unramified: o_E = o_E0 + omega o_E0 with omega = beta * scalar a unit
        scalar = _qpow(e0_model.sqrt_d(), n) if e0_model.ramified else e0_model.element(
            Fraction(p) ** n, 0
        )
        omega = model.element(e0_model.zero(), scalar)
        basis_o = [one, s_elt, omega, s_elt * omega]
        pi_e = s_elt if e0_model.ramified else model.element(e0_model.element(Fraction(p), 0))
    if any(_quartic_valuation(model, b) not in (0, 1) for b in basis_o):
        return None
    gram = _quartic_gram(model, delta0)
    levels = (0, 1) if (d == 1 and e_over_f == 2) else (0, 0)
    cols = _adapted_basis(model, gram, basis_o, d, levels, e_over_f)
    if cols is None:
        return None
    c_mat = [[cols[j][i] for j in range(4)] for i in range(4)]
    c_inv = la.mat_inv(c_mat)
    b0 = la.mat(model.beta().mult_matrix())
    beta_ad = la.mat_mul(la.mat_mul(c_inv, b0), c_mat)
    # Gram in the new basis must be the standard J
    jnew = la.mat_mul(la.mat_mul(la.transpose(c_mat), gram), c_mat)
    if not la.mat_eq(jnew, SPACE.gram):
        return None
    # chain from achieved valuations
    nus = [_coords_val(model, col) for col in cols]
    rows = tuple(
        tuple(-((nus[i] - t) // e_over_f) for t in range(e_over_f)) for i in range(4)
    )
    chain = LatticeSequence(SPACE.labels, e_over_f, rows)
    if chain.duality_invariant() != d:
        return None
    if chain.valuation_endo(beta_ad, p) != -n:
        return None
    # adaptedness: Lambda(t) = p_E^t o_E as honest lattices in model coordinates
    for t in range(e_over_f):
        pi_t = one
        for _ in range(t):
            pi_t = pi_t * pi_e
        gens_true = [list((pi_t * b).coords()) for b in basis_o]
        gens_claim = [
            [Fraction(p) ** (-((nus[i] - t) // e_over_f)) * x for x in col]
            for i, col in enumerate(cols)
        ]
        if lattice_key(gens_true, p) != lattice_key(gens_claim, p):
            return None
    ext0 = QuadExt(field, square_class(e0_model.d, field))
    beta_detdelta = (model.gamma * eta).square_class(ext0)
    stratum: Stratum | None
    if want == "nonbiquadratic":
        stratum = None
    else:
        stratum = CaseI(ext0, beta_detdelta, n)
    ms = MatrixStratum(
        case="I",
        field=field,
        space=SPACE,
        beta=tuple(tuple(r) for r in beta_ad),
        chain=chain,
        n=n,
        d=d,
    )
    ms.validate()
    return CorpusInstance(ms, stratum, note=f"quartic {want}")


# ---------------------------------------------------------------------------
# Cases II, III, IV: two-dimensional blocks


@dataclass(frozen=True)
class Block:
    """One 2-dimensional component: E = F(sqrt(g)), beta = sqrt(g), delta = beta*c.

    Adapted symplectic basis (1, -beta/(2 g c)); matrix and normalized chain in
    that basis.  A null block has beta = 0 and the principal chain of a vertex.
    """

    g: Fraction | None  # None for the null block
    c: Fraction | None
    matrix: tuple  # 2x2 beta matrix
    chain: LatticeSequence
    kind: str
    epsilon: int
    n: int

    def ext(self, field: LocalField) -> QuadExt | None:
        if self.g is None:
            return None
        return QuadExt(field, square_class(self.g, field))


def build_block(field: LocalField, ramified: bool, j: int, c: Fraction) -> Block:
    """Nonzero block with nu_E(beta) = 1 - 2j (ramified) or -j (unramified)."""
    p = field.require_concrete()
    u = field.nonresidue
    if ramified:
        g = Fraction(p) * Fraction(p) ** (-2 * j)
        nu_beta = 1 - 2 * j
        nu_c = 2 * pval(c, p)
    else:
        g = Fraction(u) * Fraction(p) ** (-2 * j)
        nu_beta = -j
        nu_c = pval(c, p)
    if nu_beta >= 0:
        raise PreconditionError("block depth must be positive (j >= 1)")
    delta_val = nu_beta + nu_c
    prof = component_profile(ramified, delta_val)
    mat2 = (
        (Fraction(0), Fraction(-1) / (2 * c)),
        (Fraction(-2) * g * c, Fraction(0)),
    )
    n_block = -prof.sequence.valuation_endo([list(r) for r in mat2], p)
    if n_block < 1:
        raise InvariantViolation("normalized block depth must be positive")
    return Block(g, c, mat2, prof.sequence, prof.kind, prof.epsilon, n_block)


def null_block(flavor: int) -> Block:
    """Null block over one of the two vertex chains (flavor 0 or 1)."""
    from .lattice import normalize_period4, principal_component_sequence

    pre = principal_component_sequence(1, 0 if flavor == 0 else -1)
    seq = normalize_period4(pre)
    zero2 = ((Fraction(0), Fraction(0)), (Fraction(0), Fraction(0)))
    return Block(None, None, zero2, seq, "null", flavor, 0)


def assemble_split(field: LocalField, blocks: dict, rng: random.Random, case: str, **extra):
    """Place two blocks into the four-dimensional space (random slot order)."""
    slots = {1: (-1, 1), 2: (-2, 2)} if rng.random() < 0.5 else {1: (-2, 2), 2: (-1, 1)}
    beta = la.zeros(4)
    chains = {}
    for bi, blk in blocks.items():
        lm, lp = slots[bi]
        im, ip = SPACE.index(lm), SPACE.index(lp)
        beta[im][im] = Fraction(blk.matrix[0][0])
        beta[im][ip] = Fraction(blk.matrix[0][1])
        beta[ip][im] = Fraction(blk.matrix[1][0])
        beta[ip][ip] = Fraction(blk.matrix[1][1])
        chains[bi] = blk.chain.relabel({-1: lm, 1: lp})
    chain4 = LatticeSequence.orthogonal_sum(chains[1], chains[2])
    n = max(blocks[1].n, blocks[2].n)
    ms = MatrixStratum(
        case=case,
        field=field,
        space=SPACE,
        beta=tuple(tuple(r) for r in beta),
        chain=chain4,
        n=n,
        block_slots=slots,
        block_chains=chains,
        block_n={1: blocks[1].n, 2: blocks[2].n},
        epsilon=extra.get("epsilon"),
    )
    ms.validate()
    return ms


def build_case_ii(field: LocalField, rng: random.Random, want: str) -> CorpusInstance:
    """want in {'generic', 'nongeneric'}: det(delta) a norm from E or not."""
    from .local_field import norm_group_contains

    p = field.require_concrete()
    u = field.nonresidue
    for _ in range(200):
        ramified = rng.random() < 0.5
        j = rng.choice([1, 2])
        c1 = Fraction(rng.choice([1, 2, u])) * Fraction(p) ** rng.choice([0, 1])
        for unit2 in (1, u, 2, 2 * u, 3):
            if unit2 % p == 0:
                continue
            # same valuation as c1 so both blocks share the chain kind
            c2 = Fraction(unit2) * Fraction(p) ** pval(c1, p)
            b1 = build_block(field, ramified, j, c1)
            b2 = build_block(field, ramified, j, c2)
            if b1.kind != b2.kind or b1.n != b2.n:
                continue
            ext = b1.ext(field)
            detdelta = square_class(b1.g * c1 * c2, field)
            member = norm_group_contains(ext, detdelta)
            if member != (want == "generic"):
                continue
            ms = assemble_split(field, {1: b1, 2: b2}, rng, "II")
            stratum = CaseII(ext, detdelta, ms.n)
            return CorpusInstance(ms, stratum, note=f"II {want} {'ram' if ramified else 'unram'}")
    raise PreconditionError(f"case II builder failed for want={want}")


def build_case_iii(field: LocalField, rng: random.Random, want: str) -> CorpusInstance:
    """want in {'generic', 'nongeneric', 'nonisomorphic'}."""
    from .local_field import SquareClass, norm_group_contains

    p = field.require_concrete()
    u = field.nonresidue
    for _ in range(400):
        ramified = rng.random() < 0.5
        j1 = rng.choice([1, 2])
        j2 = rng.choice([1, 2])
        c1 = Fraction(rng.choice([1, 2, u])) * Fraction(p) ** rng.choice([0, 1])
        c2 = Fraction(rng.choice([1, 2, u, 3])) * Fraction(p) ** rng.choice([0, 1])
        try:
            b1 = build_block(field, ramified, j1, c1)
        except PreconditionError:
            continue
        if want == "nonisomorphic":
            b2 = build_block(field, not ramified, j2, c2)
            blocks = {1: b1, 2: b2}
            if blocks[1].n < blocks[2].n:
                blocks = {1: b2, 2: b1}
            ms = assemble_split(field, blocks, rng, "III")
            stratum = CaseIII(
                field,
                False,
                SquareClass(0, 0),
                SquareClass(0, 0),
                blocks[1].n,
                blocks[2].n,
                None,
            )
            return CorpusInstance(ms, stratum, note="III nonisomorphic")
        # isomorphic: both blocks built from the same class, beta2 = beta1/f
        b2 = build_block(field, ramified, j2, c2)
        if square_class(b2.g, field) != square_class(b1.g, field):
            continue
        ratio2 = b1.g / b2.g  # = f^2 with f an exact rational (same rep, p-power shift)
        fn, fd = _isqrt_exact(ratio2.numerator), _isqrt_exact(ratio2.denominator)
        if fn is None or fd is None:
            continue
        f_ratio = Fraction(fn, fd)
        detdelta = square_class(b1.g * c1 * c2 / f_ratio, field)
        ratio_cls = square_class(f_ratio, field)
        ext = b1.ext(field)
        member = norm_group_contains(ext, ratio_cls * detdelta)
        if member != (want == "generic"):
            continue
        blocks = {1: b1, 2: b2}
        if blocks[1].n < blocks[2].n:
            blocks = {1: blocks[2], 2: blocks[1]}
        ms = assemble_split(field, blocks, rng, "III")
        stratum = CaseIII(
            field, True, detdelta, ratio_cls, blocks[1].n, blocks[2].n, ext
        )
        return CorpusInstance(ms, stratum, note=f"III {want}")
    raise PreconditionError(f"case III builder failed for want={want}")




def _isqrt_exact(n: int):
    import math

    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def build_case_iv(field: LocalField, rng: random.Random) -> CorpusInstance:
    p = field.require_concrete()
    u = field.nonresidue
    for _ in range(200):
        ramified = rng.random() < 0.5
        j = rng.choice([1, 2])
        c = Fraction(rng.choice([1, 2, u])) * Fraction(p) ** rng.choice([0, 1])
        b1 = build_block(field, ramified, j, c)
        b2 = null_block(rng.choice([0, 1]))
        ms = assemble_split(field, {1: b1, 2: b2}, rng, "IV", epsilon=b1.epsilon)
        stratum = CaseIV(b1.ext(field), b1.n, b1.epsilon)
        return CorpusInstance(ms, stratum, note=f"IV eps={b1.epsilon}")
    raise PreconditionError("case IV builder failed")


_CASE_MENU = {
    "I": (build_case_i, ("generic", "nongeneric", "nonbiquadratic")),
    "II": (build_case_ii, ("generic", "nongeneric")),
    "III": (build_case_iii, ("generic", "nongeneric", "nonisomorphic")),
    "IV": (build_case_iv, None),
}


def build_corpus(field: LocalField, per_case: int, seed: int = 0) -> dict[str, list[CorpusInstance]]:
    """Deterministic corpus: per_case instances for each of the four cases."""
    out: dict[str, list[CorpusInstance]] = {}
    for case, (builder, wants) in _CASE_MENU.items():
        rng = random.Random(f"{seed}:{case}")
        items = []
        for i in range(per_case):
            if wants is None:
                items.append(builder(field, rng))
            else:
                items.append(builder(field, rng, wants[i % len(wants)]))
        out[case] = items
    return out
