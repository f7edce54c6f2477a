"""Self-dual lattice sequences in adapted coordinates.

A sequence is stored as one period of the non-decreasing step functions
alpha_s (one per basis label) with the shift law alpha_s(j + e) =
alpha_s(j) + 1, so Lambda(j) = sum_s p^(alpha_s(j)) e_s.  Duality, vector and
endomorphism valuations, the duality/basis identity, and the normalization
of two-dimensional components to period 4 with duality invariant 1 are all
exact integer computations on breakpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg as la
from .errors import InvariantViolation, PreconditionError, SchemaError
from .padic import pval

INF = 10**9  # +infinity sentinel for zero vectors / endomorphisms


@dataclass(frozen=True)
class LatticeSequence:
    """Periodic chain of lattices adapted to a fixed (symplectic) basis."""

    labels: tuple[int, ...]
    period: int
    alpha: tuple[tuple[int, ...], ...]  # one row per label, length = period

    def __post_init__(self):
        if len(self.alpha) != len(self.labels):
            raise SchemaError("one alpha row per basis label")
        for row in self.alpha:
            if len(row) != self.period:
                raise SchemaError("alpha rows must cover one period")
        for s in self.labels:
            for j in range(self.period):
                if self.alpha_at(s, j + 1) < self.alpha_at(s, j):
                    raise SchemaError("alpha must be non-decreasing")

    def _row(self, label: int) -> tuple[int, ...]:
        return self.alpha[self.labels.index(label)]

    def alpha_at(self, label: int, j: int) -> int:
        e = self.period
        r = j % e
        return self._row(label)[r] + (j - r) // e

    def max_index_with_alpha_le(self, label: int, m: int) -> int:
        """A_s(m) = max { i : alpha_s(i) <= m }."""
        e = self.period
        row = self._row(label)
        return max(r + e * (m - row[r]) for r in range(e))

    # -- valuations -----------------------------------------------------------

    def valuation_vector(self, v, p: int) -> int:
        """nu_Lambda(v) = max { i : v in Lambda(i) } for rational coordinates."""
        vals = []
        for s, x in zip(self.labels, v):
            x = Fraction(x)
            if x != 0:
                vals.append(self.max_index_with_alpha_le(s, pval(x, p)))
        return min(vals) if vals else INF

    def valuation_entry(self, t: int, s: int, m: int) -> int:
        """max i such that p^m * E_{t,s} maps Lambda(k) into Lambda(k+i) for all k."""
        return min(
            self.max_index_with_alpha_le(t, self.alpha_at(s, k) + m) - k
            for k in range(self.period)
        )

    def valuation_endo(self, a: la.Mat, p: int) -> int:
        """nu_Lambda on End(V): a Lambda(k) in Lambda(k + i) for all k."""
        best = INF
        n = len(self.labels)
        for ti in range(n):
            for si in range(n):
                x = Fraction(a[ti][si])
                if x == 0:
                    continue
                best = min(best, self.valuation_entry(self.labels[ti], self.labels[si], pval(x, p)))
        return best

    # -- duality --------------------------------------------------------------

    def dual(self) -> "LatticeSequence":
        """The sequence t -> Lambda(-t)^# (decreasing again in t).

        For an adapted sequence, (sum_s p^(a_s) e_s)^# = sum_s p^(1 - a_{-s}) e_s.
        """
        rows = []
        for s in self.labels:
            row = [1 - self.alpha_at(-s, -t) for t in range(self.period)]
            rows.append(tuple(row))
        return LatticeSequence(self.labels, self.period, tuple(rows))

    def duality_invariant(self) -> int | None:
        """d with Lambda(t)^# = Lambda(d - t) for all t, or None.

        The candidate d is pinned by the basis valuations (the duality/basis
        identity forces d = nu(e_k) + nu(e_-k) + 1) and then verified on one
        full period.
        """
        dual = self.dual()
        k = self.labels[0]
        d = self.max_index_with_alpha_le(k, 0) + self.max_index_with_alpha_le(-k, 0) + 1
        # Lambda(-t)^# = dual(t); self-dual with invariant d iff dual(t) = Lambda(t + d)
        if all(
            dual.alpha_at(s, t) == self.alpha_at(s, t + d)
            for s in self.labels
            for t in range(self.period)
        ):
            return d
        return None

    def translate(self, c: int) -> "LatticeSequence":
        """Lambda'(t) = Lambda(t + c); shifts the duality invariant by -2c."""
        rows = tuple(
            tuple(self.alpha_at(s, t + c) for t in range(self.period)) for s in self.labels
        )
        return LatticeSequence(self.labels, self.period, rows)

    def double(self) -> "LatticeSequence":
        """Lambda'(t) = Lambda(floor(t/2)); duality invariant d -> 2d + 1."""
        rows = tuple(
            tuple(self.alpha_at(s, t // 2) for t in range(2 * self.period))
            for s in self.labels
        )
        return LatticeSequence(self.labels, 2 * self.period, rows)

    # -- assembly and serialization -------------------------------------------

    def relabel(self, mapping: dict[int, int]) -> "LatticeSequence":
        return LatticeSequence(
            tuple(mapping[s] for s in self.labels), self.period, self.alpha
        )

    @staticmethod
    def orthogonal_sum(a: "LatticeSequence", b: "LatticeSequence") -> "LatticeSequence":
        if a.period != b.period:
            raise PreconditionError("summands must share the period")
        labels = a.labels + b.labels
        order = sorted(range(len(labels)), key=lambda i: labels[i])
        rows = a.alpha + b.alpha
        return LatticeSequence(
            tuple(labels[i] for i in order), a.period, tuple(rows[i] for i in order)
        )

    def to_json(self):
        return {
            "period": self.period,
            "alpha": {str(s): list(row) for s, row in zip(self.labels, self.alpha)},
            "duality": self.duality_invariant(),
        }

    @classmethod
    def from_json(cls, data) -> "LatticeSequence":
        try:
            labels = tuple(sorted(int(k) for k in data["alpha"]))
            rows = tuple(tuple(int(x) for x in data["alpha"][str(s)]) for s in labels)
            return cls(labels, int(data["period"]), rows)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"bad lattice sequence JSON: {exc}") from exc


def standard_sequence(n_pairs: int = 2) -> LatticeSequence:
    """The unit lattice o^(2N) as a period-1 sequence (self-dual, d = 1)."""
    labels = tuple(range(-n_pairs, 0)) + tuple(range(1, n_pairs + 1))
    return LatticeSequence(labels, 1, tuple((0,) for _ in labels))


def principal_component_sequence(e_over_f: int, plus_val: int) -> LatticeSequence:
    """The chain p_E^t in a one-dimensional E-space, adapted coordinates.

    Basis (e_-1, e_+1) with nu_E(e_-1) = 0 and nu_E(e_+1) = plus_val; the
    F-period equals e(E/F).  alpha_s(t) = ceil((t - nu_E(e_s)) / e).
    """
    if e_over_f not in (1, 2):
        raise PreconditionError("quadratic components only")
    rows = []
    for w in (0, plus_val):
        rows.append(tuple(-((w - t) // e_over_f) for t in range(e_over_f)))
    return LatticeSequence((-1, 1), e_over_f, (rows[0], rows[1]))


def check_duality_basis_identity(seq: LatticeSequence, verbose: bool = False) -> dict:
    """The two equalities tying basis valuations to the duality invariant:

    nu(e_k) = -nu(e_{-k}) + d - 1 = max_j (j - e*alpha_k(j)), for every k.
    Raises InvariantViolation naming the offending label.
    """
    d = seq.duality_invariant()
    if d is None:
        raise PreconditionError("sequence is not self-dual")
    out = {"d": d, "nu": {}}
    for k in seq.labels:
        nu_k = seq.max_index_with_alpha_le(k, 0)
        nu_mk = seq.max_index_with_alpha_le(-k, 0)
        rhs = max(j - seq.period * seq.alpha_at(k, j) for j in range(seq.period))
        if nu_k != -nu_mk + d - 1 or nu_k != rhs:
            raise InvariantViolation(
                f"duality/basis identity fails at label {k}: nu={nu_k}, "
                f"-nu(-k)+d-1={-nu_mk + d - 1}, max formula={rhs}"
            )
        out["nu"][k] = nu_k
    return out


def normalize_period4(component: LatticeSequence) -> LatticeSequence:
    """Normalize a two-dimensional component chain to period 4, duality 1.

    Ramified components (period 2) are doubled once; unramified ones
    (period 1) twice; a final translation moves the duality invariant to 1.
    """
    d = component.duality_invariant()
    if d is None:
        raise PreconditionError("component chain must be self-dual")
    seq = component
    while seq.period < 4:
        seq = seq.double()
    d = seq.duality_invariant()
    assert d is not None
    if (d - 1) % 2 != 0:
        raise InvariantViolation("cannot translate duality invariant to 1 (parity)")
    seq = seq.translate((d - 1) // 2)
    assert seq.duality_invariant() == 1 and seq.period == 4
    return seq


@dataclass(frozen=True)
class StratumLatticeProfile:
    """Normalized component data: extension type, epsilon, expected patterns."""

    kind: str  # ramified | unram_selfdual | unram_no_selfdual
    sequence: LatticeSequence

    _EXPECT = {
        "ramified": (2, 1),  # image = 2Z + 1
        "unram_selfdual": (4, 2),  # image = 4Z + 2
        "unram_no_selfdual": (4, 0),  # image = 4Z
    }

    @property
    def epsilon(self) -> int:
        """1 iff the chain contains no self-dual lattice (2t = d insoluble)."""
        return 0 if self.kind in ("ramified", "unram_selfdual") else 1

    def expected_image(self) -> tuple[int, int]:
        return self._EXPECT[self.kind]

    def vector_image_residues(self) -> set[int]:
        """Residues mod period of nu_Lambda on nonzero vectors."""
        return {
            self.sequence.max_index_with_alpha_le(s, 0) % self.sequence.period
            for s in self.sequence.labels
        }

    def check_image(self) -> None:
        mod, res = self.expected_image()
        seen = {
            self.sequence.max_index_with_alpha_le(s, 0) % mod for s in self.sequence.labels
        }
        if seen != {res % mod}:
            raise InvariantViolation(
                f"valuation image of {self.kind} component is {seen} mod {mod}, expected {res}"
            )


def component_profile(ext_ramified: bool, delta_val: int) -> StratumLatticeProfile:
    """Build and normalize the principal chain of a component from its data.

    delta_val is nu_E of the anisotropic form parameter on the component; the
    pre-normalization duality invariant is 1 - delta_val, whose parity decides
    whether an unramified component chain contains a self-dual lattice.
    """
    e = 2 if ext_ramified else 1
    seq = principal_component_sequence(e, plus_val=-delta_val)
    d = seq.duality_invariant()
    if d != 1 - delta_val:
        raise InvariantViolation("component chain duality does not match delta valuation")
    if ext_ramified:
        kind = "ramified"
    else:
        kind = "unram_selfdual" if (1 - delta_val) % 2 == 0 else "unram_no_selfdual"
    norm = normalize_period4(seq)
    prof = StratumLatticeProfile(kind, norm)
    prof.check_image()
    return prof
