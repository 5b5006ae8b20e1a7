"""Occupation-number Fock space over M modes and the deformed operator actions.

States are sparse linear combinations of occupation tuples; creation
operators commute, so an occupation tuple fully labels a monomial state.
The annihilator action is the exchange-deformed rule: besides the usual
lowering term ``n_i |..., n_i - 1, ...>``, each partner mode j contributes
``nu * sgn(n_i - n_j)`` times the chain of occupations interpolating
between slots i and j.  Everything downstream (Gram matrices, operator
fits, relation checks) reduces to this single action.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence, Union

from .errors import BasisTooLarge, InvalidModePair
from .scalar import NuScalar, ScalarLike, _as_scalar, scalar_from_json, scalar_to_json

Occupation = tuple[int, ...]
ModeSequence = tuple[int, ...]


@dataclass(frozen=True)
class Guards:
    """Size limits for basis enumeration; override to go bigger."""

    max_modes: int = 6
    max_degree: int = 6
    max_basis: int = 200_000


@dataclass(frozen=True)
class AlgebraParams:
    """Mode count and coupling of the permutation-invariant algebra.

    ``nu`` may be the symbolic indeterminate or any constant lifted into
    ``NuScalar``.  Positivity (1 + M*nu > 0) is never assumed; callers
    that need it must check :func:`positivity_flag` explicitly.
    """

    modes: int
    nu: NuScalar
    guards: Guards = field(default_factory=Guards)

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError(f"modes must be >= 1, got {self.modes}")
        if self.modes > self.guards.max_modes:
            raise ValueError(
                f"modes {self.modes} exceeds guard {self.guards.max_modes}"
            )


def params(modes: int, nu: Union[NuScalar, Fraction, int, str], guards: Guards | None = None) -> AlgebraParams:
    """Convenience constructor; ``nu`` may be 'symbolic', a rational or a NuScalar."""
    if isinstance(nu, str):
        nu = NuScalar.nu() if nu == "symbolic" else NuScalar.from_rat(Fraction(nu))
    elif isinstance(nu, (int, Fraction)):
        nu = NuScalar.from_rat(nu)
    return AlgebraParams(modes, nu, guards or Guards())


def positivity_flag(p: AlgebraParams) -> bool:
    """Whether 1 + M*nu > 0 at the (constant) working coupling."""
    return 1 + p.modes * p.nu.as_rat() > 0


def occupation_of(seq: Sequence[int], modes: int) -> Occupation:
    """Occupation class of a mode-index string."""
    occ = [0] * modes
    for i in seq:
        if not 1 <= i <= modes:
            raise ValueError(f"mode index {i} out of range 1..{modes}")
        occ[i - 1] += 1
    return tuple(occ)


def degree(occ: Occupation) -> int:
    return sum(occ)


class FockState:
    """Sparse linear combination of occupation states with NuScalar coefficients.

    Immutable; zero coefficients are never stored.
    """

    __slots__ = ("modes", "terms")

    def __init__(self, modes: int, terms: Mapping[Occupation, ScalarLike] | None = None):
        self.modes = modes
        clean: dict[Occupation, NuScalar] = {}
        for occ, coef in (terms or {}).items():
            if len(occ) != modes:
                raise ValueError(f"occupation {occ} does not have {modes} slots")
            c = _as_scalar(coef)
            if not c.is_zero():
                clean[tuple(occ)] = c
        self.terms = clean

    @staticmethod
    def zero(modes: int) -> "FockState":
        return FockState(modes)

    @staticmethod
    def vacuum(modes: int) -> "FockState":
        return FockState(modes, {(0,) * modes: 1})

    @staticmethod
    def monomial(occ: Occupation, coef: ScalarLike = 1) -> "FockState":
        return FockState(len(occ), {tuple(occ): coef})

    @staticmethod
    def from_sequence(seq: Sequence[int], modes: int) -> "FockState":
        return FockState.monomial(occupation_of(seq, modes))

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int | None:
        """Common degree of all terms, or None if mixed or zero."""
        degs = {degree(o) for o in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def coefficient(self, occ: Occupation) -> NuScalar:
        return self.terms.get(tuple(occ), NuScalar(0))

    def vacuum_coefficient(self) -> NuScalar:
        return self.coefficient((0,) * self.modes)

    def __add__(self, other: "FockState") -> "FockState":
        if self.modes != other.modes:
            raise ValueError("mode counts differ")
        out = dict(self.terms)
        for occ, coef in other.terms.items():
            cur = out.get(occ)
            out[occ] = coef if cur is None else cur + coef
        return FockState(self.modes, out)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + other.scale(-1)

    def scale(self, coef: ScalarLike) -> "FockState":
        c = _as_scalar(coef)
        if c.is_zero():
            return FockState.zero(self.modes)
        return FockState(self.modes, {occ: v * c for occ, v in self.terms.items()})

    def evaluate(self, nu: Fraction) -> dict[Occupation, Fraction]:
        return {occ: v.evaluate(nu) for occ, v in self.terms.items()}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FockState)
            and self.modes == other.modes
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        return hash((self.modes, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "FockState(0)"
        parts = [f"({coef})*|{','.join(map(str, occ))}>" for occ, coef in sorted(self.terms.items())]
        return " + ".join(parts)


def _accumulate(acc: dict[Occupation, NuScalar], occ: Occupation, coef: NuScalar) -> None:
    cur = acc.get(occ)
    coef = coef if cur is None else cur + coef
    if coef.is_zero():
        acc.pop(occ, None)
    else:
        acc[occ] = coef


def create(i: int, s: FockState) -> FockState:
    """Raise mode i by one on every term; coefficients unchanged."""
    _check_mode(i, s.modes)
    out = {}
    for occ, coef in s.terms.items():
        lifted = list(occ)
        lifted[i - 1] += 1
        out[tuple(lifted)] = coef
    return FockState(s.modes, out)


def annihilate(p: AlgebraParams, i: int, s: FockState) -> FockState:
    """Deformed lowering of mode i; the vacuum maps to the zero state.

    Each term |n_1;...;n_M> contributes n_i times itself lowered at i,
    plus, for every other mode j, nu * sgn(n_i - n_j) times the chain of
    occupations with slot i set to min+k-1 and slot j set to max-k for
    k = 1.. |n_i - n_j|  (sgn(0) = 0, so equal occupations contribute
    nothing).  The result is homogeneous of degree one less.
    """
    _check_mode(i, s.modes)
    nu = p.nu
    acc: dict[Occupation, NuScalar] = {}
    for occ, coef in s.terms.items():
        ni = occ[i - 1]
        if ni > 0:
            lowered = list(occ)
            lowered[i - 1] -= 1
            _accumulate(acc, tuple(lowered), coef * ni)
        for j in range(1, s.modes + 1):
            if j == i:
                continue
            nj = occ[j - 1]
            if ni == nj:
                continue
            lo, hi = min(ni, nj), max(ni, nj)
            chain = coef * nu if ni > nj else -(coef * nu)
            for k in range(1, hi - lo + 1):
                moved = list(occ)
                moved[i - 1] = lo + k - 1
                moved[j - 1] = hi - k
                _accumulate(acc, tuple(moved), chain)
    return FockState(s.modes, acc)


def exchange(i: int, j: int, s: FockState) -> FockState:
    """Swap the occupations of modes i and j (the exchange operator)."""
    if i == j:
        raise InvalidModePair(f"exchange needs distinct modes, got ({i},{j})")
    _check_mode(i, s.modes)
    _check_mode(j, s.modes)
    out = {}
    for occ, coef in s.terms.items():
        swapped = list(occ)
        swapped[i - 1], swapped[j - 1] = swapped[j - 1], swapped[i - 1]
        _accumulate(out, tuple(swapped), coef)
    return FockState(s.modes, out)


def transition_number(i: int, j: int, s: FockState) -> FockState:
    """Move one quantum from mode j to mode i with multiplicity n_j.

    For i == j this is the partial number operator (multiply by n_i).
    """
    _check_mode(i, s.modes)
    _check_mode(j, s.modes)
    acc: dict[Occupation, NuScalar] = {}
    for occ, coef in s.terms.items():
        nj = occ[j - 1]
        if nj == 0:
            continue
        moved = list(occ)
        moved[j - 1] -= 1
        moved[i - 1] += 1
        _accumulate(acc, tuple(moved), coef * nj)
    return FockState(s.modes, acc)


def dual_annihilate(i: int, s: FockState) -> FockState:
    """Ordinary bosonic lowering: n_i times the decremented occupation."""
    _check_mode(i, s.modes)
    acc: dict[Occupation, NuScalar] = {}
    for occ, coef in s.terms.items():
        ni = occ[i - 1]
        if ni == 0:
            continue
        lowered = list(occ)
        lowered[i - 1] -= 1
        _accumulate(acc, tuple(lowered), coef * ni)
    return FockState(s.modes, acc)


def relabel(sigma: Sequence[int], s: FockState) -> FockState:
    """Apply a mode permutation: slot sigma(i) of the image holds slot i.

    ``sigma`` maps 1..M to 1..M, given as a length-M sequence.
    """
    if sorted(sigma) != list(range(1, s.modes + 1)):
        raise ValueError(f"not a permutation of 1..{s.modes}: {sigma}")
    out = {}
    for occ, coef in s.terms.items():
        moved = [0] * s.modes
        for idx, n in enumerate(occ):
            moved[sigma[idx] - 1] = n
        _accumulate(out, tuple(moved), coef)
    return FockState(s.modes, out)


def inner_product(
    p: AlgebraParams,
    bra: Union[Occupation, ModeSequence, Sequence[int]],
    ket: FockState,
    sequence: bool = False,
) -> NuScalar:
    """Vacuum matrix element <bra| ket>.

    The bra monomial is an occupation tuple, or a mode-index string when
    ``sequence=True``; it is applied as a cascade of annihilators and the
    vacuum coefficient of the result is returned.  Terms of the ket whose
    degree differs from the bra's contribute nothing.
    """
    occ = occupation_of(bra, p.modes) if sequence else tuple(bra)
    if len(occ) != p.modes:
        raise ValueError(f"bra occupation {occ} does not have {p.modes} slots")
    state = ket
    for mode, count in enumerate(occ, start=1):
        for _ in range(count):
            if state.is_zero():
                return NuScalar(0)
            state = annihilate(p, mode, state)
    return state.vacuum_coefficient()


def commutator_action(p: AlgebraParams, i: int, j: int, s: FockState) -> FockState:
    """Action of [a_i, a_j-dagger] evaluated from its exchange expression.

    Diagonal: identity plus nu times the sum of exchanges with every
    partner mode; off-diagonal: -nu times the single exchange.
    """
    _check_mode(i, s.modes)
    _check_mode(j, s.modes)
    if i != j:
        return exchange(i, j, s).scale(-p.nu)
    out = s
    for k in range(1, s.modes + 1):
        if k != i:
            out = out + exchange(i, k, s).scale(p.nu)
    return out


def ground_energy(p: AlgebraParams) -> NuScalar:
    """Vacuum energy (M/2)(1 + nu (M-1)) of the deformed oscillators."""
    m = p.modes
    return NuScalar(Fraction(m, 2)) * (1 + p.nu * (m - 1))


def enumerate_basis(
    modes: int, n: int, kind: str = "sequence", guards: Guards | None = None
) -> list[tuple[int, ...]]:
    """Ordered n-particle basis labels: index strings or sorted multisets.

    Sequence: all strings in {1..M}^n, lexicographic, size M^n.
    Multiset: nondecreasing strings, lexicographic, size C(M+n-1, n).
    """
    guards = guards or Guards()
    if kind == "sequence":
        size = modes**n
    elif kind == "multiset":
        size = comb(modes + n - 1, n)
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    if size > guards.max_basis:
        raise BasisTooLarge(size, guards.max_basis)
    rng = range(1, modes + 1)
    if kind == "sequence":
        return [tuple(ix) for ix in itertools.product(rng, repeat=n)]
    return [tuple(ix) for ix in itertools.combinations_with_replacement(rng, n)]


def occupations_of_degree(modes: int, n: int, guards: Guards | None = None) -> list[Occupation]:
    """All occupation tuples of total degree n, in lexicographic order."""
    return sorted(occupation_of(seq, modes) for seq in enumerate_basis(modes, n, "multiset", guards))


def _check_mode(i: int, modes: int) -> None:
    if not 1 <= i <= modes:
        raise ValueError(f"mode index {i} out of range 1..{modes}")


# --- serialization ---------------------------------------------------------

def state_to_json(s: FockState) -> dict:
    return {
        "modes": s.modes,
        "terms": [
            {"occ": list(occ), "coef": scalar_to_json(coef)}
            for occ, coef in sorted(s.terms.items())
        ],
    }


def state_from_json(data: dict) -> FockState:
    return FockState(
        data["modes"],
        {tuple(t["occ"]): scalar_from_json(t["coef"]) for t in data["terms"]},
    )
