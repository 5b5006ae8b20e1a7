"""Normally ordered operator expressions: build, apply, fit, verify.

An expression is a sum of words (creation occupation, annihilation
occupation, coefficient); applying a word annihilates first, then
creates.  Products are only defined when the result stays normally
ordered (left factor free of annihilators or right factor free of
creators), which covers every block expression used here; rewriting
arbitrary operator products is out of scope.

The fitter solves for word coefficients so that the expression's matrix
elements between monomials agree with the target operator's, degree by
degree.  Away from couplings where the degree-n Gram matrix is singular
this pins the action exactly (the two statements are equivalent there);
at a singular coupling the system is solved in echelon form with free
variables zeroed, and the result matches the target modulo null states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence

from . import fock
from .errors import FitInconsistent, UnknownRelation, ZeroPivot
from .fock import (
    AlgebraParams,
    FockState,
    Occupation,
    annihilate,
    commutator_action,
    create,
    dual_annihilate,
    exchange,
    ground_energy,
    inner_product,
    occupations_of_degree,
    transition_number,
)
from .scalar import NuScalar, ScalarLike, _as_scalar, scalar_from_json, scalar_to_json

WordKey = tuple[Occupation, Occupation]


class OperatorExpr:
    """Linear combination of normally ordered words over M modes."""

    __slots__ = ("modes", "words")

    def __init__(self, modes: int, words: Mapping[WordKey, ScalarLike] | None = None):
        self.modes = modes
        clean: dict[WordKey, NuScalar] = {}
        for (cre, ann), coef in (words or {}).items():
            if len(cre) != modes or len(ann) != modes:
                raise ValueError("word occupations must have one slot per mode")
            c = _as_scalar(coef)
            if not c.is_zero():
                clean[(tuple(cre), tuple(ann))] = c
        self.words = clean

    # --- constructors -----------------------------------------------------

    @staticmethod
    def zero(modes: int) -> "OperatorExpr":
        return OperatorExpr(modes)

    @staticmethod
    def identity(modes: int, coef: ScalarLike = 1) -> "OperatorExpr":
        z = (0,) * modes
        return OperatorExpr(modes, {(z, z): coef})

    @staticmethod
    def creation(modes: int, i: int) -> "OperatorExpr":
        z = [0] * modes
        z[i - 1] = 1
        return OperatorExpr(modes, {(tuple(z), (0,) * modes): 1})

    @staticmethod
    def annihilation(modes: int, i: int) -> "OperatorExpr":
        z = [0] * modes
        z[i - 1] = 1
        return OperatorExpr(modes, {((0,) * modes, tuple(z)): 1})

    @staticmethod
    def word(creations: Occupation, annihilations: Occupation, coef: ScalarLike = 1) -> "OperatorExpr":
        return OperatorExpr(len(creations), {(tuple(creations), tuple(annihilations)): coef})

    # --- algebra ------------------------------------------------------------

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        if self.modes != other.modes:
            raise ValueError("mode counts differ")
        out = dict(self.words)
        for key, coef in other.words.items():
            cur = out.get(key)
            out[key] = coef if cur is None else cur + coef
        return OperatorExpr(self.modes, out)

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self + other.scale(-1)

    def scale(self, coef: ScalarLike) -> "OperatorExpr":
        c = _as_scalar(coef)
        if c.is_zero():
            return OperatorExpr.zero(self.modes)
        return OperatorExpr(self.modes, {k: v * c for k, v in self.words.items()})

    def __rmul__(self, coef: ScalarLike) -> "OperatorExpr":
        return self.scale(coef)

    def __mul__(self, other) -> "OperatorExpr":
        if not isinstance(other, OperatorExpr):
            return self.scale(other)
        if self.modes != other.modes:
            raise ValueError("mode counts differ")
        out: dict[WordKey, NuScalar] = {}
        for (c1, a1), v1 in self.words.items():
            for (c2, a2), v2 in other.words.items():
                if any(a1) and any(c2):
                    raise ValueError(
                        "product would not be normally ordered; rewriting is unsupported"
                    )
                key = (
                    tuple(x + y for x, y in zip(c1, c2)),
                    tuple(x + y for x, y in zip(a1, a2)),
                )
                cur = out.get(key)
                v = v1 * v2
                out[key] = v if cur is None else cur + v
        return OperatorExpr(self.modes, out)

    def __pow__(self, k: int) -> "OperatorExpr":
        if k < 0:
            raise ValueError("negative powers are undefined")
        out = OperatorExpr.identity(self.modes)
        for _ in range(k):
            out = out * self
        return out

    def dagger(self) -> "OperatorExpr":
        return OperatorExpr(self.modes, {(a, c): v for (c, a), v in self.words.items()})

    def sorted_words(self) -> list[tuple[Occupation, Occupation, NuScalar]]:
        return [(c, a, v) for (c, a), v in sorted(self.words.items())]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OperatorExpr)
            and self.modes == other.modes
            and self.words == other.words
        )

    def __repr__(self) -> str:
        if not self.words:
            return "OperatorExpr(0)"
        parts = [
            f"({v})*adag{list(c)}*a{list(a)}" for c, a, v in self.sorted_words()
        ]
        return " + ".join(parts)

    # --- action -------------------------------------------------------------

    def apply(self, p: AlgebraParams, s: FockState) -> FockState:
        """Apply to a state: per word, annihilators first, then creators."""
        if p.modes != self.modes or s.modes != self.modes:
            raise ValueError("mode counts differ")
        total = FockState.zero(self.modes)
        for (cre, ann), coef in sorted(self.words.items()):
            t = s
            for mode, count in enumerate(ann, start=1):
                for _ in range(count):
                    if t.is_zero():
                        break
                    t = annihilate(p, mode, t)
            if t.is_zero():
                continue
            t = t.scale(coef)
            for mode, count in enumerate(cre, start=1):
                for _ in range(count):
                    t = create(mode, t)
            total = total + t
        return total


def b_block(m: int, n: int, modes: int) -> OperatorExpr:
    """Permutation-symmetric block: sum over modes of adag_k^m a_k^n."""
    if m < 0 or n < 0:
        raise ValueError("powers must be >= 0")
    out: dict[WordKey, NuScalar] = {}
    for k in range(modes):
        cre = [0] * modes
        ann = [0] * modes
        cre[k] = m
        ann[k] = n
        key = (tuple(cre), tuple(ann))
        out[key] = NuScalar(1) + out.get(key, NuScalar(0))
    return OperatorExpr(modes, out)


# --- targets and fitting ------------------------------------------------------


@dataclass(frozen=True)
class FitProblem:
    """A named operator action to reproduce on all monomials of degree <= degree.

    Targets: exchange(i,j), transition(i,j), total_number, and the
    product pair(i,j) acting as a_i adag_j.  The template is every word
    with equal creation and annihilation degree up to the fit degree.
    """

    target: str
    degree: int
    i: int = 0
    j: int = 0

    def action(self, p: AlgebraParams) -> Callable[[FockState], FockState]:
        if self.target == "exchange":
            return lambda s: exchange(self.i, self.j, s)
        if self.target == "transition":
            return lambda s: transition_number(self.i, self.j, s)
        if self.target == "total_number":
            def total(s: FockState) -> FockState:
                out = FockState.zero(s.modes)
                for i in range(1, s.modes + 1):
                    out = out + transition_number(i, i, s)
                return out

            return total
        if self.target == "pair":
            return lambda s: annihilate(p, self.i, create(self.j, s))
        raise ValueError(f"unknown fit target {self.target!r}")

    def describe(self) -> str:
        if self.target in ("exchange", "transition", "pair"):
            return f"{self.target}({self.i},{self.j})"
        return self.target


@dataclass(frozen=True)
class FitResult:
    expression: OperatorExpr
    pivot_roots: tuple[Fraction, ...]
    exact_action: bool


def fit_expansion(problem: FitProblem, p: AlgebraParams) -> FitResult:
    """Solve for the expansion of the target, degree by degree.

    Equations at stage n demand that matrix elements between all degree-n
    monomials match; stages are triangular because a word of balanced
    degree d kills monomials of degree < d.  Underdetermined stages (a
    singular Gram at the working coupling) take the echelon solution with
    free variables zeroed, in lexicographic word order.

    ``pivot_roots`` collects the rational couplings where some symbolic
    pivot vanishes: the fit taken at those couplings degenerates.
    ``exact_action`` records whether the result reproduces the target as
    state-level equality (it always does away from pivot roots) or only
    modulo null states.
    """
    symbolic = not p.nu.is_constant()
    target = problem.action(p)
    expr = OperatorExpr.zero(p.modes)
    roots: set[Fraction] = set()
    for deg in range(0, problem.degree + 1):
        occs = occupations_of_degree(p.modes, deg, p.guards)
        words = [(c, a) for c in occs for a in occs]
        gram = {}
        for x in occs:
            for y in occs:
                if (y, x) in gram:
                    gram[(x, y)] = gram[(y, x)]
                else:
                    gram[(x, y)] = inner_product(p, x, FockState.monomial(y))
        rows: list[list[NuScalar]] = []
        rhs: list[NuScalar] = []
        for x in occs:
            for s in occs:
                rows.append([gram[(x, c)] * gram[(a, s)] for (c, a) in words])
                state = FockState.monomial(s)
                residual = target(state) - expr.apply(p, state)
                rhs.append(inner_product(p, x, residual))
        sol = _solve_echelon(rows, rhs, symbolic, roots)
        expr = expr + OperatorExpr(p.modes, dict(zip(words, sol)))
    exact = _verify_fit(expr, target, p, problem.degree, symbolic)
    return FitResult(expr, tuple(sorted(roots)), exact)


def _verify_fit(expr, target, p, degree, symbolic) -> bool:
    """Re-check the defining property independent of the solve path."""
    exact = True
    for deg in range(0, degree + 1):
        for occ in occupations_of_degree(p.modes, deg, p.guards):
            s = FockState.monomial(occ)
            got = expr.apply(p, s)
            want = target(s)
            if got != want:
                exact = False
                diff = got - want
                for x in occupations_of_degree(p.modes, deg, p.guards):
                    if not inner_product(p, x, diff).is_zero():
                        raise FitInconsistent(
                            f"fit residual visible to bra {x} on monomial {occ}"
                        )
    if symbolic and not exact:
        raise FitInconsistent("symbolic fit failed state-level verification")
    return exact


def _solve_echelon(
    rows: list[list[NuScalar]],
    rhs: list[NuScalar],
    symbolic: bool,
    roots: set[Fraction],
) -> list[NuScalar]:
    """Reduced echelon solve over the scalar field; free variables are zero."""
    zero = NuScalar(0)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    n_rows = len(m)
    n_cols = len(rows[0]) if rows else 0
    pivots: list[tuple[int, int]] = []
    rank = 0
    for col in range(n_cols):
        piv, best = None, None
        for r in range(rank, n_rows):
            e = m[r][col]
            if e.is_zero():
                continue
            size = e.num.degree + e.den.degree
            if best is None or size < best:
                piv, best = r, size
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pivot = m[rank][col]
        if symbolic and pivot.num.degree > 0:
            roots.update(rational_roots(pivot.num.coeffs))
        for r in range(n_rows):
            if r == rank or m[r][col].is_zero():
                continue
            factor = m[r][col] / pivot
            m[r][col] = zero
            for c in range(col + 1, n_cols + 1):
                if not m[rank][c].is_zero():
                    m[r][c] = m[r][c] - factor * m[rank][c]
        pivots.append((rank, col))
        rank += 1
        if rank == n_rows:
            break
    for r in range(rank, n_rows):
        if not m[r][n_cols].is_zero():
            if symbolic:
                raise FitInconsistent("no solution for a symbolic fit stage")
            raise ZeroPivot(
                "fit system inconsistent at the working coupling; "
                "a symbolic pivot vanishes there"
            )
    sol = [zero] * n_cols
    for r, c in pivots:
        sol[c] = m[r][n_cols] / m[r][c]
    return sol


def rational_roots(coeffs: Sequence[Fraction]) -> list[Fraction]:
    """Rational roots of a polynomial given by ascending coefficients."""
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        return []
    shift = 0
    while coeffs[shift] == 0:
        shift += 1
    roots = set([Fraction(0)] if shift else [])
    poly = coeffs[shift:]
    if len(poly) > 1:
        scale = 1
        for c in poly:
            scale = scale * c.denominator // _gcd(scale, c.denominator)
        ints = [int(c * scale) for c in poly]
        lead, const = abs(ints[-1]), abs(ints[0])
        for q in _divisors(lead):
            for pn in _divisors(const):
                for cand in (Fraction(pn, q), Fraction(-pn, q)):
                    if _poly_value(poly, cand) == 0:
                        roots.add(cand)
    return sorted(roots)


def _poly_value(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _divisors(n: int) -> list[int]:
    out = [d for d in range(1, abs(n) + 1) if n % d == 0]
    return out or [1]


# --- published truncated expansions ------------------------------------------


def _a(modes: int, i: int) -> OperatorExpr:
    return OperatorExpr.annihilation(modes, i)


def exchange12_truncation(p: AlgebraParams) -> OperatorExpr:
    """Displayed truncation of the 1<->2 exchange for three modes.

    Exact as an action on all monomials of degree <= 2; higher terms of
    the series are not displayed in the source and are not included.
    """
    _need_modes(p, 3)
    nu = p.nu
    b12 = _a(3, 1) - _a(3, 2)
    b123 = _a(3, 1) + _a(3, 2) - _a(3, 3).scale(2)
    one_plus = 1 + 3 * nu
    two_plus = 2 + 3 * nu
    return (
        OperatorExpr.identity(3)
        + (b12.dagger() * b12).scale(-1 / one_plus)
        + (b12.dagger() ** 2 * b12**2).scale(1 / (2 * one_plus * one_plus))
        + (b12.dagger() * b123.dagger() * b12 * b123).scale(
            -nu / (2 * one_plus * one_plus * two_plus)
        )
    )


def partial_number1_truncation(p: AlgebraParams) -> OperatorExpr:
    """Displayed truncation of the first partial number operator, three modes."""
    _need_modes(p, 3)
    nu = p.nu
    a1d = OperatorExpr.creation(3, 1)
    b01 = _a(3, 1) + _a(3, 2) + _a(3, 3)
    b23 = _a(3, 2) - _a(3, 3)
    b231 = _a(3, 2) + _a(3, 3) - _a(3, 1).scale(2)
    one_plus = 1 + 3 * nu
    two_plus = 2 + 3 * nu
    return (
        (a1d * _a(3, 1)).scale(1 / one_plus)
        + (a1d * b01).scale(nu / one_plus)
        + (a1d * b231.dagger() * b23**2).scale(-nu / (4 * one_plus * two_plus))
        + (a1d * b231.dagger() * b231**2).scale(
            -nu * (1 + nu) / (4 * one_plus * one_plus * two_plus)
        )
        + (a1d * b23.dagger() * b23 * b231).scale(
            -nu / (2 * one_plus * one_plus * two_plus)
        )
    )


def total_number_truncation(p: AlgebraParams) -> OperatorExpr:
    """Displayed truncation of the total number operator, three modes."""
    _need_modes(p, 3)
    nu = p.nu
    one_plus = 1 + 3 * nu
    two_plus = 2 + 3 * nu
    b01 = _a(3, 1) + _a(3, 2) + _a(3, 3)
    expr = b_block(1, 1, 3).scale(1 / one_plus) + (b01.dagger() * b01).scale(nu / one_plus)
    quartic = OperatorExpr.zero(3)
    for i, j in itertools.combinations((1, 2, 3), 2):
        diff = _a(3, i) - _a(3, j)
        quartic = quartic + diff.dagger() ** 2 * diff**2
    expr = expr + quartic.scale(nu / (one_plus * one_plus * two_plus))
    squares = _a(3, 1) ** 2 + _a(3, 2) ** 2 + _a(3, 3) ** 2
    cross = OperatorExpr.zero(3)
    for i, j in itertools.combinations((1, 2, 3), 2):
        cross = cross + _a(3, i) * _a(3, j)
    anti = squares - cross
    expr = expr + (anti.dagger() * anti).scale(
        2 * nu * nu / (one_plus * one_plus * two_plus)
    )
    return expr


def boson_exchange_truncation(modes: int, i: int, j: int, degree: int) -> OperatorExpr:
    """Normal-ordered exponential exchange for free bosons, truncated.

    Sum over k <= degree of (-1)^k/k! (adag_i - adag_j)^k (a_i - a_j)^k;
    exact on monomials of degree <= degree at zero coupling.
    """
    if i == j:
        raise ValueError("exchange needs distinct modes")
    diff = _a(modes, i) - _a(modes, j)
    out = OperatorExpr.zero(modes)
    for k in range(degree + 1):
        term = (diff.dagger() ** k * diff**k).scale(Fraction((-1) ** k, factorial(k)))
        out = out + term
    return out


REFERENCE_EXPANSIONS = ("K12", "N1", "N", "boson_exchange")


def reference_expansion(
    which: str,
    p: AlgebraParams | None = None,
    modes: int = 2,
    i: int = 1,
    j: int = 2,
    degree: int = 4,
) -> OperatorExpr:
    """Dispatch the published truncations by short name."""
    if which in ("K12", "N1", "N"):
        if p is None:
            raise ValueError(f"expansion {which!r} needs algebra params")
        if which == "K12":
            return exchange12_truncation(p)
        if which == "N1":
            return partial_number1_truncation(p)
        return total_number_truncation(p)
    if which == "boson_exchange":
        return boson_exchange_truncation(modes, i, j, degree)
    raise ValueError(f"unknown expansion {which!r}; expected one of {REFERENCE_EXPANSIONS}")


def _need_modes(p: AlgebraParams, m: int) -> None:
    if p.modes != m:
        raise ValueError(f"this expansion is specific to {m} modes, got {p.modes}")


# --- relation verifier --------------------------------------------------------


@dataclass(frozen=True)
class RelationReport:
    relation: str
    modes: int
    degree: int
    nu: str
    passed: bool
    states_checked: int
    counterexample: str | None = None
    notes: tuple[str, ...] = ()


def _monomials(p: AlgebraParams, degree: int) -> list[FockState]:
    out = []
    for deg in range(degree + 1):
        for occ in occupations_of_degree(p.modes, deg, p.guards):
            out.append(FockState.monomial(occ))
    return out


def _modes_range(p: AlgebraParams):
    return range(1, p.modes + 1)


def _check_mode_commutators(p: AlgebraParams, degree: int):
    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    yield (
                        f"[a_{i},a_{j}] on {s!r}",
                        annihilate(p, i, annihilate(p, j, s)),
                        annihilate(p, j, annihilate(p, i, s)),
                    )
                    yield (
                        f"[a_{i},adag_{j}] on {s!r}",
                        annihilate(p, i, create(j, s)) - create(j, annihilate(p, i, s)),
                        commutator_action(p, i, j, s),
                    )

    return cases()


def _check_transition_commutators(p: AlgebraParams, degree: int):
    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    for k in _modes_range(p):
                        lhs = transition_number(i, j, create(k, s)) - create(
                            k, transition_number(i, j, s)
                        )
                        rhs = create(i, s) if j == k else FockState.zero(p.modes)
                        yield (f"[N_{i}{j},adag_{k}] on {s!r}", lhs, rhs)
                        for l in _modes_range(p):
                            lhs2 = transition_number(
                                i, j, transition_number(k, l, s)
                            ) - transition_number(k, l, transition_number(i, j, s))
                            rhs2 = FockState.zero(p.modes)
                            if j == k:
                                rhs2 = rhs2 + transition_number(i, l, s)
                            if i == l:
                                rhs2 = rhs2 - transition_number(k, j, s)
                            yield (f"[N_{i}{j},N_{k}{l}] on {s!r}", lhs2, rhs2)
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    yield (
                        f"[N_{i},N_{j}] on {s!r}",
                        transition_number(i, i, transition_number(j, j, s)),
                        transition_number(j, j, transition_number(i, i, s)),
                    )

    return cases()


def _check_exchange_group(p: AlgebraParams, degree: int):
    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    if i == j:
                        continue
                    yield (f"K_{i}{j}^2 on {s!r}", exchange(i, j, exchange(i, j, s)), s)
            for i, j, l in itertools.permutations(_modes_range(p), 3):
                a = exchange(i, j, exchange(j, l, s))
                b = exchange(j, l, exchange(i, l, s))
                c = exchange(i, l, exchange(i, j, s))
                yield (f"braid {i}{j}{l} (1) on {s!r}", a, b)
                yield (f"braid {i}{j}{l} (2) on {s!r}", b, c)

    return cases()


def _check_exchange_from_transitions(p: AlgebraParams, degree: int):
    def cases():
        for s in _monomials(p, degree):
            occ = next(iter(s.terms))
            for i in _modes_range(p):
                for j in _modes_range(p):
                    if i == j:
                        continue
                    ni, nj = occ[i - 1], occ[j - 1]
                    t = s
                    for _ in range(nj):
                        t = transition_number(i, j, t)
                    for _ in range(ni):
                        t = transition_number(j, i, t)
                    t = t.scale(Fraction(1, factorial(ni + nj)))
                    yield (f"K_{i}{j} from N on {s!r}", t, exchange(i, j, s))

    return cases()


def _check_triple_relations(p: AlgebraParams, degree: int):
    def comm(i, j, s):
        return commutator_action(p, i, j, s)

    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                lhs = FockState.zero(p.modes)
                for j in _modes_range(p):
                    lhs = lhs + annihilate(p, i, create(j, s)) - create(j, annihilate(p, i, s))
                yield (f"[a_{i},B01dag] on {s!r}", lhs, s)
            for i in _modes_range(p):
                for j in _modes_range(p):
                    if i == j:
                        continue
                    yield (
                        f"a_{i}[a_{i},adag_{j}] on {s!r}",
                        annihilate(p, i, comm(i, j, s)),
                        comm(i, j, annihilate(p, j, s)),
                    )
                    yield (
                        f"a_{i}[a_{j},adag_{i}] on {s!r}",
                        annihilate(p, i, comm(j, i, s)),
                        comm(j, i, annihilate(p, j, s)),
                    )
            for i, j, k in itertools.permutations(_modes_range(p), 3):
                yield (
                    f"a_{k}[a_{i},adag_{j}] on {s!r}",
                    annihilate(p, k, comm(i, j, s)),
                    comm(i, j, annihilate(p, k, s)),
                )

    return cases()


def _check_vacuum_cross_pairs(p: AlgebraParams, degree: int):
    def cases():
        vac = FockState.vacuum(p.modes)
        for i in _modes_range(p):
            for j in _modes_range(p):
                if i == j:
                    continue
                yield (
                    f"a_{i} adag_{j} on vacuum",
                    annihilate(p, i, create(j, vac)),
                    vac.scale(-p.nu),
                )

    return cases()


def _check_commutator_consistency(p: AlgebraParams, degree: int):
    def comm(i, j, s):
        return commutator_action(p, i, j, s)

    nu2 = p.nu * p.nu

    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    if i == j:
                        continue
                    sq = comm(i, j, comm(i, j, s))
                    yield (f"[a_{i},adag_{j}]^2 on {s!r}", sq, s.scale(nu2))
                    for k in _modes_range(p):
                        yield (
                            f"[a_{k},[a_{i},adag_{j}]^2] on {s!r}",
                            annihilate(p, k, sq),
                            comm(i, j, comm(i, j, annihilate(p, k, s))),
                        )
            for i, j, k in itertools.permutations(_modes_range(p), 3):
                a = comm(i, j, comm(j, k, s))
                b = comm(j, k, comm(i, k, s))
                c = comm(i, k, comm(i, j, s))
                yield (f"commutator chain {i}{j}{k} (1) on {s!r}", a, b)
                yield (f"commutator chain {i}{j}{k} (2) on {s!r}", b, c)

    return cases()


def _check_normal_ordered_pair(p: AlgebraParams, degree: int):
    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    lhs = annihilate(p, i, create(j, s))
                    if i != j:
                        rhs = exchange(i, j, s).scale(-p.nu) + create(j, annihilate(p, i, s))
                    else:
                        rhs = s + create(i, annihilate(p, i, s))
                        for l in _modes_range(p):
                            if l != i:
                                rhs = rhs + exchange(i, l, s).scale(p.nu)
                    yield (f"a_{i} adag_{j} on {s!r}", lhs, rhs)

    return cases()


def _check_dual_canonical(p: AlgebraParams, degree: int):
    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    lhs = dual_annihilate(i, create(j, s)) - create(j, dual_annihilate(i, s))
                    rhs = s if i == j else FockState.zero(p.modes)
                    yield (f"[dual_{i},adag_{j}] on {s!r}", lhs, rhs)
                    yield (
                        f"[dual_{i},dual_{j}] on {s!r}",
                        dual_annihilate(i, dual_annihilate(j, s)),
                        dual_annihilate(j, dual_annihilate(i, s)),
                    )

    return cases()


def _check_hamiltonian_number(p: AlgebraParams, degree: int):
    e0 = ground_energy(p)

    def cases():
        for s in _monomials(p, degree):
            acc = FockState.zero(p.modes)
            for i in _modes_range(p):
                acc = acc + annihilate(p, i, create(i, s)) + create(i, annihilate(p, i, s))
            lhs = acc.scale(Fraction(1, 2))
            deg = s.degree()
            yield (f"hamiltonian on {s!r}", lhs, s.scale(e0 + deg))

    return cases()


def _check_bosonization_preconditions(p: AlgebraParams, degree: int):
    def cases():
        for s in _monomials(p, degree):
            for i in _modes_range(p):
                for j in _modes_range(p):
                    yield (
                        f"[a_{i},a_{j}] on {s!r}",
                        annihilate(p, i, annihilate(p, j, s)),
                        annihilate(p, j, annihilate(p, i, s)),
                    )
                    lhs = transition_number(i, i, create(j, s)) - create(
                        j, transition_number(i, i, s)
                    )
                    rhs = create(i, s) if i == j else FockState.zero(p.modes)
                    yield (f"[N_{i},adag_{j}] on {s!r}", lhs, rhs)

    return cases()


RELATIONS: dict[str, tuple[Callable, str]] = {
    "mode-commutators": (_check_mode_commutators, "annihilators commute; [a_i, adag_j] equals its exchange expression"),
    "transition-commutators": (_check_transition_commutators, "transition-number commutators with creators and each other"),
    "exchange-group": (_check_exchange_group, "exchanges are involutions satisfying the braid relations"),
    "exchange-from-transitions": (_check_exchange_from_transitions, "exchange realized by iterated transition numbers"),
    "triple-relations": (_check_triple_relations, "exchange-free triple commutator presentation"),
    "vacuum-cross-pairs": (_check_vacuum_cross_pairs, "a_i adag_j on the vacuum gives -nu for i != j"),
    "commutator-consistency": (_check_commutator_consistency, "squares and chains of mixed commutators"),
    "normal-ordered-pair": (_check_normal_ordered_pair, "a_i adag_j rewritten in normally ordered form"),
    "dual-canonical": (_check_dual_canonical, "duals are canonical partners of the creators and commute"),
    "hamiltonian-number": (_check_hamiltonian_number, "symmetrized quadratic hamiltonian counts degree plus vacuum energy"),
    "bosonization-preconditions": (_check_bosonization_preconditions, "commuting annihilators and canonical partial numbers"),
}


def verify_relation(rel_id: str, p: AlgebraParams, degree: int) -> RelationReport:
    """Run one relation check over every monomial of degree <= degree."""
    try:
        checker, _ = RELATIONS[rel_id]
    except KeyError:
        raise UnknownRelation(rel_id, RELATIONS.keys())
    nu_str = "symbolic" if not p.nu.is_constant() else str(p.nu.as_rat())
    checked = 0
    failure = None
    for label, lhs, rhs in checker(p, degree):
        checked += 1
        if lhs != rhs:
            failure = f"{label}: lhs={lhs!r} rhs={rhs!r}"
            break
    notes: tuple[str, ...] = ()
    if rel_id == "bosonization-preconditions":
        if p.nu.is_constant():
            flag = fock.positivity_flag(p)
            notes = (f"positivity 1+M*nu>0: {flag}",)
        else:
            notes = ("positivity 1+M*nu>0: needs a numeric coupling",)
    return RelationReport(
        rel_id, p.modes, degree, nu_str, failure is None, checked, failure, notes
    )


# --- serialization ------------------------------------------------------------


def expr_to_json(e: OperatorExpr) -> dict:
    return {
        "modes": e.modes,
        "words": [
            {"create": list(c), "annihilate": list(a), "coef": scalar_to_json(v)}
            for c, a, v in e.sorted_words()
        ],
    }


def expr_from_json(data: dict) -> OperatorExpr:
    return OperatorExpr(
        data["modes"],
        {
            (tuple(w["create"]), tuple(w["annihilate"])): scalar_from_json(w["coef"])
            for w in data["words"]
        },
    )
