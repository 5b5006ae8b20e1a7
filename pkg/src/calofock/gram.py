"""Gram matrices of monomial inner products: exact build, rank, spectra.

A Gram matrix is indexed either by mode-index strings ("sequence", size
M^n) or by their occupation classes ("multiset", size C(M+n-1, n)).
Entries depend only on the occupation classes of the row and column
labels, so the sequence matrix is assembled from the multiset one.

Exact paths: symbolic entries, Bareiss rank over the rationals, and the
eigenvector-family identities A v = lambda v checked as polynomial
identities.  Numeric path: a cyclic Jacobi eigensolver on the evaluated
symmetric matrix.  Rank decisions always come from the exact path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, lcm
from typing import Callable, Iterable, Sequence

from .errors import NoConvergence, PoleError
from .fock import (
    AlgebraParams,
    FockState,
    Guards,
    enumerate_basis,
    inner_product,
    occupation_of,
)
from .parallel import parallel_map
from .scalar import NU, NuScalar

JACOBI_TOL = 1e-10
JACOBI_SWEEPS = 100


@dataclass(frozen=True)
class GramMatrix:
    params: AlgebraParams
    particles: int
    basis_kind: str
    basis: tuple[tuple[int, ...], ...]
    entries: tuple[tuple[NuScalar, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def multiset_dimension(self) -> int:
        return comb(self.params.modes + self.particles - 1, self.particles)

    def entry(self, i: int, j: int) -> NuScalar:
        return self.entries[i][j]

    def evaluate(self, nu: Fraction | None = None) -> list[list[Fraction]]:
        """Exact rational entries; ``nu`` defaults to the params coupling."""
        if nu is None:
            nu = self.params.nu.as_rat()
        return [[e.evaluate(nu) for e in row] for row in self.entries]


def build_gram(
    p: AlgebraParams, n: int, basis_kind: str = "sequence", threads: int | None = 1
) -> GramMatrix:
    """Entrywise Gram matrix of the n-particle monomials.

    Distinct inner products are computed once per unordered pair of
    occupation classes; the rest is filled in by symmetry and class
    lookup.
    """
    basis = tuple(enumerate_basis(p.modes, n, basis_kind, p.guards))
    occs = [occupation_of(ix, p.modes) for ix in basis]
    classes = sorted(set(occs))
    pairs = [
        (classes[i], classes[j])
        for i in range(len(classes))
        for j in range(i, len(classes))
    ]
    values = parallel_map(
        lambda ab: inner_product(p, ab[0], FockState.monomial(ab[1])), pairs, threads
    )
    table = {}
    for (a, b), v in zip(pairs, values):
        table[(a, b)] = v
        table[(b, a)] = v
    entries = tuple(
        tuple(table[(occs[i], occs[j])] for j in range(len(basis)))
        for i in range(len(basis))
    )
    return GramMatrix(p, n, basis_kind, basis, entries)


def two_particle_entry(kind: str, modes: int) -> NuScalar:
    """Closed forms of the four distinct two-particle entries for any M.

    a: both labels a doubled mode, same mode; d: both labels a distinct
    pair, same pair; b: labels sharing exactly one mode (or two doubled
    modes); c: disjoint labels not both doubled.  ``c`` needs M >= 3 to
    be realized by an actual matrix element.
    """
    m = modes
    if m < 2:
        raise ValueError("closed forms need at least two modes")
    if kind == "a":
        return (1 + NU * (m - 1)) * (2 + NU * (m - 1)) - NU * NU * (m - 1)
    if kind == "b":
        return -NU - NU * NU * (m - 2)
    if kind == "c":
        return 2 * NU * NU
    if kind == "d":
        return (1 + NU * (m - 1)) * (1 + NU * (m - 2))
    raise ValueError(f"unknown entry kind {kind!r}")


def classify_two_particle(bra: tuple[int, int], ket: tuple[int, int]) -> str:
    """Entry kind (a/b/c/d) of a two-particle matrix element by its labels."""
    p = tuple(sorted(bra))
    q = tuple(sorted(ket))
    if p == q:
        return "a" if p[0] == p[1] else "d"
    overlap = len(set(p) & set(q))
    if p[0] == p[1] and q[0] == q[1]:
        return "b"
    if overlap >= 1:
        return "b"
    return "c"


# --- exact rank -------------------------------------------------------------

def rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    if not rows:
        return 0
    scaled = []
    for row in rows:
        mult = lcm(*(f.denominator for f in row)) if row else 1
        scaled.append([int(f * mult) for f in row])
    m = scaled
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(n_cols):
        piv = next((r for r in range(rank, n_rows) if m[r][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pivot = m[rank][col]
        for r in range(rank + 1, n_rows):
            if not any(m[r][col:]):
                continue
            factor = m[r][col]
            for c in range(col, n_cols):
                m[r][c] = (pivot * m[r][c] - factor * m[rank][c]) // prev
        prev = pivot
        rank += 1
        if rank == n_rows:
            break
    return rank


def rank_exact(g: GramMatrix, nu: Fraction | None = None) -> int:
    """Exact rank of the matrix evaluated at a rational coupling."""
    return rational_rank(g.evaluate(nu))


# --- numeric spectra --------------------------------------------------------

def jacobi_eigenvalues(
    a: Sequence[Sequence[float]], tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_SWEEPS
) -> list[float]:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps rotate away every off-diagonal pair in turn until all
    off-diagonal magnitudes drop below tol times the Frobenius norm.
    """
    n = len(a)
    m = [list(map(float, row)) for row in a]
    if n <= 1:
        return [m[0][0]] if n else []
    norm = max(sum(m[i][j] * m[i][j] for i in range(n) for j in range(n)) ** 0.5, 1e-300)
    for _ in range(max_sweeps):
        off = max(abs(m[i][j]) for i in range(n) for j in range(i + 1, n))
        if off < tol * norm:
            return sorted(m[i][i] for i in range(n))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p][q]
                if abs(apq) < tol * norm * 1e-4:
                    continue
                diff = m[q][q] - m[p][p]
                if abs(apq) < 1e-36 * abs(diff):
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = 1.0 / (abs(theta) + (theta * theta + 1.0) ** 0.5)
                    if theta < 0.0:
                        t = -t
                c = 1.0 / (t * t + 1.0) ** 0.5
                s = t * c
                tau = s / (1.0 + c)
                m[p][p] -= t * apq
                m[q][q] += t * apq
                m[p][q] = m[q][p] = 0.0
                for i in range(n):
                    if i in (p, q):
                        continue
                    aip, aiq = m[i][p], m[i][q]
                    m[i][p] = m[p][i] = aip - s * (aiq + tau * aip)
                    m[i][q] = m[q][i] = aiq + s * (aip - tau * aiq)
    off = max(abs(m[i][j]) for i in range(n) for j in range(i + 1, n))
    raise NoConvergence(f"off-diagonal {off:.3e} after {max_sweeps} sweeps")


@dataclass(frozen=True)
class SpectrumReport:
    nu: Fraction
    eigenvalues: tuple[float, ...]
    rank: int
    dimension: int
    multiset_dimension: int
    positivity: bool

    @property
    def min_eigenvalue(self) -> float:
        return self.eigenvalues[0]


def zero_threshold(eigenvalues: Iterable[float]) -> float:
    trace = sum(eigenvalues)
    return 1e-9 * (1.0 + abs(trace))


def eigen_numeric(g: GramMatrix, tol: float = JACOBI_TOL) -> SpectrumReport:
    """Numeric spectrum plus exact rank at the constant working coupling."""
    nu = g.params.nu.as_rat()
    exact = g.evaluate(nu)
    eigs = jacobi_eigenvalues([[float(e) for e in row] for row in exact], tol)
    rank = rational_rank(exact)
    thresh = zero_threshold(eigs)
    positive = eigs[0] >= -thresh and rank == g.multiset_dimension
    return SpectrumReport(nu, tuple(eigs), rank, g.dimension, g.multiset_dimension, positive)


# --- eigenvector families ---------------------------------------------------

Vector = dict[tuple[int, int], NuScalar]


@dataclass(frozen=True)
class EigenFamily:
    """A closed-form eigenvalue with representative exact eigenvectors.

    ``vectors(M)`` yields coordinates over the two-particle (or
    one-particle) sequence basis as {index string: coefficient} maps.
    """

    name: str
    particles: int
    min_modes: int
    eigenvalue: Callable[[int], NuScalar]
    degeneracy: Callable[[int], int]
    vectors: Callable[[int], list[dict]]


def _e(*ix: int) -> tuple[int, ...]:
    return tuple(ix)


def _vec(*pairs) -> dict:
    out: dict = {}
    for key, coef in pairs:
        out[key] = out.get(key, 0) + coef
    return {k: v for k, v in out.items() if v != 0}


def _one_particle_com(m: int) -> list[dict]:
    return [{_e(i): 1 for i in range(1, m + 1)}]


def _one_particle_rel(m: int) -> list[dict]:
    return [_vec((_e(1), 1), (_e(i), -1)) for i in range(2, m + 1)]


def _pair_null(m: int) -> list[dict]:
    return [
        _vec((_e(i, j), 1), (_e(j, i), -1))
        for i in range(1, m + 1)
        for j in range(i + 1, m + 1)
    ]


def _pair_com(m: int) -> list[dict]:
    # symmetrized a_i B01 minus twice the doubled modes
    out = []
    for i in range(1, m + 1):
        pairs = []
        for k in range(1, m + 1):
            pairs.append((_e(i, k), 1))
            pairs.append((_e(k, i), 1))
            pairs.append((_e(k, k), -2))
        out.append(_vec(*pairs))
    return out


def _pair_rel_sym(m: int) -> list[dict]:
    out = []
    for i in range(2, m + 1):
        pairs = []
        for k in range(1, m + 1):
            pairs.extend([(_e(i, k), 1), (_e(k, i), 1), (_e(1, k), -1), (_e(k, 1), -1)])
        pairs.extend([(_e(i, i), -m), (_e(1, 1), m)])
        out.append(_vec(*pairs))
    return out


def _pair_disjoint(m: int) -> list[dict]:
    out = []
    for i, j, k, l in _disjoint_quadruples(m):
        out.append(
            _vec(
                (_e(i, k), 1), (_e(k, i), 1),
                (_e(i, l), -1), (_e(l, i), -1),
                (_e(j, k), -1), (_e(k, j), -1),
                (_e(j, l), 1), (_e(l, j), 1),
            )
        )
    return out


def _disjoint_quadruples(m: int):
    # one representative per unordered pair of disjoint pairs
    seen = set()
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            for k in range(1, m + 1):
                for l in range(k + 1, m + 1):
                    if {i, j} & {k, l}:
                        continue
                    key = frozenset({frozenset({i, j}), frozenset({k, l})})
                    if key in seen:
                        continue
                    seen.add(key)
                    yield i, j, k, l


def _pair_com_squared(m: int) -> list[dict]:
    return [{ix: 1 for ix in _all_pairs(m)}]


def _all_pairs(m: int):
    return [(i, j) for i in range(1, m + 1) for j in range(1, m + 1)]


EIGENFAMILIES: dict[int, tuple[EigenFamily, ...]] = {
    1: (
        EigenFamily("center_of_mass", 1, 1, lambda m: NuScalar(1), lambda m: 1, _one_particle_com),
        EigenFamily("relative", 1, 2, lambda m: 1 + m * NU, lambda m: m - 1, _one_particle_rel),
    ),
    2: (
        EigenFamily("antisymmetric_null", 2, 2, lambda m: NuScalar(0), lambda m: m * (m - 1) // 2, _pair_null),
        EigenFamily("mode_with_com", 2, 2, lambda m: 2 * (1 + m * NU), lambda m: m, _pair_com),
        EigenFamily("relative_sym", 2, 3, lambda m: (1 + m * NU) * (2 + m * NU), lambda m: m - 1, _pair_rel_sym),
        EigenFamily("disjoint_pairs", 2, 4, lambda m: 2 * (1 + m * NU) * (1 + NU * (m - 1)), lambda m: m * (m - 3) // 2, _pair_disjoint),
        EigenFamily("com_squared", 2, 2, lambda m: NuScalar(2), lambda m: 1, _pair_com_squared),
    ),
}


def eigenfamilies(particles: int) -> tuple[EigenFamily, ...]:
    try:
        return EIGENFAMILIES[particles]
    except KeyError:
        raise ValueError(f"no closed-form families for {particles}-particle matrices")


@dataclass(frozen=True)
class FamilyCheck:
    family: str
    modes: int
    verified: bool
    vector_count: int
    failure: str | None = None


def verify_eigenfamily(f: EigenFamily, modes: int, g: GramMatrix | None = None) -> FamilyCheck:
    """Check A v = lambda v as an exact identity for every representative."""
    if modes < f.min_modes:
        raise ValueError(f"family {f.name} needs at least {f.min_modes} modes")
    if g is None:
        g = build_gram(AlgebraParams(modes, NU, Guards(max_modes=max(modes, 6))), f.particles)
    index = {ix: k for k, ix in enumerate(g.basis)}
    lam = f.eigenvalue(modes)
    vecs = f.vectors(modes)
    for v in vecs:
        coords = [NuScalar(0)] * g.dimension
        for ix, coef in v.items():
            coords[index[ix]] = NuScalar(coef)
        for r in range(g.dimension):
            lhs = NuScalar(0)
            for c in range(g.dimension):
                if not coords[c].is_zero():
                    lhs = lhs + g.entries[r][c] * coords[c]
            rhs = lam * coords[r]
            if lhs != rhs:
                return FamilyCheck(
                    f.name, modes, False, len(vecs),
                    f"row {g.basis[r]}: A.v = {lhs} but lambda*v = {rhs}",
                )
    return FamilyCheck(f.name, modes, True, len(vecs))


def family_spectrum(particles: int, modes: int, nu: Fraction) -> list[Fraction]:
    """Expected eigenvalue multiset from the closed-form families."""
    out: list[Fraction] = []
    for f in eigenfamilies(particles):
        if modes < f.min_modes:
            continue
        out.extend([f.eigenvalue(modes).evaluate(nu)] * f.degeneracy(modes))
    return sorted(out)


# --- critical point and scans -----------------------------------------------

@dataclass(frozen=True)
class CriticalCheck:
    particles: int
    expected_entry: Fraction
    entries_equal: bool
    rank: int
    eigenvalue: Fraction | None
    passed: bool
    first_deviation: str | None = None


def critical_check(modes: int, kmax: int, guards: Guards | None = None) -> list[CriticalCheck]:
    """At nu = -1/M every k-particle entry is k!/M^k, giving rank one.

    The surviving eigenvalue is computed exactly as entry * M^k; the
    numeric eigensolver is not involved.
    """
    guards = guards or Guards()
    nu = Fraction(-1, modes)
    p = AlgebraParams(modes, NuScalar.from_rat(nu), guards)
    out = []
    for k in range(1, kmax + 1):
        g = build_gram(p, k)
        expected = Fraction(factorial(k), modes**k)
        deviation = None
        for i, row in enumerate(g.entries):
            for j, e in enumerate(row):
                if e.evaluate(nu) != expected:
                    deviation = (
                        f"entry ({g.basis[i]},{g.basis[j]}) = {e.evaluate(nu)} != {expected}"
                    )
                    break
            if deviation:
                break
        rank = rank_exact(g)
        equal = deviation is None
        eig = expected * modes**k if equal and rank == 1 else None
        passed = equal and rank == 1 and eig == factorial(k)
        out.append(CriticalCheck(k, expected, equal, rank, eig, passed, deviation))
    return out


@dataclass(frozen=True)
class ScanPoint:
    nu: Fraction
    report: SpectrumReport | None
    error: str | None = None


def positivity_scan(
    modes: int,
    n: int,
    nu_grid: Sequence[Fraction],
    tol: float = JACOBI_TOL,
    basis_kind: str = "sequence",
    guards: Guards | None = None,
    threads: int | None = 1,
) -> list[ScanPoint]:
    """One spectrum report per grid point; per-point errors do not abort."""
    g = build_gram(AlgebraParams(modes, NU, guards or Guards()), n, basis_kind)

    def at_point(nu: Fraction) -> ScanPoint:
        try:
            exact = g.evaluate(nu)
        except PoleError as exc:
            return ScanPoint(nu, None, str(exc))
        try:
            eigs = jacobi_eigenvalues([[float(e) for e in row] for row in exact], tol)
        except NoConvergence as exc:
            return ScanPoint(nu, None, str(exc))
        rank = rational_rank(exact)
        thresh = zero_threshold(eigs)
        positive = eigs[0] >= -thresh and rank == g.multiset_dimension
        return ScanPoint(
            nu,
            SpectrumReport(nu, tuple(eigs), rank, g.dimension, g.multiset_dimension, positive),
        )

    return parallel_map(at_point, list(nu_grid), threads)


def default_grid(
    start: Fraction = Fraction(-3, 5), stop: Fraction = Fraction(1), step: Fraction = Fraction(1, 64)
) -> list[Fraction]:
    if step <= 0:
        raise ValueError("step must be positive")
    out = []
    nu = start
    while nu <= stop:
        out.append(nu)
        nu += step
    return out


# --- serialization ----------------------------------------------------------

def gram_to_json(g: GramMatrix) -> dict:
    from .scalar import scalar_to_json

    nu = g.params.nu
    return {
        "modes": g.params.modes,
        "particles": g.particles,
        "nu": "symbolic" if not nu.is_constant() else str(nu.as_rat()),
        "basis": {"kind": g.basis_kind, "index_strings": [list(ix) for ix in g.basis]},
        "entries": [[scalar_to_json(e) for e in row] for row in g.entries],
    }


def spectrum_to_json(r: SpectrumReport) -> dict:
    return {
        "nu": str(r.nu),
        "eigenvalues": list(r.eigenvalues),
        "rank": r.rank,
        "dimension": r.dimension,
        "multiset_dim": r.multiset_dimension,
        "positive": r.positivity,
    }
