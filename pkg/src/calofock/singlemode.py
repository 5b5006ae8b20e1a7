"""Single-mode deformed oscillator: structure function and coefficient series.

This is the algebra behind the two-body problem: one pair (a, a-dagger)
with a a-dagger = phi(N+1), a-dagger a = phi(N) and the built-in rule
phi(n) = n for even n, n + 2*nu for odd n.  A user-supplied phi table
covers the wider family with q = 1.

The four expansion series are obtained by solving the triangular linear
system "truncated expansion acts like the defining operator on the first
K excited states", not by transcribing printed closed recursions: the
defining actions are unambiguous, and the leading values they produce
can be cross-checked against the closed k=1 formulas.

Note on the ``aa-dagger`` expansion: its constant term is fixed to 1 by
the normalization convention, so the truncation reproduces phi(n+1) on
the states a-dagger^n |0> for n >= 1; on the vacuum the exact value is
phi(1) = 1 + 2*nu, which no expansion with constant term 1 can match.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import mpmath
from mpmath.libmp import from_rational, round_nearest

from .errors import ZeroPhi
from .scalar import NuScalar, _as_scalar

SERIES_KINDS = ("alpha", "beta", "gamma", "c")


@dataclass(frozen=True)
class SingleModeAlgebra:
    """Coupling plus structure function (built-in rule unless a table is given)."""

    nu: NuScalar
    phi_table: tuple[NuScalar, ...] | None = None

    def phi(self, n: int) -> NuScalar:
        if n < 0:
            raise ValueError(f"phi defined for n >= 0, got {n}")
        if self.phi_table is not None:
            if n >= len(self.phi_table):
                raise ValueError(f"phi table has no entry for n={n}")
            return self.phi_table[n]
        if n % 2 == 0:
            return NuScalar(n)
        return n + 2 * self.nu

    def structure_gap(self, n: int) -> NuScalar:
        """G(n) = phi(n+1) - phi(n), the commutator eigenvalue at level n."""
        return self.phi(n + 1) - self.phi(n)


def algebra(nu: Union[NuScalar, Fraction, int, str]) -> SingleModeAlgebra:
    if isinstance(nu, str):
        nu = NuScalar.nu() if nu == "symbolic" else NuScalar.from_rat(Fraction(nu))
    return SingleModeAlgebra(_as_scalar(nu))


@dataclass(frozen=True)
class CoefficientSeries:
    """Truncated expansion coefficients: exact for alpha/beta/gamma, floats for c."""

    kind: str
    values: tuple


def _phi_checked(alg: SingleModeAlgebra, kmax: int) -> list[NuScalar]:
    """phi(0..kmax), raising ZeroPhi at the first vanishing divisor phi(k), k >= 1."""
    phis = [alg.phi(k) for k in range(kmax + 1)]
    for k in range(1, kmax + 1):
        if phis[k].is_zero():
            raise ZeroPhi(k)
    return phis


def _falling(phis: Sequence[NuScalar], n: int, k: int) -> NuScalar:
    """phi(n) phi(n-1) ... phi(n-k+1): the k-fold lowering factor at level n."""
    out = NuScalar(1)
    for j in range(n, n - k, -1):
        out = out * phis[j]
    return out


def series(kind: str, terms: int, alg: SingleModeAlgebra, precision: int = 128) -> CoefficientSeries:
    """Solve the defining triangular system for the first ``terms`` coefficients.

    alpha: 1 + sum alpha_k adag^k a^k acts as phi(n+1) on level n (n >= 1)
    beta:  1 + sum beta_k  adag^k a^k acts as (-1)^n
    gamma:     sum gamma_k adag^k a^k acts as n
    c:     (sum c_k bdag^k b^k) b acts on Bose states as the square-root
           substitution rule; solved in binary floats of ``precision`` bits.
    """
    if kind not in SERIES_KINDS:
        raise ValueError(f"unknown series kind {kind!r}")
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if kind == "c":
        return _c_series(terms, alg, precision)
    phis = _phi_checked(alg, terms)
    values: list[NuScalar] = []
    for n in range(1, terms + 1):
        if kind == "alpha":
            target = phis[n + 1] if n + 1 <= terms else alg.phi(n + 1)
            rhs = target - 1
        elif kind == "beta":
            rhs = NuScalar(-2 if n % 2 else 0)
        else:
            rhs = NuScalar(n)
        for k in range(1, n):
            rhs = rhs - values[k - 1] * _falling(phis, n, k)
        values.append(rhs / _falling(phis, n, n))
    return CoefficientSeries(kind, tuple(values))


def series_action(kind: str, coeffs: Sequence[NuScalar], alg: SingleModeAlgebra, n: int) -> NuScalar:
    """Scalar by which the truncated expansion multiplies the level-n state."""
    phis = [alg.phi(k) for k in range(n + 1)]
    out = NuScalar(0 if kind == "gamma" else 1)
    for k in range(1, min(n, len(coeffs)) + 1):
        out = out + coeffs[k - 1] * _falling(phis, n, k)
    return out


def _bose_root(alg: SingleModeAlgebra, n: int) -> mpmath.mpf:
    """sqrt(phi(n)/n) at the working numeric coupling."""
    val = alg.phi(n).as_rat() / n
    if val < 0:
        raise ValueError(f"phi({n}) < 0 at nu={alg.nu}: no real Bose mapping")
    x = mpmath.mpf(from_rational(val.numerator, val.denominator, mpmath.mp.prec, round_nearest))
    return mpmath.sqrt(x)


def _c_series(terms: int, alg: SingleModeAlgebra, precision: int) -> CoefficientSeries:
    if not alg.nu.is_constant():
        raise ValueError("the c series needs a numeric coupling")
    _phi_checked(alg, terms)
    with mpmath.workprec(max(precision, 128)):
        values: list[mpmath.mpf] = []
        for n in range(1, terms + 1):
            # constraint at Bose level n:  sum_k c_k (n-1)!/(n-1-k)! = sqrt(phi(n)/n)
            rhs = _bose_root(alg, n)
            fall = mpmath.mpf(1)
            for k in range(0, n - 1):
                rhs -= values[k] * fall
                fall *= (n - 1) - k
            values.append(rhs / fall)
    return CoefficientSeries("c", tuple(values))


def c_series_action(coeffs: Sequence, n: int) -> mpmath.mpf:
    """Coefficient of level n-1 in (sum c_k bdag^k b^k) b applied to Bose level n."""
    out = mpmath.mpf(0)
    fall = mpmath.mpf(n)
    for k in range(0, n):
        if k >= len(coeffs):
            break
        out += coeffs[k] * fall
        fall *= (n - 1) - k
    return out


def bose_target(alg: SingleModeAlgebra, n: int) -> mpmath.mpf:
    """Exact matrix element sqrt(n phi(n)) the c expansion must reproduce."""
    return _bose_root(alg, n) * n


def single_gram(m: int, n: int, alg: SingleModeAlgebra) -> NuScalar:
    """<0| a^m adag^n |0> = delta_mn * phi(n) phi(n-1) ... phi(1)."""
    if m < 0 or n < 0:
        raise ValueError("levels must be >= 0")
    if m != n:
        return NuScalar(0)
    out = NuScalar(1)
    for j in range(1, n + 1):
        out = out * alg.phi(j)
    return out


def dual_action(n: int, alg: SingleModeAlgebra) -> int:
    """Lowering coefficient of the dual annihilator on level n (plain n)."""
    if n < 0:
        raise ValueError("level must be >= 0")
    _phi_checked(alg, n)
    return n
