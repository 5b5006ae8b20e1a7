"""Exception types shared across the package."""

from __future__ import annotations


class CalofockError(Exception):
    """Base class for all package-specific errors."""


class DivideByZero(CalofockError):
    """Division by the zero scalar."""


class PoleError(CalofockError):
    """A rational function was evaluated at a root of its denominator."""

    def __init__(self, denominator, at):
        self.denominator = denominator
        self.at = at
        super().__init__(f"pole at nu={at}: denominator {denominator} vanishes")


class BasisTooLarge(CalofockError):
    """A requested basis exceeds the configured size guard."""

    def __init__(self, size, guard):
        self.size = size
        self.guard = guard
        super().__init__(f"basis size {size} exceeds guard {guard}")


class InvalidModePair(CalofockError):
    """An exchange was requested with equal mode indices."""


class ZeroPhi(CalofockError):
    """A structure-function value needed as a divisor vanishes."""

    def __init__(self, k):
        self.k = k
        super().__init__(f"phi({k}) = 0: series coefficient undefined")


class NoConvergence(CalofockError):
    """The iterative eigensolver exhausted its sweep budget."""


class ZeroPivot(CalofockError):
    """An elimination pivot vanished at the working coupling value."""

    def __init__(self, detail=""):
        super().__init__(f"zero pivot during elimination{': ' + detail if detail else ''}")


class FitInconsistent(CalofockError):
    """A fit system admits no solution (indicates an internal bug)."""


class UnknownRelation(CalofockError):
    """An unrecognized relation id was passed to the verifier."""

    def __init__(self, rel_id, known):
        self.rel_id = rel_id
        super().__init__(f"unknown relation {rel_id!r}; known: {', '.join(sorted(known))}")
