"""Semantic exception hierarchy.

Every public function raises one of these instead of a bare ValueError so
callers (and the CLI exit-code mapping) can dispatch on the failure kind.
"""


class SecompError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# source model
# ---------------------------------------------------------------------------

class NegativeMass(SecompError):
    """A pmf entry is negative."""


class MassSumOutOfTolerance(SecompError):
    """The pmf does not sum to 1 within the admissible tolerance (1e-9)."""


class ShapeMismatch(SecompError):
    """Array lengths or terminal counts are inconsistent with the model."""


class DeltaOutOfRange(SecompError):
    """Binary-source crossover probability outside the open interval (0, 1/2)."""


class ArgumentOutOfRange(SecompError):
    """A scalar argument violates its stated domain."""


class IndexOutOfRange(SecompError):
    """A terminal or function index referenced by an expression does not exist."""


class InvalidSpec(SecompError):
    """A function specification violates the invariants of its declared case."""


# ---------------------------------------------------------------------------
# rate region
# ---------------------------------------------------------------------------

class WrongCaseTag(SecompError):
    """A constraint builder was called with a spec of a different case."""


class RecoverySetContainsSelf(SecompError):
    """A terminal's recovery set includes the terminal itself."""


class WrongShape(SecompError):
    """A closed form was requested for a spec outside its domain of validity."""


class WrongArity(SecompError):
    """An operation restricted to two terminals received a different count."""


class NumericalFailure(SecompError):
    """The LP solver failed or its duality certificate could not be verified."""


# ---------------------------------------------------------------------------
# protocol simulation
# ---------------------------------------------------------------------------

class EnumerationCapExceeded(SecompError):
    """The joint sequence space is too large for exact enumeration."""


class RateVectorInfeasible(SecompError):
    """A supplied rate vector is malformed (negative or missing entries)."""


class NoConsistentSequence(SecompError):
    """A decoder found no candidate; impossible for total codes (harness bug)."""


# ---------------------------------------------------------------------------
# coloring lab
# ---------------------------------------------------------------------------

class SvarOutOfMonotoneRange(SecompError):
    """The balance statistic is outside the range where x*log(r/x) increases."""


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

class ParseError(SecompError):
    """A model file could not be parsed; the message names the offending field."""
