"""Exception hierarchy for skembed.

Everything raised on purpose derives from :class:`SkembedError` so callers can
catch the library in one clause.  Numerical *classifications* (finite vs
diverging) are return values, never exceptions; exceptions are reserved for
contract violations and for inputs the construction genuinely cannot handle.
"""


class SkembedError(Exception):
    """Base class for all library errors."""


class DomainError(SkembedError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class SpecValidationError(SkembedError):
    """A quantile spec failed validation and cannot be used downstream."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class TableFormatError(SkembedError, ValueError):
    """A quantile table file or array violates the `u,q` contract."""


class NonIntegrableError(SkembedError):
    """|phi| quadrature diverges under grid refinement; no L1 boundary data.

    Carries the refinement trace so reports can show the evidence.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


class ConvergenceError(SkembedError):
    """A principal-value evaluation did not settle under the eta schedule."""

    def __init__(self, message, oscillation=None, trace=()):
        super().__init__(message)
        self.oscillation = oscillation
        self.trace = tuple(trace)


class NonSimpleCurveError(SkembedError):
    """The boundary polyline self-intersects; domain operations refuse it."""

    def __init__(self, message, crossing=None):
        super().__init__(message)
        self.crossing = crossing


class OutsideDomainError(SkembedError, ValueError):
    """A query point that must lie inside the domain does not."""


class StepBudgetError(SkembedError):
    """A path simulation exhausted its step budget.

    ``partial`` holds whatever samples completed before the budget ran out.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class MissingArtifactError(SkembedError):
    """A pipeline stage needs files a previous stage has not produced."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)
