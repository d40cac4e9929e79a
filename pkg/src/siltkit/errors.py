"""Exception hierarchy.  Every error carries a machine-readable ``code``."""


class SiltkitError(Exception):
    code = "error"
    exit_status = 4


class ValidationError(SiltkitError):
    code = "validation"
    exit_status = 2


class ParseError(ValidationError):
    code = "parse"


class InfiniteDimensional(ValidationError):
    code = "infinite_dimensional"


class BadRelation(ValidationError):
    code = "bad_relation"


class UnknownVertex(ValidationError):
    code = "unknown_vertex"


class AlgebraMismatch(ValidationError):
    code = "algebra_mismatch"


class DegreeNotOne(ValidationError):
    code = "degree_not_one"


class NotSubcat(ValidationError):
    code = "not_subcat"


class BudgetError(SiltkitError):
    exit_status = 3


class ResolutionCapExceeded(BudgetError):
    code = "resolution_cap_exceeded"


class InfiniteProjDim(BudgetError):
    code = "infinite_projdim"


class CapTooSmall(BudgetError):
    code = "cap_too_small"


class WindowExhausted(BudgetError):
    code = "window_exhausted"


class BudgetExceeded(BudgetError):
    code = "budget_exceeded"


class NotFound(BudgetError):
    code = "not_found"


class NoFiniteBound(BudgetError):
    code = "no_finite_bound"


class NoProjectives(ValidationError):
    code = "no_projectives"


class MembershipViolation(SiltkitError):
    code = "membership_violation"


class ApproximationFailure(SiltkitError):
    code = "approximation_failure"


class NotGood(ValidationError):
    """The approximation used by a mutation is not an inflation/deflation."""

    code = "not_good"

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class NoReferenceSilting(ValidationError):
    code = "no_reference_silting"


class ZeroExtension(ValidationError):
    code = "zero_extension"


class HypothesisFailed(ValidationError):
    code = "hypothesis_failed"


class NonTermination(SiltkitError):
    code = "non_termination"


class CertificateFailure(SiltkitError):
    code = "certificate_failure"
