"""Exception types raised by the pipeline.

Each class carries an ``exit_code`` used by the command line front end:
2 for invalid input, 3 for genericity failures, 4 for precision problems.
"""


class DeformZetaError(Exception):
    exit_code = 1


class ValidationError(DeformZetaError):
    exit_code = 2


class NotIrreducible(ValidationError):
    pass


class NotPrime(ValidationError):
    pass


class NotAUnit(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class NotSmooth(ValidationError):
    pass


class NotInJacobianIdeal(DeformZetaError):
    pass


class GenericityFailure(DeformZetaError):
    exit_code = 3


class UnitDenominatorFailure(GenericityFailure):
    pass


class InvertibilityViolation(DeformZetaError):
    exit_code = 3


class PrecisionError(DeformZetaError):
    exit_code = 4


class TruncationInsufficient(PrecisionError):
    pass


class PrecisionExhausted(PrecisionError):
    pass


class PrecisionTooLow(PrecisionError):
    pass


class ChecksFailed(DeformZetaError):
    exit_code = 4


class Inconsistent(DeformZetaError):
    exit_code = 4
