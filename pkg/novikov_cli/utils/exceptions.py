from abc import ABC


class NovikovCliBaseException(ABC, Exception):
    """
    Base novikov-cli exception. `code` is the process exit code
    """
    code: int


class NovikovCliValidationException(NovikovCliBaseException):
    """
    Incoming parameters are invalid: wrong ranges, non-coprime pairs,
    mutually exclusive options
    """
    code = 1


class AngleIsMagicError(NovikovCliValidationException):
    """
    The angle coincides with a commensurate angle, so there is nothing to
    approximate
    """
    code = 1


class CommensurateCollisionError(NovikovCliValidationException):
    """
    Two lattices expected to be incommensurate have an exact common vector
    """
    code = 1


class NotPeriodicError(NovikovCliValidationException):
    """
    The potential is not invariant under the vectors claimed to be its periods
    """
    code = 1


class NotSymmetricError(NovikovCliValidationException):
    """
    The potential has no rotational symmetry about the origin
    """
    code = 1


class NovikovCliVerificationFailedException(NovikovCliBaseException):
    """
    A verified inequality does not hold on the measured data
    """
    code = 2


class BracketsDoNotOverlapError(NovikovCliVerificationFailedException):
    """
    Two consecutive critical level brackets are disjoint
    """
    code = 2


class NovikovCliNonConvergenceException(NovikovCliBaseException):
    """
    A numerical procedure did not settle. Usually the grid is too coarse
    """
    code = 3


class NonMonotoneClassificationError(NovikovCliNonConvergenceException):
    code = 3


class IntervalNotDegenerateError(NovikovCliNonConvergenceException):
    code = 3


EXIT_CODE_EXCEPTION_MAPPING = {
    1: NovikovCliValidationException,
    2: NovikovCliVerificationFailedException,
    3: NovikovCliNonConvergenceException,
}
