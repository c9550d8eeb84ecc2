"""Exception hierarchy shared by all sicmub modules."""


class SicMubError(Exception):
    """Base class. The CLI maps every subclass to exit status 2."""


class ValidationError(SicMubError, ValueError):
    pass


# finite fields
class NonPrimeP(ValidationError):
    pass


class ReducibleModulus(ValidationError):
    pass


class SizeTooLarge(ValidationError):
    pass


class MixedFields(ValidationError):
    pass


class InverseOfZero(ValidationError, ZeroDivisionError):
    pass


# phase space
class IncompleteDomain(ValidationError):
    pass


# combinatorics
class NotOneOverlapWithCartesian(ValidationError):
    pass


class NonOrthogonalSquares(ValidationError):
    pass


class IncompleteFamily(ValidationError):
    pass


class NotALatinSquare(ValidationError):
    pass


class NotAPartition(ValidationError):
    pass


# operators
class DimMismatch(ValidationError):
    pass


class NotASic(ValidationError):
    pass


class NotCommuting(ValidationError):
    pass


# bridge
class BadPartition(ValidationError):
    pass


class NotDoublyStochastic(ValidationError):
    pass


class NotCommutative(NotCommuting):
    pass


class RowsNotOnSphere(ValidationError):
    pass


class WrongFamilySize(ValidationError):
    pass


class IdentityViolation(ValidationError):
    pass


# covariant
class CharacteristicTwo(ValidationError):
    pass


class NotAState(ValidationError):
    pass


class NoConvergence(SicMubError):
    pass


# cli / io
class SchemaViolation(ValidationError):
    pass


class UnknownCommand(ValidationError):
    pass
