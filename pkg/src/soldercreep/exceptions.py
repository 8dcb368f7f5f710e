"""Exception hierarchy shared by all soldercreep modules."""


class SolderCreepError(Exception):
    """Base class for every error raised by this package."""


class InputValidationError(SolderCreepError, ValueError):
    pass


# profile generation
class DegenerateStep(InputValidationError):
    pass


class NonPositiveGradient(InputValidationError):
    pass


class RejectionOverflow(SolderCreepError, RuntimeError):
    pass


class OutOfDwell(InputValidationError):
    pass


class EmptyInput(InputValidationError):
    pass


# creep oracle
class StepTooLarge(SolderCreepError, ArithmeticError):
    pass


class LengthMismatch(InputValidationError):
    pass


# datasets
class NonPositiveIncrement(InputValidationError):
    pass


class WindowTooLong(InputValidationError):
    pass


class EmptyResult(InputValidationError):
    pass


# networks
class ShapeMismatch(InputValidationError):
    pass


class ZeroTrueValue(InputValidationError):
    pass


class Diverged(SolderCreepError, ArithmeticError):
    pass


class ConstantTruth(InputValidationError):
    pass


class MissingStandardizer(InputValidationError):
    pass


class ZeroTrueAccumulation(InputValidationError):
    pass


class ConfigError(InputValidationError):
    pass
