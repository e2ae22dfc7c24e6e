"""Exception hierarchy shared by all modules."""


class PetzError(Exception):
    """Base class for every error raised by this package."""


class NonSquareError(PetzError, ValueError):
    pass


class NotHermitianError(PetzError, ValueError):
    pass


class NotPSDError(PetzError, ValueError):
    pass


class ConvergenceError(PetzError, RuntimeError):
    pass


class NotIsometryError(PetzError, ValueError):
    pass


class DimensionMismatchError(PetzError, ValueError):
    pass


class NotStateError(PetzError, ValueError):
    pass


class ParamOutOfRangeError(PetzError, ValueError):
    pass


class NotNormalizedError(PetzError, ValueError):
    pass


class RadiusOutOfRangeError(PetzError, ValueError):
    pass


class ReferenceOutOfBallError(PetzError, ValueError):
    pass


class RankUnsupportedError(PetzError, ValueError):
    pass


class RankMismatchError(PetzError, ValueError):
    pass


class NotUnitaryError(PetzError, ValueError):
    pass


class BudgetExceededError(PetzError, RuntimeError):
    pass


class UnsupportedGateError(PetzError, ValueError):
    pass


class IndexOutOfRangeError(PetzError, IndexError):
    pass


class ZeroDetuningError(PetzError, ValueError):
    pass


class NegativeDeltaError(PetzError, ValueError):
    pass


class CutoffTooSmallError(PetzError, ValueError):
    pass


class ConfigError(PetzError, ValueError):
    pass
