"""Exception hierarchy shared by all modules."""


class IpdftError(Exception):
    """Base class for every error raised by this package."""


class InvalidOrderError(IpdftError, ValueError):
    pass


class ShapeError(IpdftError, ValueError):
    pass


class NoSignalError(IpdftError):
    pass


class EstimationError(IpdftError):
    """The frequency search found no consistent solution in its bracket."""


class DegenerateSystemError(EstimationError):
    pass


class SingularityError(EstimationError):
    pass


class AliasingError(IpdftError, ValueError):
    pass


class DesignError(IpdftError):
    pass


class InsufficientDataError(IpdftError, ValueError):
    pass


class CorruptFileError(IpdftError):
    pass


class ConfigError(IpdftError, ValueError):
    pass
