"""Exception types shared across the package."""


class MbssError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(MbssError):
    """A file (log, vocabulary, CSV, model) could not be parsed as documented."""


class SingularCovarianceError(MbssError):
    """A covariance estimate stayed non positive-definite after regularization."""
