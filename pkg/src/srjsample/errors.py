"""Exception hierarchy shared by all modules."""


class SRJError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(SRJError, ValueError):
    pass


class EmptyInputError(SRJError, ValueError):
    pass


class EmptyDistributionError(SRJError, ValueError):
    """All weights handed to an alias table are zero."""


class EmptyJoinError(SRJError):
    """The join has no result pairs, so there is nothing to sample."""


class AttemptLimitError(SRJError, RuntimeError):
    """Too many consecutive rejections; the join is probably empty."""


class TooLargeError(SRJError, ValueError):
    """A brute-force computation exceeds its size guard."""


class CorrectnessViolation(SRJError, AssertionError):
    """A sampler produced a pair that is not in the join."""


class CSVFormatError(SRJError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
