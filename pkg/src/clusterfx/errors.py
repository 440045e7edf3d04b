"""Exception types shared across the package."""


class ClusterfxError(Exception):
    """Base class for all package errors."""


class DataError(ClusterfxError, ValueError):
    """Input data cannot form a valid study design."""


class MalformedRow(DataError):
    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")


class EmptyCell(DataError):
    def __init__(self, group, period):
        self.group = group
        self.period = period
        super().__init__(f"cell (group={group}, period={period}) has no observations")


class DuplicateKey(DataError):
    def __init__(self, line, key):
        self.line = line
        self.key = key
        super().__init__(f"line {line}: duplicate group/cluster/period/visit {key}")


class NonContiguousGroups(DataError):
    pass


class DimensionMismatch(ClusterfxError, ValueError):
    pass


class BadDimension(ClusterfxError, ValueError):
    pass


class NotEstimable(ClusterfxError, ArithmeticError):
    """A covariance component has too few clusters for the (n - 1) divisor."""


class DegenerateVariance(ClusterfxError, ArithmeticError):
    """The estimated variance in the hypothesis space is zero."""


class BoundaryEffect(ClusterfxError, ArithmeticError):
    """A relative effect sits at 0 or 1, so the logit interval is undefined."""


class NotPSD(ClusterfxError, ValueError):
    pass


class BadConfig(ClusterfxError, ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
