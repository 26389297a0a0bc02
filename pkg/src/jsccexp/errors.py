"""Exception hierarchy shared by all modules."""


class JSCCError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(JSCCError, ValueError):
    pass


class NegativeEntry(ValidationError):
    pass


class NotNormalizable(ValidationError):
    pass


class SumOutOfTolerance(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class GammaNonpositive(ValidationError):
    pass


class DegeneratePair(JSCCError, ValueError):
    """Two hull support points coincide; no partition should be built."""


class NoConvergence(JSCCError, RuntimeError):
    pass


class OptimizerDisagreement(NoConvergence):
    """Restarts of a concave maximization ended at different values."""


class EnumerationCapExceeded(JSCCError, RuntimeError):
    def __init__(self, count, cap, what="enumeration"):
        self.count = count
        self.cap = cap
        size = str(count) if count < 10**15 else f"~1e{len(str(int(count))) - 1}"
        super().__init__(f"{what} {size} exceeds cap {cap}")


class DegenerateSeries(JSCCError, ValueError):
    pass


class ConfigError(JSCCError, ValueError):
    pass


class ConfigParse(ConfigError):
    pass


class ConfigInvalid(ConfigError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
