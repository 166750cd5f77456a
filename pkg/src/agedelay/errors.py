"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter is outside its admissible domain."""


class StabilityError(ValueError):
    """A single-server configuration is unstable (arrival rate >= service rate)."""


class DegenerateSampleError(ValueError):
    """Too few observations to compute the requested statistic."""
