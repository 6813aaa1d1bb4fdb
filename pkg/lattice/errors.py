"""
errors.py

Exception hierarchy shared by every package of the solver.

All domain errors derive from BdsgError so entry points can catch
one type and turn it into a clean non-zero exit.
"""


class BdsgError(Exception):
    """Base class for all solver errors."""


class NonIntegerCellCount(BdsgError):
    """1/epsilon is not an integer, so [0, 2pi] does not hold whole cells."""


class InvalidResolution(BdsgError):
    """Points per cell must be an even integer >= 4."""


class EigensolveFailure(BdsgError):
    """A symmetric/Hermitian eigensolver did not converge."""


class NonRealEnergy(BdsgError):
    """The discrete energy functional has a non-negligible imaginary part."""


class GridMismatch(BdsgError):
    """Two objects that must live on the same grid do not."""


class InvalidTimeStep(BdsgError):
    """Final time is not an integer multiple of the time step."""


class ScenarioError(BdsgError):
    """A scenario document is malformed."""


class CacheFormatError(BdsgError):
    """A binary array file is truncated or its header is malformed."""


class ConfigError(BdsgError):
    """The defaults file is missing or incomplete."""
