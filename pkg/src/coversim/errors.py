"""Exception types shared across the simulation engine."""


class CoverageError(Exception):
    """Base class for every error raised by this package."""


class CoincidentAgents(CoverageError):
    """Two agent positions are closer than the minimum separation (1e-6 m)."""


class OutsideRegion(CoverageError):
    """A position that must lie inside the coverage region does not."""


class QuadratureNotConverged(CoverageError):
    """Subdivision budget was exhausted before successive refinements agreed."""


class MissingPartials(CoverageError):
    """A controller that needs moment time-derivatives was given none."""


class ParseError(CoverageError):
    """Scenario file is structurally unreadable."""


class ValidationError(CoverageError):
    """Scenario file parsed but violates an invariant; message names the key."""
