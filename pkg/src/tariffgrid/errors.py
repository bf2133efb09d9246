"""Exception types shared across the package."""


class TariffGridError(Exception):
    """Base class for all package-specific errors."""


class SeriesError(TariffGridError):
    """Invalid or misaligned per-timestep data."""


class TariffError(TariffGridError):
    """Malformed tariff definition."""


class ModelError(TariffGridError):
    """Optimization problem cannot be built as specified."""


class InfeasibleProblemError(TariffGridError):
    """A building optimization has no feasible solution."""


class CorruptSolutionError(TariffGridError):
    """Solver output violates model invariants beyond tolerance."""


class NetworkError(TariffGridError):
    """Invalid network document or topology."""


class PowerFlowError(TariffGridError):
    """Power-flow convergence failure above the accepted threshold."""


class ScenarioError(TariffGridError):
    """Invalid scenario configuration or run inputs."""
