"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or inconsistent."""


class ScenarioError(RuntimeError):
    """Scenario construction failed (placement constraints unsatisfiable)."""


class StuckError(RuntimeError):
    """The planner found no feasible cell to move to."""
