from __future__ import annotations

from dftsafety.models.utilities import _classname


class SolverSettings(object):
    """
    Numeric configuration shared by state-space generation, the CTMC engine
    and the approximation.

    The defaults are accurate for reliability-scale rates (1e-9 to 1e-3 per
    hour) over lifetimes of up to 10^5 hours.
    """

    epsilon: float
    """Total Poisson truncation mass dropped by uniformization, split evenly left/right."""
    tolerance: float
    """Relative-change stop criterion of the iterative linear solver."""
    direct_threshold: int
    """Linear systems with at most this many unknowns are solved by sparse LU."""
    max_iterations: int
    """Iteration cap of the iterative linear solver."""
    state_cap: int
    """Maximal number of states explored before `StateSpaceLimitExceeded`."""
    uniformization_slack: float
    """The uniformization rate is this factor times the maximal exit rate."""
    degraded_label: str
    """Name of the label degradation measures read."""

    def __init__(
        self,
        epsilon: float = 1e-10,
        tolerance: float = 1e-12,
        direct_threshold: int = 20_000,
        max_iterations: int = 100_000,
        state_cap: int = 10_000_000,
        uniformization_slack: float = 1.02,
        degraded_label: str = "degraded",
    ):
        if not 0 < epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if uniformization_slack < 1:
            raise ValueError("uniformization_slack must be at least 1")
        self.epsilon = epsilon
        self.tolerance = tolerance
        self.direct_threshold = direct_threshold
        self.max_iterations = max_iterations
        self.state_cap = state_cap
        self.uniformization_slack = uniformization_slack
        self.degraded_label = degraded_label

    def __repr__(self) -> str:
        return (
            "{}(epsilon={}, tolerance={}, direct_threshold={}, max_iterations={}, "
            "state_cap={}, uniformization_slack={}, degraded_label={})"
        ).format(
            _classname(self),
            repr(self.epsilon),
            repr(self.tolerance),
            repr(self.direct_threshold),
            repr(self.max_iterations),
            repr(self.state_cap),
            repr(self.uniformization_slack),
            repr(self.degraded_label),
        )


DEFAULT_SETTINGS = SolverSettings()
