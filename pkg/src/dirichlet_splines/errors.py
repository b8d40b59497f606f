"""Exception hierarchy shared by all modules."""


class SplineError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(SplineError, ValueError):
    pass


class DomainError(SplineError, ValueError):
    pass


class PoleError(DomainError):
    """The value is infinite (e.g. a Dirichlet density on a face with b_i < 1)."""


class ParameterError(SplineError, ValueError):
    pass


class DegenerateGeometryError(SplineError, ValueError):
    pass


class SingularConfigurationError(SplineError, ValueError):
    pass


class ResourceError(SplineError, RuntimeError):
    pass


class StrategyUnavailableError(SplineError, ValueError):
    """A requested evaluation strategy cannot be used for these inputs."""

    def __init__(self, strategy, condition):
        self.strategy = strategy
        self.condition = condition
        super().__init__(f"strategy {strategy!r} unavailable: {condition}")


class AccuracyError(SplineError, RuntimeError):
    """Quadrature did not reach the requested accuracy; carries the best estimate."""

    def __init__(self, message, estimate, error):
        self.estimate = estimate
        self.error = error
        super().__init__(f"{message} (best estimate {estimate!r}, error ~{error:.3g})")


class NonConvergenceError(SplineError, RuntimeError):
    """A power series failed to converge; carries the partial sum."""

    def __init__(self, message, partial_sum, order):
        self.partial_sum = partial_sum
        self.order = order
        super().__init__(f"{message} (partial sum {partial_sum!r} at order {order})")
