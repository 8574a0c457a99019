"""Exception types raised by ggexp."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureEvaluationError(ArithmeticError):
    """The integrand produced a non-finite value at a quadrature node."""

    def __init__(self, node, value, message=None):
        super().__init__(message or f"integrand is not finite at node {node!r} (value {value!r})")
        self.node = node
        self.value = value


class ConvergenceError(ArithmeticError):
    """Successive quadrature refinements failed to agree within tolerance."""

    def __init__(self, previous, last, points, message=None):
        msg = message or (
            f"no convergence by {points} points: last two values {previous!r}, {last!r}"
        )
        super().__init__(msg)
        self.previous = previous
        self.last = last
        self.points = points
