"""Exception hierarchy shared across the toolkit."""


class AlleecoopError(Exception):
    """Base class for all toolkit-specific errors."""


class ConfigError(AlleecoopError):
    """Malformed run configuration (file or override)."""


class DomainError(AlleecoopError):
    """Evaluation requested outside a function's admissible domain."""


class PoleError(AlleecoopError):
    """Rational expression evaluated at (or too close to) its pole."""


class StepFailure(AlleecoopError):
    """Adaptive step size underflowed; the integration cannot continue."""


class GateError(AlleecoopError):
    """A precondition gate of a bifurcation locator failed."""


class BracketError(AlleecoopError):
    """Bracket endpoints do not straddle the sought sign/count change."""


class BranchLost(AlleecoopError):
    """Tracked equilibrium branch vanished or jumped during continuation."""


class NotSemisimple(AlleecoopError):
    """Zero eigenvalue is defective; eigenvector projections undefined."""


class NotSaddle(AlleecoopError):
    """Requested manifold origin is not a hyperbolic saddle."""


class NoCrossing(AlleecoopError):
    """Manifold never reached the target section.

    Carries ``reason`` (why integration stopped) and, when available,
    the partially grown ``branch``.
    """

    def __init__(self, message, reason="", branch=None):
        super().__init__(message)
        self.reason = reason
        self.branch = branch
