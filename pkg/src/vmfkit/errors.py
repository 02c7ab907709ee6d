"""Exception types shared across the toolkit.

Invalid arguments raise plain ``ValueError``; the classes below signal
numerical conditions that a caller may want to catch and handle (retry,
reseed, report), and they carry whatever partial state is useful for that.
"""


class VmfkitError(Exception):
    """Base class for all toolkit-specific errors."""


class NumericalError(VmfkitError):
    """A computation failed for numerical reasons rather than bad input."""


class BesselConvergenceError(NumericalError):
    """The Bessel series did not converge within the term budget."""

    def __init__(self, message: str, partial_estimate: float):
        super().__init__(message)
        self.partial_estimate = partial_estimate


class ConcentrationOverflowError(NumericalError):
    """Resultant length at or beyond 1: the data is fully concentrated."""


class DegenerateDataError(NumericalError):
    """The sample mean vanishes, so no mean direction is identifiable."""


class SamplingBudgetError(NumericalError):
    """Rejection sampling exhausted its proposal budget."""

    def __init__(self, message: str, acceptance_rate: float):
        super().__init__(message)
        self.acceptance_rate = acceptance_rate


class DivergenceError(NumericalError):
    """Stochastic optimization produced a non-finite loss."""

    def __init__(self, message: str, epoch: int, lr: float):
        super().__init__(message)
        self.epoch = epoch
        self.lr = lr


class ComponentCollapseError(NumericalError):
    """One or more mixture components lost essentially all posterior mass."""

    def __init__(self, message: str, components: tuple[int, ...]):
        super().__init__(message)
        self.components = components
