"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Graph and block assignment (or statistic and block sizes) disagree in size."""


class EmptyBlockError(ValueError):
    """A model-fitting operation was given an assignment with an empty block."""


class UndefinedParameterError(ValueError):
    """A parameter was requested that the data cannot determine (e.g. q_ii for a singleton block)."""


class NonexistenceError(ArithmeticError):
    """The maximum likelihood estimate does not exist for the observed statistic.

    ``verdict`` carries the polytope membership verdict when one is available.
    """

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class InapplicableMoveError(ValueError):
    """A move adds a dyad that is present or removes one that is absent."""
