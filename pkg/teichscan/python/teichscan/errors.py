class TeichscanError(Exception):
    """
    Base class for every error raised by teichscan.

    """


class ConstructionError(TeichscanError):
    """
    A builder or loader was asked for a surface that cannot exist.

    """


class StructuralError(TeichscanError):
    """
    A curve, arc or region refers to something the surface does not have.

    """


class PreconditionError(TeichscanError):
    """
    An operation was called on inputs outside its domain.

    """


class UnsupportedRepresentationError(TeichscanError):
    """
    A chain is anchored somewhere other than a vertex of the triangulation.

    """


class FlowRangeError(TeichscanError):
    """
    Flowing a surface would overflow its holonomies.

    """


class ConfigError(TeichscanError):
    """
    A run configuration or command line could not be validated.

    """


class SchemaError(TeichscanError):
    """
    An artifact carries an unknown or missing schema version.

    """


class NonConvergenceError(TeichscanError):
    """
    Tightening ran out of iterations.
    NOTE: The best chain found so far is kept on the error.

    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class BudgetError(TeichscanError):
    """
    An enumeration exceeded its developed-triangle budget.
    NOTE: Whatever was found before the budget ran out is kept on the error.

    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []
