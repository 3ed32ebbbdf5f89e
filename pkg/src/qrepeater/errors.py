class QRepeaterError(Exception):
    pass


class ConfigurationError(QRepeaterError, ValueError):
    """Inputs violate a domain invariant (bad probability, nesting level, ...)."""


class NumericalError(QRepeaterError, ArithmeticError):
    """A solver or fit could not produce a result."""


class NoSolutionError(NumericalError):
    pass


class DegenerateDataError(NumericalError):
    pass


class InsufficientStatisticsError(QRepeaterError, ValueError):
    pass


class ChainInconsistencyError(QRepeaterError, ValueError):
    """Detection efficiencies cannot explain a measured retrieval efficiency."""


class SimulationTimeout(QRepeaterError, RuntimeError):
    pass
