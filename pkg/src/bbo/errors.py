"""Exception hierarchy shared across the toolkit."""


class BBOError(Exception):
    """Base class for all toolkit errors."""


class DomainError(BBOError, ValueError):
    """A parameter value lies outside its declared domain."""


class ShapeError(BBOError, ValueError):
    """Mismatched lengths or dimensionality."""


class DataError(BBOError, ValueError):
    """Non-finite or otherwise unusable numeric input."""


class NumericalError(BBOError, ArithmeticError):
    """A numerical routine failed (e.g. Cholesky after all jitter retries)."""


class StateError(BBOError, RuntimeError):
    """An operation was called in a state that cannot support it."""


class ConfigError(BBOError, ValueError):
    """Invalid configuration, search space definition or optimizer name."""


class ContractViolation(BBOError, RuntimeError):
    """An optimizer broke the suggest/observe contract."""


class ProtocolError(BBOError, RuntimeError):
    """A malformed message on the child-process line protocol."""


class AdapterTimeout(BBOError, TimeoutError):
    """The external optimizer did not answer within the remaining budget."""


class DegenerateBaselineError(BBOError, ValueError):
    """Random-search statistics cannot be used for normalization."""


class IncompleteGridError(BBOError, RuntimeError):
    """Some (optimizer, objective, repeat) cells are missing."""

    def __init__(self, gaps):
        self.gaps = list(gaps)
        preview = ", ".join("/".join(map(str, g)) for g in self.gaps[:5])
        more = "" if len(self.gaps) <= 5 else f" (+{len(self.gaps) - 5} more)"
        super().__init__(f"{len(self.gaps)} missing cells: {preview}{more}")


class BudgetViolation(BBOError, RuntimeError):
    """An iteration exceeded the suggest+observe time budget (strict mode)."""
