"""Exception types shared across the package."""


class ContractSchedError(Exception):
    """Base class for all package errors."""


class InvalidScheduleError(ContractSchedError, ValueError):
    """A schedule violates positivity or strict monotonicity."""


class DomainError(ContractSchedError, ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(ContractSchedError, ValueError):
    """An input does not satisfy the precondition of a check."""


class UnsupportedRegimeError(ContractSchedError, ValueError):
    """Parameters fall in a regime where no guarantee is available (e.g. H > k/2)."""


class ProtocolError(ContractSchedError, RuntimeError):
    """A query channel was used outside its protocol (e.g. asked too many queries)."""


class InconsistentAnswersError(ProtocolError):
    """No candidate is consistent with the answers under the lie budget."""


class ConfigError(ContractSchedError, ValueError):
    """A simulation or CLI configuration is invalid."""
