"""Exception types raised by the heat-channel routines.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch that.
"""


class HeatChannelError(ValueError):
    """Base class for all library errors."""


class DomainError(HeatChannelError):
    """Argument outside the mathematical domain of a function."""


class AdmissibilityError(DomainError):
    """Channel parameters violate alpha * beta > 1."""


class OrderRangeError(HeatChannelError):
    """Requested order or subchannel count exceeds the supported range."""


class ResolutionError(HeatChannelError):
    """Sampling grid too short or too coarse for a waveform computation."""


class ContractError(HeatChannelError):
    """Inputs break an operation's preconditions, e.g. the trace-theorem hypotheses."""
