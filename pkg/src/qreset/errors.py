"""Exception types for failure modes callers are expected to handle.

Plain ``ValueError`` is reserved for contract violations (bad sizes,
out-of-range indices, malformed arguments).  The classes below mark
conditions that arise from the physics or the numerics of an otherwise
well-posed request, so that batch drivers can catch them selectively.
"""


class QresetError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QresetError):
    """A run configuration is malformed, incomplete, or inconsistent."""


class BoundaryContaminationError(QresetError):
    """Requested horizon lets the ballistic front reach the chain edge.

    Bulk results are unreliable past this point; callers that want the
    reflected dynamics anyway can disable the guard explicitly.
    """


class NeverDetectedError(QresetError):
    """No detection probability accumulates within the restart window."""


class InstantAbsorptionError(QresetError):
    """Survival underflowed to zero; the decay exponent is unbounded."""


class ExpmScalingError(QresetError):
    """Matrix norm too large for scaling-and-squaring within the cap."""
