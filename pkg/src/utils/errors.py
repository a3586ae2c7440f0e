"""
Error types shared by all wignerspikes modules.

Every error carries a stable ``code`` string so reports, logs and tests can
refer to the failure kind without matching on message text.
"""

from typing import Optional


class WignerSpikesError(ValueError):
    """Base error for invalid inputs and unsatisfied preconditions.

    Args:
        code: Stable error identifier such as ``invalid-dimension``
        message: Human readable description
    """

    default_code = "error"

    def __init__(self, code: Optional[str] = None, message: str = ""):
        self.code = code or self.default_code
        self.message = message or self.code
        super().__init__(f"[{self.code}] {self.message}")


class ConfigError(WignerSpikesError):
    """Invalid configuration file, unknown key or badly typed override"""

    default_code = "invalid-config"

    def __init__(self, message: str, code: Optional[str] = None):
        super().__init__(code, message)


class NearSingularShiftError(WignerSpikesError):
    """Resolvent evaluated too close to an eigenvalue"""

    default_code = "near-singular-shift"

    def __init__(self, message: str):
        super().__init__(self.default_code, message)


class BelowPhaseTransitionError(WignerSpikesError):
    """Spike too weak to produce an outlier (|theta| <= sigma)"""

    default_code = "below-phase-transition"

    def __init__(self, theta: float, sigma: float):
        self.theta = theta
        self.sigma = sigma
        super().__init__(
            self.default_code,
            f"|theta|={abs(theta)} does not exceed sigma={sigma}",
        )
