"""Privacy parameters and the derived Gaussian noise multiplier."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PrivacyParams:
    """(epsilon, delta) pair with the derived multiplier P = 2 ln(2/delta)/eps^2.

    P converts the unit-noise total error of a strategy into its
    (epsilon, delta)-private total error; the calibrated noise scale for a
    strategy with L2 sensitivity D is sigma = D * sqrt(P).
    """

    epsilon: float
    delta: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def p_factor(self) -> float:
        return 2.0 * math.log(2.0 / self.delta) / self.epsilon ** 2

    @property
    def sigma_factor(self) -> float:
        """Noise scale per unit of L2 sensitivity."""
        return math.sqrt(self.p_factor)


def p_factor_of(params) -> float:
    """P(epsilon, delta) for a PrivacyParams, or 1.0 for None (unit noise)."""
    return 1.0 if params is None else params.p_factor
