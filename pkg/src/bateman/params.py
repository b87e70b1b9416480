from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import OverdampedError


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the oscillator.

    ``omega`` is derived as sqrt(kappa - gamma**2); only the underdamped
    regime kappa > gamma**2 is accepted.
    """

    hbar: float = 1.0
    gamma: float = 0.5
    kappa: float = 1.25
    omega: float = field(init=False)

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.kappa > self.gamma ** 2:
            raise OverdampedError(
                f"overdamped parameters rejected: kappa={self.kappa} <= gamma**2={self.gamma ** 2}"
            )
        object.__setattr__(self, "omega", math.sqrt(self.kappa - self.gamma ** 2))

    @classmethod
    def from_omega(cls, hbar: float = 1.0, gamma: float = 0.5, omega: float = 1.0) -> "SystemParams":
        return cls(hbar=hbar, gamma=gamma, kappa=omega * omega + gamma * gamma)


DEFAULT_PARAMS = SystemParams()
