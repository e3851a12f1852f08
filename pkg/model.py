"""Physical parameters of the chandelier Ising model and their Boltzmann weights.

The Boltzmann constant is fixed to 1, so couplings and temperature share
units and only the ratios J/T, Jp/T, Jsl/T enter any downstream equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from errors import ParameterDomainError

PARAM_KEYS = ("J", "Jp", "Jsl", "T")


@dataclass(frozen=True)
class CouplingParams:
    """Couplings (NN, prolonged NNN, same-level NN) and temperature."""

    J: float
    Jp: float
    Jsl: float
    T: float

    def __post_init__(self):
        for name in PARAM_KEYS:
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ParameterDomainError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterDomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.T <= 0:
            raise ParameterDomainError(f"T must be positive, got {self.T}")

    @classmethod
    def from_mapping(cls, data):
        """Build params from a JSON-style mapping with keys J, Jp, Jsl, T."""
        missing = [key for key in PARAM_KEYS if key not in data]
        if missing:
            raise ParameterDomainError(f"Missing parameter(s): {', '.join(missing)}")
        return cls(*(data[key] for key in PARAM_KEYS))

    def to_dict(self):
        return {key: getattr(self, key) for key in PARAM_KEYS}

    def reduced_couplings(self):
        """Return (J/T, Jp/T, Jsl/T), the only combinations the model depends on."""
        return self.J / self.T, self.Jp / self.T, self.Jsl / self.T

    @property
    def beta(self):
        return 1.0 / self.T


@dataclass(frozen=True)
class BoltzmannWeights:
    """a = exp(J/T), b = exp(Jp/T), c = exp(Jsl/T) and beta = 1/T."""

    a: float
    b: float
    c: float
    beta: float

    @property
    def log_a(self):
        return math.log(self.a)

    @property
    def log_b(self):
        return math.log(self.b)

    @property
    def log_c(self):
        return math.log(self.c)


def weights(params: CouplingParams) -> BoltzmannWeights:
    """Convert couplings and temperature into Boltzmann weights.

    Args:
        params: validated coupling parameters.

    Returns:
        BoltzmannWeights with a, b, c strictly positive.

    Raises:
        ParameterDomainError: if any weight overflows a float.
    """
    if not isinstance(params, CouplingParams):
        raise ParameterDomainError(f"Expected CouplingParams, got {type(params).__name__}")
    reduced = params.reduced_couplings()
    try:
        a, b, c = (math.exp(k) for k in reduced)
    except OverflowError:
        raise ParameterDomainError(
            f"Boltzmann weights overflow for couplings/T = {reduced}; raise T"
        )
    if min(a, b, c) <= 0.0:
        raise ParameterDomainError(f"Boltzmann weights underflow for couplings/T = {reduced}; raise T")
    return BoltzmannWeights(a=a, b=b, c=c, beta=params.beta)
