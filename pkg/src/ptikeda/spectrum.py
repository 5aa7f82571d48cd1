"""Spectrum of the linear (beta = eta = 0) transfer matrix and its exceptional point."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

# |cosh^2(gamma) - 2| below this counts as sitting on the exceptional point
EP_BAND = 1e-12


class Regime(str, enum.Enum):
    BELOW_EP = "below_ep"
    AT_EP = "at_ep"
    ABOVE_EP = "above_ep"


@dataclass(frozen=True)
class SpectralResult:
    gamma: float
    lambda1: complex
    lambda2: complex
    regime: Regime

    @property
    def spectral_radius(self) -> float:
        return max(abs(self.lambda1), abs(self.lambda2))


def transfer_matrix(gamma: float) -> np.ndarray:
    lo, hi = math.exp(-gamma), math.exp(gamma)
    return 0.5 * np.array([[lo, 1j * lo], [1j * hi, hi]])


def eigenvalues(gamma: float) -> SpectralResult:
    """Closed-form eigenvalue pair; ``lambda1`` takes the ``+sqrt`` branch."""
    ch = math.cosh(gamma)
    disc = ch * ch - 2.0
    root = cmath.sqrt(disc)
    if abs(disc) <= EP_BAND:
        regime = Regime.AT_EP
    elif disc < 0:
        regime = Regime.BELOW_EP
    else:
        regime = Regime.ABOVE_EP
    return SpectralResult(gamma, (ch + root) / 2, (ch - root) / 2, regime)


def exceptional_point() -> float:
    """``acosh(sqrt 2) = ln(1 + sqrt 2) ~ 0.8813736``."""
    return math.acosh(math.sqrt(2.0))


def linear_instability_threshold() -> float:
    """Gain/loss value where the linear map's spectral radius reaches 1."""
    return math.acosh(1.5)


def eigenspectrum_sweep(gamma_min: float, gamma_max: float, n: int) -> list[SpectralResult]:
    if not gamma_min < gamma_max:
        raise ValueError(f"empty or inverted range [{gamma_min}, {gamma_max}]")
    if n < 2:
        raise ValueError("need at least 2 samples")
    return [eigenvalues(float(g)) for g in np.linspace(gamma_min, gamma_max, n)]
