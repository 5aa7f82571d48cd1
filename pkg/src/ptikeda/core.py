"""Forward map of the two-loop Ikeda cavity with balanced gain and loss.

Each call to :func:`step` advances the loop fields ``(E1, E4)`` by one cavity
round trip. ``E1`` circulates in the attenuated loop, ``E4`` in the amplified
one; the coupler fields ``E2``/``E3`` are derived from them on the fly.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)

# magnitudes above this are treated as overflow before anything gets squared
OVERFLOW_LIMIT = 1e150


class DivergenceError(FloatingPointError):
    """Raised when a map iterate leaves the finite range."""


@dataclass(frozen=True)
class MapParams:
    """Scalar knobs of the map.

    The defaults are the values used for the bifurcation, basin and
    extreme-event studies: ``beta=1``, ``eta=1e-3``, drives of 0.65.
    """

    gamma: float = 0.8
    beta: float = 1.0
    eta: float = 1e-3
    e_in: complex = 0.65
    e_in_prime: complex = 0.65
    phi_l: float = 0.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.eta >= 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")

    def with_(self, **changes) -> "MapParams":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return MapParams(**fields)


@dataclass(frozen=True)
class FieldState:
    e1: complex = 0j
    e4: complex = 0j

    def to_real(self) -> np.ndarray:
        """``(Re E1, Im E1, Re E4, Im E4)``."""
        return np.array([self.e1.real, self.e1.imag, self.e4.real, self.e4.imag])

    @classmethod
    def from_real(cls, x) -> "FieldState":
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))

    @property
    def p1(self) -> float:
        return abs(self.e1) ** 2

    @property
    def p4(self) -> float:
        return abs(self.e4) ** 2


@dataclass(frozen=True)
class IntermediateFields:
    e2: complex
    e3: complex


def psi(intensity, params: MapParams):
    """Saturable nonlinear phase ``beta / (1 + eta * I)``."""
    return params.beta / (1.0 + params.eta * intensity)


def psi_pm(intensity, sign: int, params: MapParams):
    """Nonlinear phase of the coupler branch, scaled by ``exp(sign * gamma)``.

    ``sign=-1`` is the attenuated branch (acts on ``|E2|^2``), ``sign=+1`` the
    amplified one (acts on ``|E3|^2``).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return params.beta * math.exp(sign * params.gamma) / (1.0 + params.eta * intensity)


def intermediate_fields(state: FieldState) -> IntermediateFields:
    """Apply the 50:50 coupler ``(1/sqrt2) [[1, i], [i, 1]]`` to ``(E1, E4)``."""
    e1, e4 = state.e1, state.e4
    return IntermediateFields((e1 + 1j * e4) / SQRT2, (1j * e1 + e4) / SQRT2)


def _check_finite(*values):
    for v in values:
        # abs() of an inf/nan complex is inf/nan, both fail the comparison
        if not abs(v) <= OVERFLOW_LIMIT:
            raise DivergenceError(f"field magnitude {abs(v):.3g} out of range")


def step(state: FieldState, params: MapParams) -> FieldState:
    """One round trip of the map.

    Raises :class:`DivergenceError` if the input or output state has a
    component larger than ``OVERFLOW_LIMIT`` (or non-finite).
    """
    e1, e4 = state.e1, state.e4
    _check_finite(e1, e4)
    g, beta, eta = params.gamma, params.beta, params.eta
    mid = intermediate_fields(state)
    i1 = e1.real * e1.real + e1.imag * e1.imag
    i4 = e4.real * e4.real + e4.imag * e4.imag
    i2 = mid.e2.real * mid.e2.real + mid.e2.imag * mid.e2.imag
    i3 = mid.e3.real * mid.e3.real + mid.e3.imag * mid.e3.imag
    phi1 = beta / (1.0 + eta * i1) + params.phi_l
    phi4 = beta / (1.0 + eta * i4) + params.phi_l
    phi2 = beta * math.exp(-g) / (1.0 + eta * i2) + params.phi_l
    phi3 = beta * math.exp(g) / (1.0 + eta * i3) + params.phi_l

    a = math.exp(-g / 2) * params.e_in / SQRT2
    b = math.exp(-g) * (e1 + 1j * e4) / 2
    c = math.exp(g / 2) * params.e_in_prime / SQRT2
    d = math.exp(g) * (1j * e1 + e4) / 2
    new1 = 1j * cmath.exp(1j * phi1) * a + cmath.exp(1j * (phi2 + phi1)) * b
    new4 = 1j * cmath.exp(1j * phi4) * c + cmath.exp(1j * (phi3 + phi4)) * d
    _check_finite(new1, new4)
    return FieldState(new1, new4)


def step_terms(state: FieldState, params: MapParams) -> tuple[complex, complex, complex, complex]:
    """The four additive drive/feedback terms ``(A, B, C, D)`` before phasing."""
    g = params.gamma
    e1, e4 = state.e1, state.e4
    return (
        math.exp(-g / 2) * params.e_in / SQRT2,
        math.exp(-g) * (e1 + 1j * e4) / 2,
        math.exp(g / 2) * params.e_in_prime / SQRT2,
        math.exp(g) * (1j * e1 + e4) / 2,
    )


def step_batch(e1, e4, gamma, beta, eta, e_in, e_in_prime, phi_l=0.0):
    """Vectorised :func:`step` over broadcastable arrays.

    No overflow check is done here; callers mask diverging entries.
    """
    e1 = np.asarray(e1, dtype=complex)
    e4 = np.asarray(e4, dtype=complex)
    e2 = (e1 + 1j * e4) / SQRT2
    e3 = (1j * e1 + e4) / SQRT2
    i1 = e1.real * e1.real + e1.imag * e1.imag
    i4 = e4.real * e4.real + e4.imag * e4.imag
    i2 = e2.real * e2.real + e2.imag * e2.imag
    i3 = e3.real * e3.real + e3.imag * e3.imag
    gain = np.exp(gamma)
    loss = np.exp(-gamma)
    phi1 = beta / (1.0 + eta * i1) + phi_l
    phi4 = beta / (1.0 + eta * i4) + phi_l
    phi2 = beta * loss / (1.0 + eta * i2) + phi_l
    phi3 = beta * gain / (1.0 + eta * i3) + phi_l
    a = np.sqrt(loss) * e_in / SQRT2
    b = loss * (e1 + 1j * e4) / 2
    c = np.sqrt(gain) * e_in_prime / SQRT2
    d = gain * (1j * e1 + e4) / 2
    new1 = 1j * np.exp(1j * phi1) * a + np.exp(1j * (phi2 + phi1)) * b
    new4 = 1j * np.exp(1j * phi4) * c + np.exp(1j * (phi3 + phi4)) * d
    return new1, new4


def jacobian(state: FieldState, params: MapParams, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of :func:`step` on the real 4-vector.

    ``J[r, c] = d step_r / d x_c`` with ``x = (Re E1, Im E1, Re E4, Im E4)``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = state.to_real()
    jac = np.empty((4, 4))
    for col in range(4):
        dx = np.zeros(4)
        dx[col] = h
        up = step(FieldState.from_real(x + dx), params).to_real()
        down = step(FieldState.from_real(x - dx), params).to_real()
        jac[:, col] = (up - down) / (2 * h)
    if not np.all(np.isfinite(jac)):
        raise DivergenceError("non-finite Jacobian entry")
    return jac


_DIRECTIONS = (1.0, 1j)


def jacobian_batch(e1, e4, gamma, beta, eta, e_in, e_in_prime, phi_l=0.0, h=1e-6):
    """Batched :func:`jacobian`; returns an array of shape ``(..., 4, 4)``."""
    e1 = np.asarray(e1, dtype=complex)
    e4 = np.asarray(e4, dtype=complex)
    jac = np.empty(np.broadcast(e1, e4).shape + (4, 4))
    args = (gamma, beta, eta, e_in, e_in_prime, phi_l)
    for col in range(4):
        dz = h * _DIRECTIONS[col % 2]
        if col < 2:
            u1, u4 = step_batch(e1 + dz, e4, *args)
            d1, d4 = step_batch(e1 - dz, e4, *args)
        else:
            u1, u4 = step_batch(e1, e4 + dz, *args)
            d1, d4 = step_batch(e1, e4 - dz, *args)
        f1 = (u1 - d1) / (2 * h)
        f4 = (u4 - d4) / (2 * h)
        jac[..., 0, col] = f1.real
        jac[..., 1, col] = f1.imag
        jac[..., 2, col] = f4.real
        jac[..., 3, col] = f4.imag
    return jac


def complex_to_real_matrix(m) -> np.ndarray:
    """Embed a complex n x n matrix acting on C^n into R^(2n) (re, im interleaved)."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    out = np.empty((2 * n, 2 * n))
    out[0::2, 0::2] = m.real
    out[0::2, 1::2] = -m.imag
    out[1::2, 0::2] = m.imag
    out[1::2, 1::2] = m.real
    return out
