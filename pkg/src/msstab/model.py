"""Scalar linear test SDE with multiplicative noise.

The model is  dX = lambda * X dt + sum_r mu_r * X dW_r  with complex
coefficients and an m-dimensional driving Wiener process.  This module holds
the equation data, its pathwise exact solution and the analytic mean-square
stability condition of the zero solution.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError


def abs2(z: complex) -> float:
    """Squared modulus computed as re^2 + im^2 (no sqrt round-trip)."""
    return z.real * z.real + z.imag * z.imag


def _require_finite(z: complex, name: str) -> None:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError(f"{name} must be finite, got {z!r}")


@dataclass(frozen=True)
class TestEquation:
    """Coefficients (lambda, mu_1..mu_m) of the scalar linear test SDE."""

    lam: complex
    mus: tuple[complex, ...]

    def __post_init__(self):
        lam = complex(self.lam)
        mus = tuple(complex(mu) for mu in self.mus)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mus", mus)
        if len(mus) < 1:
            raise ValidationError("at least one noise coefficient is required (m >= 1)")
        _require_finite(lam, "lambda")
        for r, mu in enumerate(mus):
            _require_finite(mu, f"mu[{r}]")

    @property
    def m(self) -> int:
        return len(self.mus)


@dataclass(frozen=True)
class InitialState:
    """Non-random initial value; the initial time is fixed at t0 = 0."""

    x0: complex

    def __post_init__(self):
        x0 = complex(self.x0)
        object.__setattr__(self, "x0", x0)
        _require_finite(x0, "x0")


def sde_stability_margin(eq: TestEquation) -> float:
    """Left-hand side of the SDE stability condition.

    Returns Re(lambda) + 1/2 * sum_r |mu_r|^2.  The zero solution of the SDE
    is asymptotically mean-square stable iff the result is < 0.
    """
    return eq.lam.real + 0.5 * sum(abs2(mu) for mu in eq.mus)


def is_sde_ms_stable(eq: TestEquation) -> bool:
    """True iff the zero solution of the SDE is asymptotically MS-stable."""
    return sde_stability_margin(eq) < 0.0


def exact_solution_at(
    eq: TestEquation,
    init: InitialState,
    t: float,
    wiener_values: Sequence[float],
) -> complex:
    """Pathwise exact solution X(t) for given Wiener values W_r(t).

    Uses the exponential-martingale form
    X(t) = X0 * exp((lambda - 1/2 sum_r mu_r^2) t + sum_r mu_r W_r(t)).
    Note the complex squares mu_r^2 (not moduli) in the drift correction.
    """
    if len(wiener_values) != eq.m:
        raise ValidationError(
            f"expected {eq.m} Wiener values, got {len(wiener_values)}"
        )
    drift = eq.lam - 0.5 * sum(mu * mu for mu in eq.mus)
    noise = sum(mu * w for mu, w in zip(eq.mus, wiener_values))
    return init.x0 * cmath.exp(drift * t + noise)


def exact_second_moment(eq: TestEquation, init: InitialState, t: float) -> float:
    """E|X(t)|^2 = |X0|^2 * exp((2 Re(lambda) + sum_r |mu_r|^2) t)."""
    return abs2(init.x0) * math.exp(2.0 * sde_stability_margin(eq) * t)
