"""The theta-Maruyama, theta-Milstein and theta-sigma-Milstein schemes.

Applied to the linear test equation every scheme collapses to a one-step
linear recurrence X_{i+1} = factor(xi_i) * X_i.  The recurrence coefficients
are also exposed separately because the stability analysis consumes them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, ValidationError
from .model import InitialState, TestEquation

# Relative threshold below which the implicit-step denominator is treated
# as zero; scaled by max(1, |theta*h*lambda|).
EPS_DENOM = 1e-12


class SchemeKind(enum.Enum):
    MARUYAMA = "maruyama"
    MILSTEIN = "milstein"
    SIGMA_MILSTEIN = "sigma-milstein"


@dataclass(frozen=True)
class MethodSpec:
    """One discretization: scheme kind, implicitness parameters and step-size."""

    kind: SchemeKind
    theta: float
    h: float
    sigma: float = 0.0

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValidationError(f"step-size must be positive, got {self.h}")
        if self.theta < 0.0:
            raise ValidationError(f"theta must be >= 0, got {self.theta}")
        if self.sigma < 0.0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        if self.kind is not SchemeKind.SIGMA_MILSTEIN and self.sigma != 0.0:
            raise ValidationError(
                f"sigma is only meaningful for the sigma-Milstein scheme "
                f"(got sigma={self.sigma} for {self.kind.value})"
            )


@dataclass(frozen=True)
class NoiseDraw:
    """Standard Gaussian draws xi_1..xi_m for a single step."""

    xi: tuple[float, ...]


@dataclass(frozen=True)
class StepCoefficients:
    """Coefficients of the one-step recurrence.

    X_{i+1} = d^{-1} (a_hat + sum_r b_r xi_r
                      + sum_{r1,r2} c_{r1,r2} xi_{r1} xi_{r2}) X_i
    with c_{r1,r2} proportional to mu_{r1} mu_{r2}; the diagonal entries and
    the sum of the off-diagonal entries are stored explicitly.  For the
    Maruyama and Milstein schemes the coefficients are pre-divided by the
    drift denominator and d is 1; the sigma-Milstein scheme keeps its
    denominator explicit in d.
    """

    a_hat: complex
    a: complex
    b: tuple[complex, ...]
    c_diag: tuple[complex, ...]
    c_sum: complex
    d: complex


def _mu_square_sum(eq: TestEquation) -> complex:
    return sum(mu * mu for mu in eq.mus)


def checked_denominator(method: MethodSpec, eq: TestEquation) -> complex:
    """Implicit-step denominator, validated against near-degeneracy."""
    core = method.theta * method.h * eq.lam
    d = 1.0 - core
    if method.kind is SchemeKind.SIGMA_MILSTEIN:
        d = d + 0.5 * method.sigma * method.h * _mu_square_sum(eq)
    if abs(d) <= EPS_DENOM * max(1.0, abs(core)):
        raise DegenerateDenominator(
            f"implicit denominator |{d}| is numerically zero for "
            f"theta={method.theta}, h={method.h}, lambda={eq.lam}"
        )
    return d


def step_coefficients(method: MethodSpec, eq: TestEquation) -> StepCoefficients:
    """Recurrence coefficients of the scheme applied to the test equation."""
    d = checked_denominator(method, eq)
    h = method.h
    lam = eq.lam
    sqrt_h = math.sqrt(h)

    if method.kind is SchemeKind.MARUYAMA:
        a = (1.0 + (1.0 - method.theta) * h * lam) / d
        b = tuple(sqrt_h * mu / d for mu in eq.mus)
        zero = 0j
        return StepCoefficients(
            a_hat=a, a=a, b=b, c_diag=(zero,) * eq.m, c_sum=zero, d=1.0 + 0j
        )

    if method.kind is SchemeKind.MILSTEIN:
        a = (1.0 + (1.0 - method.theta) * h * lam) / d
        b = tuple(sqrt_h * mu / d for mu in eq.mus)
        c_diag = tuple(0.5 * h * mu * mu / d for mu in eq.mus)
        total = sum(eq.mus)
        c_sum = 0.5 * h * (total * total - _mu_square_sum(eq)) / d
        return StepCoefficients(
            a_hat=a - sum(c_diag), a=a, b=b, c_diag=c_diag, c_sum=c_sum, d=1.0 + 0j
        )

    # sigma-Milstein: coefficients kept un-divided, denominator in d.
    sq = _mu_square_sum(eq)
    a_hat = 1.0 + (1.0 - method.theta) * h * lam - 0.5 * h * (1.0 - method.sigma) * sq
    b = tuple(sqrt_h * mu for mu in eq.mus)
    c_diag = tuple(0.5 * h * mu * mu for mu in eq.mus)
    total = sum(eq.mus)
    c_sum = 0.5 * h * (total * total - sq)
    return StepCoefficients(
        a_hat=a_hat, a=a_hat + sum(c_diag), b=b, c_diag=c_diag, c_sum=c_sum, d=d
    )


def step_factor(method: MethodSpec, eq: TestEquation, xi) -> np.ndarray:
    """One-step multiplier factor(xi) with X_{i+1} = factor * X_i.

    ``xi`` has shape (..., m); the result drops the last axis.  The quadratic
    Milstein part uses sum_{r1,r2} mu_{r1} mu_{r2} xi_{r1} xi_{r2}
    = (sum_r mu_r xi_r)^2, which bundles the diagonal and cross terms.
    """
    d = checked_denominator(method, eq)
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != eq.m:
        raise ValidationError(f"noise draw must have {eq.m} entries")
    mu = np.array(eq.mus)
    h = method.h
    lam = eq.lam
    lin = math.sqrt(h) * (xi @ mu)

    if method.kind is SchemeKind.MARUYAMA:
        return (1.0 + (1.0 - method.theta) * h * lam + lin) / d

    quad = 0.5 * h * (xi @ mu) ** 2
    sq = _mu_square_sum(eq)
    if method.kind is SchemeKind.MILSTEIN:
        return (1.0 + (1.0 - method.theta) * h * lam - 0.5 * h * sq + lin + quad) / d

    a_hat = 1.0 + (1.0 - method.theta) * h * lam - 0.5 * h * (1.0 - method.sigma) * sq
    return (a_hat + lin + quad) / d


def one_step(
    method: MethodSpec, eq: TestEquation, x_i: complex, draw: NoiseDraw
) -> complex:
    """Advance one step of the scheme from state x_i with the given draws."""
    if len(draw.xi) != eq.m:
        raise ValidationError(f"noise draw must have {eq.m} entries")
    factor = step_factor(method, eq, np.array(draw.xi, dtype=float))
    return complex(x_i * complex(factor))


def simulate_path(
    method: MethodSpec,
    eq: TestEquation,
    init: InitialState,
    n_steps: int,
    draws: list[NoiseDraw],
) -> list[complex]:
    """Iterate the scheme; returns [X_0, X_1, ..., X_n]."""
    if len(draws) != n_steps:
        raise ValidationError(f"expected {n_steps} noise draws, got {len(draws)}")
    path = [complex(init.x0)]
    for draw in draws:
        path.append(one_step(method, eq, path[-1], draw))
    return path
