"""Mean-square stability analysis of the discretization schemes.

Two independent routes to the same verdict are provided: the one-step
second-moment amplification factor computed from the recurrence coefficients,
and the closed-form stability margin in the original equation parameters.
Both must agree in sign (strict inequality; a margin of exactly zero is
classified unstable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, ZeroDrift
from .model import TestEquation, abs2, sde_stability_margin
from .schemes import MethodSpec, SchemeKind, checked_denominator, step_coefficients


@dataclass(frozen=True)
class StabilityReport:
    """Amplification factor, margin, verdict and maximal stable step-size."""

    s: float
    margin: float
    stable: bool
    h_max: float


def amplification_factor(method: MethodSpec, eq: TestEquation) -> float:
    """Factor s in E|X_{i+1}|^2 = s E|X_i|^2, from the recurrence coefficients."""
    c = step_coefficients(method, eq)
    num = (
        abs2(c.a)
        + sum(abs2(b) for b in c.b)
        + 2.0 * sum(abs2(cd) for cd in c.c_diag)
        + abs2(c.c_sum)
    )
    return num / abs2(c.d)


def mu_sum(eq: TestEquation) -> complex:
    """Cross-intensity aggregate sum_{r1 != r2} mu_{r1} mu_{r2}."""
    total = sum(eq.mus)
    return total * total - sum(mu * mu for mu in eq.mus)


def _h_coefficient(kind: SchemeKind, theta: float, sigma: float, eq: TestEquation) -> float:
    """Coefficient of h in the linear-in-h stability margin."""
    q = 0.5 * (1.0 - 2.0 * theta) * abs2(eq.lam)
    if kind is SchemeKind.MARUYAMA:
        return q
    q += 0.25 * sum(abs2(mu) ** 2 for mu in eq.mus)
    q += 0.125 * abs2(mu_sum(eq))
    if kind is SchemeKind.SIGMA_MILSTEIN:
        # Re(conj(lambda) * mu_r^2); equals Re(lambda * mu_r^2) for real
        # coefficients and keeps sign-agreement with the amplification
        # factor exact for complex ones.
        q += 0.5 * sigma * sum((eq.lam.conjugate() * mu * mu).real for mu in eq.mus)
    return q


def method_stability_margin(method: MethodSpec, eq: TestEquation) -> float:
    """Left-hand side of the scheme's stability inequality (< 0 means stable)."""
    checked_denominator(method, eq)
    p = sde_stability_margin(eq)
    q = _h_coefficient(method.kind, method.theta, method.sigma, eq)
    return p + method.h * q


def is_method_ms_stable(method: MethodSpec, eq: TestEquation) -> bool:
    return method_stability_margin(method, eq) < 0.0


def theta_opt(eq: TestEquation) -> float:
    """Value of theta at which the Milstein stability region equals the SDE's."""
    if eq.lam == 0:
        raise ZeroDrift("theta_opt is undefined for lambda = 0")
    lam2 = abs2(eq.lam)
    return (
        0.5
        + sum(abs2(mu) ** 2 for mu in eq.mus) / (4.0 * lam2)
        + abs2(mu_sum(eq)) / (8.0 * lam2)
    )


def theta_tilde(eq: TestEquation, sigma: float) -> float:
    """sigma-Milstein analogue of theta_opt; may be negative."""
    if eq.lam == 0:
        raise ZeroDrift("theta_tilde is undefined for lambda = 0")
    lam2 = abs2(eq.lam)
    cross = sum((eq.lam.conjugate() * mu * mu).real for mu in eq.mus)
    return theta_opt(eq) + sigma * cross / (2.0 * lam2)


def max_stable_stepsize(method: MethodSpec, eq: TestEquation) -> float:
    """Supremum of stable step-sizes (may be 0 or +inf).

    The margin is linear in h, p + h*q.  A positive h-coefficient q gives the
    finite bound h < -p/q; q <= 0 with a stable SDE gives an A-stable
    configuration (+inf); a nonnegative h-free part p with q >= 0 admits no
    stable step-size at all.
    """
    checked_denominator(method, eq)
    p = sde_stability_margin(eq)
    q = _h_coefficient(method.kind, method.theta, method.sigma, eq)
    if q > 0.0:
        return max(-p / q, 0.0)
    if q == 0.0:
        return math.inf if p < 0.0 else 0.0
    # q < 0: stable for all h beyond some point, so the supremum is infinite.
    return math.inf


def stability_report(method: MethodSpec, eq: TestEquation) -> StabilityReport:
    margin = method_stability_margin(method, eq)
    return StabilityReport(
        s=amplification_factor(method, eq),
        margin=margin,
        stable=margin < 0.0,
        h_max=max_stable_stepsize(method, eq),
    )


def scaled_margin(
    kind: SchemeKind | None,
    theta: float,
    sigma: float,
    m: int,
    x,
    y,
):
    """Scaled stability-inequality left-hand side in the (x, y) plane.

    Coordinates are x = h*lambda and y = h*m*mu_1^2 for the equal-intensity,
    real-coefficient family.  ``kind=None`` evaluates the SDE condition.
    Accepts scalars or numpy arrays for x and y.
    """
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = x + 0.5 * y
    if kind is None:
        return base
    if kind is SchemeKind.MARUYAMA:
        return base + 0.5 * (1.0 - 2.0 * theta) * x * x
    quartic = 0.5 * y * y / m + 0.25 * y * y * (m - 1) ** 2
    out = base + 0.5 * ((1.0 - 2.0 * theta) * x * x + quartic)
    if kind is SchemeKind.SIGMA_MILSTEIN:
        out = out + 0.5 * sigma * x * y
    return out


@dataclass(frozen=True)
class RegionSpec:
    """One method family to rasterize: kind, theta, sigma and noise count m."""

    kind: SchemeKind
    theta: float
    sigma: float = 0.0
    m: int = 1

    @property
    def label(self) -> str:
        parts = [self.kind.value, f"t{self.theta:g}"]
        if self.kind is SchemeKind.SIGMA_MILSTEIN:
            parts.append(f"s{self.sigma:g}")
        parts.append(f"m{self.m}")
        return "_".join(parts)


@dataclass
class RegionGrid:
    """Rasterized stability membership on a rectangle of the scaled plane."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int
    x_centers: np.ndarray = field(repr=False)
    y_centers: np.ndarray = field(repr=False)
    sde: np.ndarray = field(repr=False)  # (ny, nx) bool
    members: dict = field(repr=False)  # label -> (ny, nx) bool


def rasterize_region(
    specs,
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    nx: int,
    ny: int,
) -> RegionGrid:
    """Evaluate membership (margin < 0) at cell centers for each spec and the SDE."""
    if nx < 2 or ny < 2:
        raise ValidationError("grid resolution must be at least 2x2")
    x_min, x_max = x_range
    y_min, y_max = y_range
    if not (x_max > x_min and y_max > y_min):
        raise ValidationError("empty raster range")
    if y_min < 0.0:
        raise ValidationError("y-range must lie in [0, inf)")
    dx = (x_max - x_min) / nx
    dy = (y_max - y_min) / ny
    xc = x_min + dx * (np.arange(nx) + 0.5)
    yc = y_min + dy * (np.arange(ny) + 0.5)
    xg, yg = np.meshgrid(xc, yc)

    sde = scaled_margin(None, 0.0, 0.0, 1, xg, yg) < 0.0
    members = {}
    for spec in specs:
        margin = scaled_margin(spec.kind, spec.theta, spec.sigma, spec.m, xg, yg)
        members[spec.label] = margin < 0.0
    return RegionGrid(
        x_min=x_min,
        x_max=x_max,
        y_min=y_min,
        y_max=y_max,
        nx=nx,
        ny=ny,
        x_centers=xc,
        y_centers=yc,
        sde=sde,
        members=members,
    )
