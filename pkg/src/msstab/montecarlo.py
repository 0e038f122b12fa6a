"""Seeded, reproducible Monte Carlo ensembles on common random numbers.

The driving noise is a pure function of (seed, trajectory, step, noise index):
each trajectory owns a Philox counter-based stream keyed by (seed, trajectory),
so trajectory-level parallelism or batching cannot perturb the draws.  All
schemes and the exact solution consume the same fine-grid noise; coarse-grid
Gaussians are obtained by aggregating fine Wiener increments, which keeps the
Brownian path shared across step-sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import InitialState, TestEquation, abs2, sde_stability_margin
from .schemes import MethodSpec, step_factor
from .stability import amplification_factor

_MASK64 = (1 << 64) - 1

# Trajectories per vectorized block; part of the determinism contract
# (fixed seed + fixed batch size -> bit-identical accumulation order).
DEFAULT_BATCH_SIZE = 4096


@dataclass(frozen=True)
class NoisePlan:
    """Identifies a reproducible ensemble of fine-grid Gaussian draws."""

    seed: int
    M: int
    n_fine: int
    m: int
    h_fine: float

    def __post_init__(self):
        if self.M < 1:
            raise ValidationError(f"trajectory count must be >= 1, got {self.M}")
        if self.n_fine < 1:
            raise ValidationError(f"n_fine must be >= 1, got {self.n_fine}")
        if self.m < 1:
            raise ValidationError(f"m must be >= 1, got {self.m}")
        if not self.h_fine > 0.0:
            raise ValidationError(f"h_fine must be positive, got {self.h_fine}")


def trajectory_noise(plan: NoisePlan, traj: int) -> np.ndarray:
    """Fine-grid standard normals for one trajectory, shape (n_fine, m)."""
    key = np.array([plan.seed & _MASK64, traj & _MASK64], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.standard_normal((plan.n_fine, plan.m))


def gaussian_draw(plan: NoisePlan, traj: int, step: int, r: int) -> float:
    """Single standard-normal draw xi_{r,step} of one trajectory."""
    if not (0 <= traj < plan.M and 0 <= step < plan.n_fine and 0 <= r < plan.m):
        raise ValidationError("noise index out of plan bounds")
    return float(trajectory_noise(plan, traj)[step, r])


def _noise_block(plan: NoisePlan, lo: int, hi: int, n_rows: int) -> np.ndarray:
    """Stacked fine noise for trajectories lo..hi-1, shape (hi-lo, n_rows, m)."""
    out = np.empty((hi - lo, n_rows, plan.m))
    for j, traj in enumerate(range(lo, hi)):
        out[j] = trajectory_noise(plan, traj)[:n_rows]
    return out


def aggregate_increments(xi_fine: np.ndarray, k: int) -> np.ndarray:
    """Coarsen fine-grid Gaussians to the grid h = k * h_fine.

    xi_coarse[i] = sum of the i-th block of k fine draws / sqrt(k), so the
    coarse draws are again standard normal and correspond to the Wiener
    increments of the shared Brownian path.
    """
    xi_fine = np.asarray(xi_fine)
    n = xi_fine.shape[-2]
    if k < 1 or n % k != 0:
        raise ValidationError(f"coarsening factor {k} does not divide {n} steps")
    if k == 1:
        return xi_fine
    shape = xi_fine.shape[:-2] + (n // k, k, xi_fine.shape[-1])
    return xi_fine.reshape(shape).sum(axis=-2) / math.sqrt(k)


@dataclass
class EnsembleResult:
    """Per-gridpoint statistics of one seeded ensemble run."""

    times: np.ndarray
    ms_error: np.ndarray
    est_second_moment: np.ndarray
    analytic_second_moment: np.ndarray
    recurrence_second_moment: np.ndarray
    std_error_of_estimates: np.ndarray
    overflow: np.ndarray  # bool per gridpoint; estimates unusable where set


@dataclass
class ConvergenceResult:
    """Endpoint MS-errors per step-size and the fitted log-log slope."""

    slope: float
    step_sizes: np.ndarray
    errors: np.ndarray


def run_ensemble(
    method: MethodSpec,
    eq: TestEquation,
    init: InitialState,
    plan: NoisePlan,
    n_steps: int,
    k: int = 1,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> EnsembleResult:
    """Simulate M trajectories of the scheme and the exact solution.

    The scheme runs on the coarse grid h = k * h_fine; the exact solution is
    evaluated at the same grid points from the cumulative fine increments, so
    the MS-error contains no extra discretization error in W.
    """
    if n_steps < 0:
        raise ValidationError(f"n_steps must be >= 0, got {n_steps}")
    if k * n_steps > plan.n_fine:
        raise ValidationError(
            f"k * n_steps = {k * n_steps} exceeds plan.n_fine = {plan.n_fine}"
        )
    if eq.m != plan.m:
        raise ValidationError("equation and noise plan disagree on m")
    if abs(method.h - k * plan.h_fine) > 1e-12 * method.h:
        raise ValidationError(
            f"method step-size {method.h} is not k*h_fine = {k * plan.h_fine}"
        )
    s = amplification_factor(method, eq)

    h = k * plan.h_fine
    n = n_steps
    times = np.arange(n + 1) * h
    mu = np.array(eq.mus)
    drift = eq.lam - 0.5 * np.sum(mu * mu)
    x0 = complex(init.x0)

    acc_err = np.zeros(n + 1)
    acc_m2 = np.zeros(n + 1)
    acc_m4 = np.zeros(n + 1)
    n_rows = k * n
    with np.errstate(over="ignore", invalid="ignore"):
        for lo in range(0, plan.M, batch_size):
            hi = min(lo + batch_size, plan.M)
            if n_rows > 0:
                xi = _noise_block(plan, lo, hi, n_rows)
                # Brownian path at coarse grid points (t=0 prepended).
                w = math.sqrt(plan.h_fine) * np.cumsum(xi, axis=1)
                w_grid = np.concatenate(
                    [np.zeros((hi - lo, 1, plan.m)), w[:, k - 1 :: k, :]], axis=1
                )
                x_exact = x0 * np.exp(drift * times[None, :] + w_grid @ mu)
                factors = step_factor(method, eq, aggregate_increments(xi, k))
                x_num = np.empty((hi - lo, n + 1), dtype=complex)
                x_num[:, 0] = x0
                x_num[:, 1:] = x0 * np.cumprod(factors, axis=1)
            else:
                x_exact = np.full((hi - lo, 1), x0, dtype=complex)
                x_num = x_exact.copy()
            diff = x_num - x_exact
            acc_err += np.sum(diff.real**2 + diff.imag**2, axis=0)
            m2 = x_num.real**2 + x_num.imag**2
            acc_m2 += m2.sum(axis=0)
            acc_m4 += (m2 * m2).sum(axis=0)

    ms_error = np.sqrt(acc_err / plan.M)
    est = acc_m2 / plan.M
    var = np.maximum(acc_m4 / plan.M - est * est, 0.0)
    std_error = np.sqrt(var / plan.M)
    with np.errstate(over="ignore"):
        analytic = abs2(x0) * np.exp(2.0 * sde_stability_margin(eq) * times)
        recurrence = abs2(x0) * np.power(float(s), np.arange(n + 1))
    overflow = ~np.isfinite(est)
    return EnsembleResult(
        times=times,
        ms_error=ms_error,
        est_second_moment=est,
        analytic_second_moment=analytic,
        recurrence_second_moment=recurrence,
        std_error_of_estimates=std_error,
        overflow=overflow,
    )


def estimate_convergence_order(
    method_kind,
    eq: TestEquation,
    init: InitialState,
    T: float,
    h_list,
    plan: NoisePlan,
    theta: float = 0.0,
    sigma: float = 0.0,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> ConvergenceResult:
    """Least-squares slope of log(endpoint MS-error) against log(h).

    Every step-size must be a multiple of plan.h_fine and divide T; all runs
    share the Brownian paths of the plan (common random numbers).
    """
    hs = [float(h) for h in h_list]
    if len(hs) < 2:
        raise ValidationError("slope estimation needs at least two step-sizes")
    if not T > 0.0:
        raise ValidationError(f"T must be positive, got {T}")
    errors = []
    for h in hs:
        k = h / plan.h_fine
        if abs(k - round(k)) > 1e-9 * max(1.0, k):
            raise ValidationError(f"h = {h} is not a multiple of h_fine = {plan.h_fine}")
        k = round(k)
        n = T / h
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValidationError(f"h = {h} does not divide T = {T}")
        n = round(n)
        method = MethodSpec(kind=method_kind, theta=theta, sigma=sigma, h=k * plan.h_fine)
        res = run_ensemble(method, eq, init, plan, n, k, batch_size=batch_size)
        err = res.ms_error[-1]
        if not np.isfinite(err) or err <= 0.0:
            raise ValidationError(
                f"endpoint MS-error at h={h} is not a positive finite number"
            )
        errors.append(err)
    slope = float(np.polyfit(np.log(hs), np.log(errors), 1)[0])
    return ConvergenceResult(slope=slope, step_sizes=np.array(hs), errors=np.array(errors))
