"""Parameters, grids, and L1 fractional-derivative weights.

The transport model couples a mobile and an immobile concentration on the
unit interval through first-order mass transfer, with Caputo time
derivatives of order ``alpha`` (mobile) and ``gamma`` (immobile), both in
(0, 1).  This module holds the value objects shared across the package
(parameter set, space-time grid, solution container, point observations)
and the elementary weight functions of the L1 discretization of the
Caputo derivative.

All types are immutable after construction and all functions are pure, so
everything here is safe for concurrent use.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridError, ParameterError, ValidationError

__all__ = [
    "ModelParams",
    "GridSpec",
    "SolutionGrid",
    "ObservationSeries",
    "validate_params",
    "l1_bracket",
    "psi_weight",
    "l1_power_table",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical constants and fractional orders of the transport model.

    Attributes
    ----------
    P : float
        Peclet number; 1/P is the dimensionless dispersion coefficient.
    R1, R2 : float
        Retardation coefficients of the mobile and immobile zones.
    beta : float
        Partitioning coefficient between the two zones, in (0, 1).
    omega : float
        First-order mass transfer rate between the zones.
    lam : float
        Degradation coefficient in the mobile zone (the model's lambda).
    mu : float
        Degradation coefficient in the immobile zone.
    alpha : float
        Fractional time-derivative order in the mobile zone, in (0, 1).
    gamma : float
        Fractional time-derivative order in the immobile zone, in (0, 1).
    """

    P: float
    R1: float
    R2: float
    beta: float
    omega: float
    lam: float
    mu: float
    alpha: float
    gamma: float

    def with_orders(self, alpha: float, gamma: float) -> "ModelParams":
        """Return a copy with the fractional orders replaced."""
        return dataclasses.replace(self, alpha=float(alpha), gamma=float(gamma))


# Admissibility checks, in reporting order.  Each entry is
# (predicate on ModelParams, message for the first violated bound).
_ADMISSIBILITY = [
    (lambda p: 0.0 < p.alpha < 1.0, "alpha must lie in (0,1)"),
    (lambda p: 0.0 < p.gamma < 1.0, "gamma must lie in (0,1)"),
    (lambda p: 0.0 < p.beta < 1.0, "beta must lie in (0,1)"),
    (lambda p: p.R1 >= 1.0, "R1 must be at least 1"),
    (lambda p: p.R2 >= 1.0, "R2 must be at least 1"),
    (lambda p: p.P > 0.0, "P must be positive"),
    (lambda p: p.omega > 0.0, "omega must be positive"),
    (lambda p: p.lam > 0.0, "lam must be positive"),
    (lambda p: p.mu > 0.0, "mu must be positive"),
]


def validate_params(p: ModelParams) -> ModelParams:
    """Check the natural admissibility condition on all parameters.

    Every bound is strict where the condition is stated with a strict
    inequality; boundary values (e.g. ``alpha == 1``) are rejected rather
    than nudged inward.

    Returns
    -------
    ModelParams
        The input, unchanged, when every bound holds.

    Raises
    ------
    ParameterError
        Naming the first violated bound.
    """
    for field in dataclasses.fields(p):
        v = getattr(p, field.name)
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise ParameterError(f"{field.name} must be a finite number")
    for check, message in _ADMISSIBILITY:
        if not check(p):
            raise ParameterError(message)
    return p


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time grid on [0,1] x [0,T].

    ``m`` space intervals of width ``h = 1/m`` and ``n`` time steps of
    size ``tau = T/n``.
    """

    m: int
    n: int
    T: float

    def __post_init__(self):
        if not (isinstance(self.m, int) and self.m >= 3):
            raise GridError("m must be an integer >= 3")
        if not (isinstance(self.n, int) and self.n >= 1):
            raise GridError("n must be an integer >= 1")
        if not (isinstance(self.T, (int, float)) and math.isfinite(self.T) and self.T > 0):
            raise GridError("T must be a positive finite number")

    @property
    def h(self) -> float:
        """Space step 1/m."""
        return 1.0 / self.m

    @property
    def tau(self) -> float:
        """Time step T/n."""
        return self.T / self.n

    def space_nodes(self) -> np.ndarray:
        """Grid points x_i = i*h, i = 0..m."""
        return np.arange(self.m + 1) * self.h

    def time_nodes(self) -> np.ndarray:
        """Grid times t_k = k*tau, k = 0..n."""
        return np.arange(self.n + 1) * self.tau


@dataclass
class SolutionGrid:
    """Mobile and immobile concentration fields on the full grid.

    ``u1`` and ``u2`` have shape (m+1, n+1), indexed [space, time].
    The stored fields satisfy the discrete side conditions: zero initial
    data, inlet value on the mobile boundary column for k >= 1, and the
    reflected (impermeable) values at the outflow node.
    """

    u1: np.ndarray
    u2: np.ndarray
    grid: GridSpec

    def __post_init__(self):
        expected = (self.grid.m + 1, self.grid.n + 1)
        if self.u1.shape != expected or self.u2.shape != expected:
            raise GridError(
                f"solution arrays must have shape {expected}, "
                f"got {self.u1.shape} and {self.u2.shape}"
            )

    def boundary_residual(self) -> float:
        """Largest violation of the discrete boundary identities.

        Checks the initial column, the inlet column (against its own
        stored value at k=1, so it is inlet-scale agnostic), and the
        reflection identities at x = 1.  Used by tests as a post-hoc
        invariant check on solver output.
        """
        m = self.grid.m
        res = max(
            float(np.max(np.abs(self.u1[:, 0]))),
            float(np.max(np.abs(self.u2[:, 0]))),
            float(np.max(np.abs(self.u2[0, 1:]))) if self.grid.n >= 1 else 0.0,
            float(np.max(np.abs(self.u1[m, :] - self.u1[m - 1, :]))),
            float(np.max(np.abs(self.u2[m, :] - self.u2[m - 1, :]))),
        )
        if self.grid.n >= 2:
            res = max(res, float(np.max(np.abs(self.u1[0, 2:] - self.u1[0, 1]))))
        return res


@dataclass(frozen=True)
class ObservationSeries:
    """Time series of the mobile concentration at one interior point.

    Attributes
    ----------
    x0 : float
        Observation point, strictly inside (0, 1), on a grid node.
    times : np.ndarray
        Strictly increasing positive time stamps t_1..t_n.
    values : np.ndarray
        Mobile-zone samples u1(x0, t_k).
    noise_level : float
        Amplitude of the uniform perturbation applied (0 for clean data).
    seed : int | None
        RNG seed used to draw the perturbation, recorded for replay.
    """

    x0: float
    times: np.ndarray
    values: np.ndarray
    noise_level: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or values.shape != times.shape:
            raise ValidationError("times and values must be 1-D arrays of equal length")
        if times.size and (times[0] <= 0 or np.any(np.diff(times) <= 0)):
            raise ValidationError("times must be strictly increasing and positive")
        if not np.all(np.isfinite(values)):
            raise ValidationError("observation values must be finite")
        if self.noise_level < 0:
            raise ValidationError("noise_level must be nonnegative")

    def __len__(self) -> int:
        return self.times.size


def _frac_pow(base: float, expo: float) -> float:
    # 0^0 is taken as 0: the L1 weights extend continuously to order 1,
    # where the bracket at j=k must stay exactly 1.
    if base == 0.0:
        return 0.0
    return float(base) ** expo


def l1_bracket(order: float, k: int, j: int) -> float:
    """History weight (k+1-j)^(1-order) - (k-j)^(1-order) of the L1 scheme.

    Strictly positive for order in (0, 1); exactly 1 at j = k for every
    order in (0, 1].
    """
    if not 0 <= j <= k:
        raise ValueError(f"need 0 <= j <= k, got j={j}, k={k}")
    e = 1.0 - order
    return _frac_pow(k + 1 - j, e) - _frac_pow(k - j, e)


def psi_weight(order: float, k: int, j: int) -> float:
    """Second-difference weight 2(k+1-j)^e - (k-j)^e - (k-j+2)^e, e = 1-order.

    This is the coefficient multiplying the level-j solution when the L1
    history sum is rearranged into per-level form.  Nonnegative for order
    in (0, 1) by concavity of t^e.
    """
    if k < 2 or not 1 <= j <= k - 1:
        raise ValueError(f"need k >= 2 and 1 <= j <= k-1, got j={j}, k={k}")
    e = 1.0 - order
    return 2.0 * _frac_pow(k + 1 - j, e) - _frac_pow(k - j, e) - _frac_pow(k - j + 2, e)


def l1_power_table(order: float, n: int) -> np.ndarray:
    """Table of i^(1-order) for i = 0..n+1, with the 0^0 = 0 convention.

    The solver builds every per-step weight vector by differencing this
    table, so one table per (order, grid) pair covers the whole march.
    """
    e = 1.0 - order
    table = np.arange(n + 2, dtype=float) ** e
    table[0] = 0.0
    return table
