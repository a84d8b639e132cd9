"""Deterministic solvers for the mean-field equation.

``solve_pde`` marches the strong-form collision operator on a uniform grid
over [-1, 1] with classical RK4; ``solve_spectral`` integrates the
Fourier-side recursion on the geometric frequency ladder
xi_n = xi_top (1-mu)^n, which is exactly closed under xi -> (1-mu) xi and
serves as an independent oracle for the grid solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .core import DomainError, ModelParams, NumericsError, SampleSet
from .meanfield import mean_at, moment_auxiliaries

#: symmetric mu above this has a singular long-time limit (fractal support of
#: measure zero) that a fixed grid cannot represent; conservative margin
#: below the 1/2 transition
GRID_MU_LIMIT = 0.45

_EDGE_SNAP = 1e-12


@dataclass(frozen=True)
class GridDensity:
    """Probability density tabulated on a uniform grid over [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 3:
            raise DomainError("GridDensity needs a 1-d array of >= 3 values")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0:
            raise DomainError("density values must be finite and nonnegative")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def dx(self) -> float:
        return 2.0 / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.n_points)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, dx=self.dx))

    def normalized(self) -> "GridDensity":
        return GridDensity(self.values / self.mass())

    @classmethod
    def uniform(cls, n_points: int) -> "GridDensity":
        return cls(np.full(n_points, 0.5))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray],
                      n_points: int, normalize: bool = True) -> "GridDensity":
        vals = np.asarray(fn(np.linspace(-1.0, 1.0, n_points)), dtype=np.float64)
        rho = cls(vals)
        return rho.normalized() if normalize else rho

    def moments(self) -> Tuple[float, float]:
        return moments_from_grid(self)

    def char_fn(self, xi):
        """Trapezoid approximation of int exp(-i x xi) rho(x) dx."""
        xi_arr = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        w = np.full(self.n_points, self.dx)
        w[0] = w[-1] = self.dx / 2.0
        vals = np.exp(-1j * np.outer(xi_arr, self.x)) @ (w * self.values)
        return vals if np.ndim(xi) else complex(vals[0])

    def cdf(self) -> np.ndarray:
        c = np.concatenate([[0.0], np.cumsum(
            0.5 * (self.values[1:] + self.values[:-1]) * self.dx)])
        return c / c[-1]

    def quantile(self, u) -> np.ndarray:
        """Inverse CDF by linear interpolation."""
        return np.interp(np.asarray(u, dtype=np.float64), self.cdf(), self.x)

    def sample(self, n: int, rng: Optional[np.random.Generator] = None) -> SampleSet:
        """Inverse-CDF sampling; deterministic midpoint quantiles when no
        generator is given."""
        u = (np.arange(n) + 0.5) / n if rng is None else rng.random(n)
        return SampleSet(self.quantile(u))


def moments_from_grid(rho: GridDensity) -> Tuple[float, float]:
    """Trapezoid-rule first and second moments (m, q)."""
    x = rho.x
    m = float(np.trapezoid(x * rho.values, dx=rho.dx))
    q = float(np.trapezoid(x * x * rho.values, dx=rho.dx))
    return m, q


def _step_indicator(x: np.ndarray, cut: float, keep_above: bool) -> np.ndarray:
    """Sharp indicator with value 1/2 at a grid node sitting exactly on the
    cut; keeps the trapezoid mass of node-aligned jumps exact."""
    ind = (x > cut).astype(np.float64) if keep_above else (x <= cut).astype(np.float64)
    ind[np.abs(x - cut) <= _EDGE_SNAP] = 0.5
    return ind


def _q_star_values(x: np.ndarray, v: np.ndarray, m: float,
                   params: ModelParams) -> np.ndarray:
    mup, mum = params.mu_plus, params.mu_minus
    # wherever the indicators are nonzero the affine preimages lie in [-1, 1]
    # mathematically; clipping only undoes float rounding at the boundary
    pre_p = np.clip((x - mup) / (1.0 - mup), -1.0, 1.0)
    pre_m = np.clip((x + mum) / (1.0 - mum), -1.0, 1.0)
    gain_p = np.interp(pre_p, x, v) / (1.0 - mup)
    gain_m = np.interp(pre_m, x, v) / (1.0 - mum)
    ind_p = _step_indicator(x, 2.0 * mup - 1.0, keep_above=True)
    ind_m = _step_indicator(x, 1.0 - 2.0 * mum, keep_above=False)
    return (0.5 * (1.0 + m) * ind_p * gain_p
            + 0.5 * (1.0 - m) * ind_m * gain_m
            - v)


def apply_q_star(rho: GridDensity, m: float, params: ModelParams) -> np.ndarray:
    """Collision operator applied to a tabulated density, pointwise.

    Gain terms are pull-backs of rho under the two affine interaction maps
    (preimages evaluated by linear interpolation, zero outside [-1, 1]);
    the loss term is rho itself. Conserves mass. The current mean m is
    supplied by the caller.
    """
    if params.mu_plus >= 1.0 or params.mu_minus >= 1.0:
        raise DomainError("the strong-form operator requires mu_plus, mu_minus < 1")
    return _q_star_values(rho.x, rho.values, m, params)


def solve_pde(rho0: GridDensity, t_end: float, dt: float, params: ModelParams,
              m0: float, snapshot_times: Optional[Sequence[float]] = None,
              step_monitor: Optional[Callable[[float, float], None]] = None,
              ) -> List[Tuple[float, GridDensity]]:
    """RK4 time march of the collision operator with the closed-form mean.

    After every step negatives are clipped and the trapezoid mass is
    renormalized to 1. ``step_monitor(t, mass)`` (if given) sees the
    pre-renormalization mass after each step. Snapshot times are hit exactly
    via a shortened final substep.
    """
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if dt > 0.1:
        raise DomainError(f"dt={dt!r} exceeds the stability guard of 0.1")
    if params.mu_plus >= 1.0 or params.mu_minus >= 1.0:
        raise DomainError("grid solver requires mu_plus, mu_minus < 1")
    if params.symmetric and params.mu > GRID_MU_LIMIT:
        raise DomainError(
            f"symmetric mu={params.mu} > {GRID_MU_LIMIT}: the long-time limit "
            "is singular (fractal support of measure zero) and cannot be "
            "resolved on a fixed grid; use the equilibrium module instead")
    if t_end < 0.0:
        raise DomainError(f"t_end must be nonnegative, got {t_end!r}")
    snaps = tuple(float(s) for s in ((t_end,) if snapshot_times is None else snapshot_times))
    if any(b < a for a, b in zip(snaps, snaps[1:])):
        raise DomainError("snapshot_times must be sorted")
    if snaps and (snaps[0] < 0.0 or snaps[-1] > t_end):
        raise DomainError("snapshot_times must lie in [0, t_end]")
    grid_m0, _ = moments_from_grid(rho0)
    if abs(grid_m0 - m0) > 1e-6:
        raise DomainError(
            f"initial grid mean {grid_m0:.8g} does not match m0={m0!r}; "
            "the supplied mean drives the operator weights")

    x = rho0.x
    dx = rho0.dx
    v = rho0.values / rho0.mass()
    t = 0.0
    out: List[Tuple[float, GridDensity]] = []
    for t_snap in snaps:
        while t < t_snap - 1e-12:
            h = min(dt, t_snap - t)
            k1 = _q_star_values(x, v, mean_at(t, m0, params), params)
            m_half = mean_at(t + h / 2.0, m0, params)
            k2 = _q_star_values(x, v + (h / 2.0) * k1, m_half, params)
            k3 = _q_star_values(x, v + (h / 2.0) * k2, m_half, params)
            k4 = _q_star_values(x, v + h * k3, mean_at(t + h, m0, params), params)
            v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
            mass = float(np.trapezoid(v, dx=dx))
            if not math.isfinite(mass) or abs(mass - 1.0) > 1e-4:
                raise NumericsError(
                    f"mass drifted to {mass!r} in one step at t={t:.4g}; "
                    "the march is numerically unstable")
            if step_monitor is not None:
                step_monitor(t, mass)
            np.clip(v, 0.0, None, out=v)
            v /= np.trapezoid(v, dx=dx)
        t = t_snap
        out.append((t_snap, GridDensity(v.copy())))
    return out


@dataclass(frozen=True)
class SpectralState:
    """Characteristic-function values on the ladder xi_n = xi_top (1-mu)^n."""

    xi_top: float
    depth: int
    xi: np.ndarray
    values: np.ndarray
    mu: float
    m0: float
    t: float

    def __post_init__(self):
        if np.max(np.abs(self.values)) > 1.0 + 1e-9:
            raise NumericsError("characteristic-function values exceeded modulus 1")


def solve_spectral(mu: float, m0: float, xi_top: float, depth: int,
                   t_end: float, dt: float = 0.01) -> SpectralState:
    """Integrate the Fourier-side recursion on the geometric ladder.

    d/dt f(xi_n) = [cos(mu xi_n) - i m0 sin(mu xi_n)] f(xi_{n+1}) - f(xi_n),
    n = 0..depth, starting from the point mass at m0 (f = exp(-i m0 xi)).
    The ladder is closed at n = depth with the small-xi moment expansion
    f(xi) ~ 1 - i m0 xi - q_t xi^2 / 2, q_t from the constant-coefficient
    moment ODE; the closure frequency must satisfy |xi_{depth+1}| <= 0.1.
    """
    if not (0.0 < mu < 1.0):
        raise DomainError(f"solve_spectral requires mu in (0, 1), got {mu!r}")
    if depth < 1:
        raise DomainError(f"depth must be >= 1, got {depth}")
    if xi_top <= 0.0:
        raise DomainError(f"xi_top must be positive, got {xi_top!r}")
    if dt <= 0.0 or dt > 0.1:
        raise DomainError(f"dt must lie in (0, 0.1], got {dt!r}")
    if t_end < 0.0:
        raise DomainError(f"t_end must be nonnegative, got {t_end!r}")
    xi_closure = xi_top * (1.0 - mu) ** (depth + 1)
    if xi_closure > 0.1:
        raise DomainError(
            f"depth {depth} too small: closure frequency {xi_closure:.4g} > 0.1, "
            "so the moment expansion is not valid; increase depth")

    params = ModelParams(mu, mu)
    alpha, beta = moment_auxiliaries(m0, params)
    q_star = -beta / alpha
    q0 = m0 * m0

    def q_of_t(tau: float) -> float:
        return q_star + (q0 - q_star) * math.exp(alpha * tau)

    xi = xi_top * (1.0 - mu) ** np.arange(depth + 1)
    factor = np.cos(mu * xi) - 1j * m0 * np.sin(mu * xi)
    y = np.exp(-1j * m0 * xi).astype(np.complex128)

    def rhs(tau: float, vals: np.ndarray) -> np.ndarray:
        shifted = np.empty_like(vals)
        shifted[:-1] = vals[1:]
        shifted[-1] = 1.0 - 1j * m0 * xi_closure - 0.5 * q_of_t(tau) * xi_closure ** 2
        return factor * shifted - vals

    t = 0.0
    while t < t_end - 1e-12:
        h = min(dt, t_end - t)
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2.0, y + (h / 2.0) * k1)
        k3 = rhs(t + h / 2.0, y + (h / 2.0) * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return SpectralState(xi_top=xi_top, depth=depth, xi=xi, values=y,
                         mu=mu, m0=m0, t=t_end)
