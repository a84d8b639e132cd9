"""Large-population limit: moment formulas and Monte Carlo of the limiting jump process.

The limit process carries a rate-1 jump clock; at a jump at time t it moves a
fraction mu_plus toward +1 with probability (1 + m_t)/2 and a fraction
mu_minus toward -1 otherwise, where m_t is the (closed-form) mean trajectory.
The particle simulator below is event-driven: no time-discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .core import (BLOCK_SIZE, DomainError, InitSpec, ModelParams,
                   RandomSource, SampleSet)

_VAR_TOL = 1e-12


def mean_at(t, m0: float, params: ModelParams):
    """Mean opinion at time t.

    Symmetric parameters conserve the mean; otherwise
    m_t = 1 - 2 (1-m0) / ((1-m0) + (1+m0) e^{(mu_plus - mu_minus) t}),
    a form that avoids the singular ratio (1+m0)/(1-m0) at the fixed points
    m0 = +-1.
    """
    scalar = np.isscalar(t) or np.ndim(t) == 0
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if params.symmetric or m0 == 1.0 or m0 == -1.0:
        out = np.full(t_arr.shape, m0)
    else:
        delta = params.mu_plus - params.mu_minus
        with np.errstate(over="ignore"):
            grow = (1.0 + m0) * np.exp(delta * t_arr)
        out = 1.0 - 2.0 * (1.0 - m0) / ((1.0 - m0) + grow)
    return float(out[0]) if scalar else out


def moment_auxiliaries(m, params: ModelParams):
    """Coefficients (alpha, beta) of the second-moment ODE q' = alpha q + beta."""
    cp = (1.0 - params.mu_plus) ** 2
    cm = (1.0 - params.mu_minus) ** 2
    m = np.asarray(m, dtype=np.float64) if np.ndim(m) else float(m)
    alpha = 0.5 * (cp - cm) * m + 0.5 * (cp + cm) - 1.0
    beta = (0.5 * (1.0 + m) * (params.mu_plus ** 2
                               + 2.0 * (1.0 - params.mu_plus) * params.mu_plus * m)
            + 0.5 * (1.0 - m) * (params.mu_minus ** 2
                                 - 2.0 * (1.0 - params.mu_minus) * params.mu_minus * m))
    return alpha, beta


def _closed_form_q(t, q0: float, m0: float, params: ModelParams):
    # symmetric case: alpha, beta constant, so q relaxes to q* = -beta/alpha
    alpha, beta = moment_auxiliaries(m0, params)
    q_star = -beta / alpha
    return q_star + (q0 - q_star) * np.exp(alpha * np.asarray(t, dtype=np.float64))


def second_moment_at(t: float, q0: float, m0: float, params: ModelParams,
                     quad_step: float = 1e-3, method: str = "auto") -> float:
    """Second moment q_t.

    Solves q' = alpha_t q + beta_t through the integrating factor
    I_t = exp(-int_0^t alpha): q_t = q0 / I_t + (1/I_t) int_0^t beta I.
    Both integrals use composite Simpson quadrature at step ``quad_step``;
    the symmetric case takes the constant-coefficient closed form unless
    ``method="quadrature"`` forces the quadrature path (cross-validation).
    """
    if quad_step <= 0.0:
        raise DomainError(f"quad_step must be positive, got {quad_step!r}")
    if method not in ("auto", "closed", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    if method == "closed" and not params.symmetric:
        raise DomainError("closed-form q_t requires symmetric parameters")
    t = float(t)
    if t == 0.0:
        return float(q0)
    if params.symmetric and method != "quadrature":
        return float(_closed_form_q(t, q0, m0, params))
    n_steps = max(2, math.ceil(t / quad_step))
    s = np.linspace(0.0, t, n_steps + 1)
    alpha, beta = moment_auxiliaries(mean_at(s, m0, params), params)
    big_a = cumulative_simpson(alpha, x=s, initial=0.0)
    inv_i = np.exp(big_a)          # 1 / I_s
    weighted = simpson(beta / inv_i, x=s)
    return float(q0 * inv_i[-1] + inv_i[-1] * weighted)


def stationary_variance(mu: float, m0: float) -> float:
    """Equilibrium variance mu (1 - m0^2) / (2 - mu), symmetric case."""
    if not (0.0 < mu < 1.0):
        raise DomainError(f"stationary_variance requires mu in (0, 1), got {mu!r}")
    if not (-1.0 <= m0 <= 1.0):
        raise DomainError(f"m0 must lie in [-1, 1], got {m0!r}")
    return mu * (1.0 - m0 * m0) / (2.0 - mu)


@dataclass(frozen=True)
class MomentTrace:
    """Time series of the moment system: m_t, q_t and the ODE auxiliaries."""

    times: np.ndarray
    m: np.ndarray
    q: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    integrating_factor: np.ndarray

    def __post_init__(self):
        if np.any(self.q - self.m ** 2 < -_VAR_TOL):
            raise DomainError("moment trace violates variance nonnegativity")
        if self.times[0] == 0.0 and abs(self.integrating_factor[0] - 1.0) > _VAR_TOL:
            raise DomainError("integrating factor must start at 1")


def moment_trace(times: Sequence[float], m0: float, q0: float,
                 params: ModelParams, quad_step: float = 1e-3) -> MomentTrace:
    times = np.asarray(sorted(float(t) for t in times))
    if times.size == 0 or times[0] < 0.0:
        raise DomainError("times must be nonempty and nonnegative")
    m = mean_at(times, m0, params)
    alpha, beta = moment_auxiliaries(m, params)
    q = np.array([second_moment_at(t, q0, m0, params, quad_step) for t in times])
    if params.symmetric:
        factor = np.exp(-alpha * times)
    else:
        factor = np.empty_like(times)
        for k, t in enumerate(times):
            if t == 0.0:
                factor[k] = 1.0
                continue
            n_steps = max(2, math.ceil(t / quad_step))
            s = np.linspace(0.0, t, n_steps + 1)
            a_s, _ = moment_auxiliaries(mean_at(s, m0, params), params)
            factor[k] = np.exp(-cumulative_simpson(a_s, x=s, initial=0.0)[-1])
    return MomentTrace(times=times, m=m, q=q, alpha=np.atleast_1d(alpha),
                       beta=np.atleast_1d(beta), integrating_factor=factor)


def _check_init_mean(init: InitSpec, m0: float, tag: str) -> None:
    if init.mean_is_exact:
        if init.mean() != m0:
            raise DomainError(
                f"{tag}: init mean {init.mean()!r} does not equal m0={m0!r}")
    else:
        n = len(init.source)
        sd = math.sqrt(init.source.variance())
        if abs(init.mean() - m0) > 4.0 * sd / math.sqrt(n) + 1e-12:
            raise DomainError(
                f"{tag}: sample init mean {init.mean():.6g} inconsistent with m0={m0!r}")


def _check_snapshots(snapshot_times, t_end: float) -> Tuple[float, ...]:
    snaps = tuple(float(s) for s in ((t_end,) if snapshot_times is None else snapshot_times))
    if not snaps:
        snaps = (t_end,)
    if any(s2 < s1 for s1, s2 in zip(snaps, snaps[1:])):
        raise DomainError("snapshot_times must be sorted")
    if snaps[0] < 0.0 or snaps[-1] > t_end:
        raise DomainError("snapshot_times must lie in [0, t_end]")
    return snaps


def _advance_block(z: np.ndarray, t_next: np.ndarray, target: float,
                   rng: np.random.Generator, m0: float, params: ModelParams,
                   z_twin: Optional[np.ndarray] = None) -> None:
    """Apply all jumps with time <= target, in place.

    One uniform row and one exponential row are drawn per round for the whole
    block, used or not, so the draw consumed by a given particle never depends
    on what the other particles did.
    """
    mup, mum = params.mu_plus, params.mu_minus
    p_const = 0.5 * (1.0 + m0) if params.symmetric else None
    while True:
        active = t_next <= target
        if not active.any():
            return
        u = rng.random(z.size)
        incr = rng.exponential(1.0, z.size)
        p = p_const if p_const is not None else \
            0.5 * (1.0 + mean_at(t_next[active], m0, params))
        toward_plus = u[active] < p
        for state in (z,) if z_twin is None else (z, z_twin):
            za = state[active]
            state[active] = np.where(toward_plus, za + mup * (1.0 - za),
                                     za - mum * (1.0 + za))
        t_next[active] += incr[active]


def simulate_particles(n: int, t_end: float, m0: float, params: ModelParams,
                       init: InitSpec, seed: int,
                       snapshot_times: Optional[Sequence[float]] = None,
                       ) -> List[Tuple[float, SampleSet]]:
    """Simulate n independent copies of the limiting jump process.

    Event-driven per particle (exponential inter-jump times, rate 1); the
    time-dependent branch probability (1 + m_t)/2 is evaluated lazily from the
    closed form, so the only errors are statistical. Deterministic per
    (seed, particle index) and independent of worker count: particles live in
    fixed-size blocks, one substream per block.
    """
    if n < 1:
        raise DomainError(f"particle count must be positive, got {n}")
    if t_end < 0.0:
        raise DomainError(f"t_end must be nonnegative, got {t_end!r}")
    _check_init_mean(init, m0, "simulate_particles")
    snaps = _check_snapshots(snapshot_times, t_end)
    root = RandomSource(seed)
    per_snap = [np.empty(n) for _ in snaps]
    for b, start in enumerate(range(0, n, BLOCK_SIZE)):
        stop = min(start + BLOCK_SIZE, n)
        rng = root.substream(b).generator()
        z = init.draw(stop - start, rng)
        t_next = rng.exponential(1.0, stop - start)
        for k, target in enumerate(snaps):
            _advance_block(z, t_next, target, rng, m0, params)
            per_snap[k][start:stop] = z
    return [(t, SampleSet(vals)) for t, vals in zip(snaps, per_snap)]


def simulate_coupled_particles(n: int, t_end: float, m0: float,
                               params: ModelParams, init_a: InitSpec,
                               init_b: InitSpec, seed: int,
                               snapshot_times: Optional[Sequence[float]] = None,
                               ) -> List[Tuple[float, SampleSet, SampleSet]]:
    """Two particle systems driven by common jump events (shared clocks and
    shared signs), for contraction-rate measurements. Symmetric case only:
    both initial laws must have mean m0.
    """
    if not params.symmetric:
        raise DomainError("coupled runs require symmetric parameters")
    if n < 1:
        raise DomainError(f"particle count must be positive, got {n}")
    if t_end < 0.0:
        raise DomainError(f"t_end must be nonnegative, got {t_end!r}")
    _check_init_mean(init_a, m0, "simulate_coupled_particles (first init)")
    _check_init_mean(init_b, m0, "simulate_coupled_particles (second init)")
    snaps = _check_snapshots(snapshot_times, t_end)
    root = RandomSource(seed)
    per_snap_a = [np.empty(n) for _ in snaps]
    per_snap_b = [np.empty(n) for _ in snaps]
    for b, start in enumerate(range(0, n, BLOCK_SIZE)):
        stop = min(start + BLOCK_SIZE, n)
        rng = root.substream(b).generator()
        za = init_a.draw(stop - start, rng)
        zb = init_b.draw(stop - start, rng)
        t_next = rng.exponential(1.0, stop - start)
        for k, target in enumerate(snaps):
            _advance_block(za, t_next, target, rng, m0, params, z_twin=zb)
            per_snap_a[k][start:stop] = za
            per_snap_b[k][start:stop] = zb
    return [(t, SampleSet(a), SampleSet(bb))
            for t, a, bb in zip(snaps, per_snap_a, per_snap_b)]
