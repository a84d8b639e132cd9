"""Stationary distribution in the symmetric case.

The equilibrium random variable is the weighted sign series
``Z = mu * sum_k (1-mu)^k B_k`` with i.i.d. signs ``B_k``; its law is a
(scaled) Bernoulli convolution. Depending on mu the law is uniform
(mu = 1/2), uniform on a Cantor-like fractal (mu > 1/2), or carries a
density (known in closed form at mu = 1 - 1/sqrt(2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Tuple, Union

import numpy as np

from .core import BLOCK_SIZE, DomainError, RandomSource, SampleSet
from .metrics import toscani_distance

#: the one mu in (0, 1/2) with a closed-form equilibrium density here
VOLCANO_MU = 1.0 - 1.0 / math.sqrt(2.0)
#: plateau half-width of that density: r = 4*mu - 1 = 3 - 2*sqrt(2)
VOLCANO_R = 3.0 - 2.0 * math.sqrt(2.0)

Scalar = Union[float, Fraction]


def _check_mu_open(mu: float) -> float:
    mu = float(mu)
    if not (0.0 < mu < 1.0):
        raise DomainError(f"mu must lie in (0, 1), got {mu!r}")
    return mu


def truncation_depth(mu: float, eps_trunc: float) -> int:
    """Smallest K with tail bound mu * sum_{k>=K} (1-mu)^k = (1-mu)^K <= eps."""
    if eps_trunc <= 0.0:
        raise DomainError(f"eps_trunc must be positive, got {eps_trunc!r}")
    if eps_trunc >= 1.0:
        return 1
    return max(1, math.ceil(math.log(eps_trunc) / math.log(1.0 - mu)))


def sample_equilibrium(mu: float, m0: float, eps_trunc: float, n: int,
                       seed: int) -> SampleSet:
    """Draw n i.i.d. truncated equilibrium variables.

    Each draw is ``mu * sum_{k<K} (1-mu)^k B_k`` with ``B_k`` a random sign
    equal to +1 with probability (1+m0)/2, and K chosen so the deterministic
    truncation error is at most ``eps_trunc``. Reproducible by (seed, particle
    index): particles are processed in fixed-size blocks, one substream each.
    """
    mu = _check_mu_open(mu)
    if not (-1.0 < m0 < 1.0):
        raise DomainError(f"m0 must lie in (-1, 1), got {m0!r}")
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    depth = truncation_depth(mu, eps_trunc)
    weights = mu * (1.0 - mu) ** np.arange(depth)
    p = 0.5 * (1.0 + m0)
    root = RandomSource(seed)
    out = np.empty(n)
    for b, start in enumerate(range(0, n, BLOCK_SIZE)):
        stop = min(start + BLOCK_SIZE, n)
        rng = root.substream(b).generator()
        u = rng.random((stop - start, depth))
        signs = np.where(u < p, 1.0, -1.0)
        out[start:stop] = signs @ weights
    return SampleSet(out)


def fixed_point_map(z, b, mu: float):
    """One step of the stationarity map: (1-mu) z + mu b."""
    return (1.0 - mu) * np.asarray(z) + mu * np.asarray(b) if np.ndim(z) or np.ndim(b) \
        else (1.0 - mu) * z + mu * b


@dataclass(frozen=True)
class CharFunction:
    """Truncated product characteristic function prod_n [cos(c q^n xi) - i m0 sin(c q^n xi)].

    ``scale`` is the base coefficient c and q = 1 - mu; the biased (m0 != 0)
    factors follow from the sign-series representation; only the zero-mean
    form reduces to a pure cosine product.
    """

    mu: float
    m0: float
    n_terms: int
    scale: float

    def __post_init__(self):
        if self.n_terms < 1:
            raise DomainError(f"n_terms must be >= 1, got {self.n_terms}")
        _check_mu_open(self.mu)

    def _coeffs(self) -> np.ndarray:
        return self.scale * (1.0 - self.mu) ** np.arange(self.n_terms)

    def __call__(self, xi):
        scalar = np.isscalar(xi) or np.ndim(xi) == 0
        args = np.multiply.outer(np.atleast_1d(np.asarray(xi, dtype=np.float64)),
                                 self._coeffs())
        factors = np.cos(args) - 1j * self.m0 * np.sin(args)
        vals = factors.prod(axis=-1)
        return complex(vals[0]) if scalar else vals


def char_fn_equilibrium(mu: float, n_terms: int, m0: float = 0.0) -> CharFunction:
    """Equilibrium characteristic function as a truncated product.

    For m0 = 0 this is prod_{n<n_terms} cos(mu (1-mu)^n xi); the omitted tail
    has all |arguments| <= mu (1-mu)^n_terms |xi|, so the relative truncation
    error is O((mu (1-mu)^n_terms xi)^2 / (1 - (1-mu)^2)).
    """
    mu = _check_mu_open(mu)
    return CharFunction(mu=mu, m0=float(m0), n_terms=int(n_terms), scale=mu)


def gaussian_char_fn(mu: float, n_terms: int) -> CharFunction:
    """Characteristic function of the standardized equilibrium Z / sigma.

    sigma = sqrt(mu / (2-mu)) for m0 = 0, which turns the product coefficients
    into sqrt(mu (2-mu)) (1-mu)^n.
    """
    mu = _check_mu_open(mu)
    return CharFunction(mu=mu, m0=0.0, n_terms=int(n_terms),
                        scale=math.sqrt(mu * (2.0 - mu)))


def standard_normal_char_fn(xi):
    return np.exp(-np.asarray(xi, dtype=np.float64) ** 2 / 2.0)


def d4_to_gaussian(mu: float, xi_grid: Sequence[float], n_terms: int) -> float:
    """d_4 distance between the standardized equilibrium and N(0, 1),
    approximated as a max over the supplied grid."""
    xi = np.asarray(xi_grid, dtype=np.float64)
    if xi.size == 0:
        raise DomainError("d4_to_gaussian requires a nonempty xi grid")
    f = gaussian_char_fn(mu, n_terms)
    return toscani_distance(f, standard_normal_char_fn, 4.0, xi)


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise disjoint closed intervals inside [-1, 1].

    Endpoints may be Fractions (exact construction levels) or floats.
    """

    intervals: Tuple[Tuple[Scalar, Scalar], ...]

    def __post_init__(self):
        iv = tuple((a, b) for a, b in self.intervals)
        if not iv:
            raise DomainError("IntervalSet must not be empty")
        prev_b = None
        for a, b in iv:
            if a > b:
                raise DomainError(f"empty interval [{a}, {b}]")
            if prev_b is not None and a <= prev_b:
                raise DomainError("intervals must be sorted and disjoint")
            prev_b = b
        object.__setattr__(self, "intervals", iv)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def total_length(self) -> Scalar:
        return sum(b - a for a, b in self.intervals)

    def endpoints(self) -> np.ndarray:
        """Flat float array [a0, b0, a1, b1, ...]."""
        return np.array([float(e) for ab in self.intervals for e in ab])

    def contains(self, x, inflate: float = 0.0) -> np.ndarray:
        """Elementwise membership in the union, with each interval widened by
        ``inflate`` on both sides (float comparison)."""
        flat = self.endpoints()
        flat[0::2] -= inflate
        flat[1::2] += inflate
        pos = np.searchsorted(flat, np.asarray(x, dtype=np.float64), side="left")
        inside = (pos % 2) == 1
        # searchsorted(side="left") puts exact left endpoints on the outside
        on_edge = np.isin(np.asarray(x, dtype=np.float64), flat[0::2])
        return inside | on_edge


def _cantor_mu(mu: Scalar) -> Scalar:
    if isinstance(mu, Rational) and not isinstance(mu, int):
        mu = Fraction(mu)
        ok = Fraction(1, 2) < mu < 1
    else:
        mu = float(mu)
        ok = 0.5 < mu < 1.0
    if not ok:
        raise DomainError(
            f"Cantor construction requires mu in (1/2, 1), got {mu}; "
            "for mu <= 1/2 the two affine images overlap")
    return mu


def cantor_level(mu: Scalar, n: int) -> IntervalSet:
    """Level-n set of the fractal support construction for mu > 1/2.

    Level 0 is [-1, 1]; each level maps the previous one through
    x -> (1-mu) x - mu and x -> (1-mu) x + mu, giving 2^n disjoint closed
    intervals of length 2 (1-mu)^n each. Exact Fraction endpoints when mu is
    given as a Fraction.
    """
    mu = _cantor_mu(mu)
    if n < 0:
        raise DomainError(f"level must be >= 0, got {n}")
    if n > 24:
        raise DomainError(f"level {n} would enumerate 2^{n} intervals; capped at 24")
    one = Fraction(1) if isinstance(mu, Fraction) else 1.0
    lam = one - mu
    intervals = [(-one, one)]
    for _ in range(n):
        lo = [(lam * a - mu, lam * b - mu) for a, b in intervals]
        hi = [(lam * a + mu, lam * b + mu) for a, b in intervals]
        intervals = lo + hi  # mu > 1/2 keeps the two halves ordered and disjoint
    return IntervalSet(tuple(intervals))


def cantor_total_length(mu: Scalar, n: int) -> Scalar:
    """Lebesgue measure of the level-n set: 2 (2 (1-mu))^n, exact for
    Fraction inputs. Tends to 0 since 2 (1-mu) < 1."""
    mu = _cantor_mu(mu)
    if n < 0:
        raise DomainError(f"level must be >= 0, got {n}")
    one = Fraction(1) if isinstance(mu, Fraction) else 1.0
    two = one + one
    return two * (two * (one - mu)) ** n


def hausdorff_dimension(mu: float) -> float:
    """Fractal dimension ln 2 / ln(1/(1-mu)) of the self-similar support.

    Defined on [1/2, 1): the value 1 at mu = 1/2 is the continuous boundary
    of the fractal regime.
    """
    mu = float(mu)
    if not (0.5 <= mu < 1.0):
        raise DomainError(f"hausdorff_dimension requires mu in [1/2, 1), got {mu!r}")
    return math.log(2.0) / math.log(1.0 / (1.0 - mu))


def volcano_density(x):
    """Closed-form equilibrium density at mu = 1 - 1/sqrt(2), m0 = 0.

    Flat plateau of height 1/(1+r) on [-r, r] with linear shoulders vanishing
    at +-1, where r = 4 mu - 1 = 3 - 2 sqrt(2).
    """
    arr = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(arr) > 1.0):
        raise DomainError("volcano_density is defined on [-1, 1]")
    r = VOLCANO_R
    plateau = 1.0 / (1.0 + r)
    shoulder = (1.0 - np.abs(arr)) / ((1.0 + r) * (1.0 - r))
    out = np.where(np.abs(arr) <= r, plateau, shoulder)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def stationary_mean_and_variance(mu: float, m0: float) -> Tuple[float, float]:
    """(mean, variance) of the equilibrium law: (m0, mu (1 - m0^2) / (2-mu))."""
    mu = _check_mu_open(mu)
    return m0, mu * (1.0 - m0 * m0) / (2.0 - mu)
