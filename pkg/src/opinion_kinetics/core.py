"""Shared domain types: model parameters, opinion samples, seeded random streams.

Opinions are plain 64-bit floats in [-1, 1]; every interaction map used in this
package is an affine contraction of [-1, 1] into itself, so containment needs
no clamping (debug builds assert it anyway).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

#: opinions are represented as plain floats in [-1, 1]
Opinion = float

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

#: particles handled per substream block; fixed so that the draws consumed by a
#: given particle never depend on worker count or total population size
BLOCK_SIZE = 1 << 16


class OpinionKineticsError(Exception):
    """Base class for all package errors."""


class DomainError(OpinionKineticsError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericsError(OpinionKineticsError, RuntimeError):
    """A solver detected numerical breakdown (e.g. runaway mass drift)."""


@dataclass(frozen=True)
class ModelParams:
    """Interaction strengths (mu_minus, mu_plus), both in (0, 1].

    ``mu_plus`` is the fraction moved toward +1 after a positive statement,
    ``mu_minus`` the fraction moved toward -1 after a negative one.
    """

    mu_minus: float
    mu_plus: float

    def __post_init__(self):
        for name in ("mu_minus", "mu_plus"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0) or not math.isfinite(v):
                raise DomainError(f"{name} must lie in (0, 1], got {v!r}")

    @property
    def symmetric(self) -> bool:
        return self.mu_minus == self.mu_plus

    @property
    def mu(self) -> float:
        """Common value in the symmetric case."""
        if not self.symmetric:
            raise DomainError("mu is only defined for symmetric parameters")
        return self.mu_plus


def validate_params(mu_minus: float, mu_plus: float) -> ModelParams:
    """Validate raw reals and return the typed parameter pair."""
    return ModelParams(float(mu_minus), float(mu_plus))


def rademacher(p, u):
    """Random sign: +1 where u < p, -1 otherwise.

    Works elementwise on arrays; ``p`` in [0, 1] and ``u`` in [0, 1) are the
    caller's responsibility.
    """
    out = np.where(np.asarray(u) < p, 1, -1)
    if np.isscalar(u) or np.ndim(u) == 0:
        return int(out)
    return out


def _mix64(z: int) -> int:
    # splitmix64 finalizer; bijective on 64-bit ints
    z &= _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed for sweep cell / replica ``index``."""
    return _mix64((seed * _GOLDEN + index + 1) & _MASK64)


@dataclass(frozen=True)
class RandomSource:
    """Splittable counter-based random stream, keyed by (seed, stream_id).

    Identical (seed, stream_id) pairs always produce identical number streams;
    distinct stream ids give statistically independent streams (distinct
    Philox keys). Substreams may be handed to different workers: results never
    depend on scheduling because every consumer owns its own key.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "RandomSource":
        """Child stream for worker/replica/block ``index``."""
        child = _mix64((self.stream_id * _GOLDEN + index + 1) & _MASK64)
        return RandomSource(self.seed, child)


@dataclass(frozen=True)
class SampleSet:
    """Finite multiset of opinions representing an empirical distribution."""

    values: np.ndarray
    is_sorted: bool = False

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("SampleSet requires a nonempty 1-d array")
        assert arr.min() >= -1.0 - 1e-12 and arr.max() <= 1.0 + 1e-12, \
            "opinions escaped [-1, 1]"
        if self.is_sorted:
            assert np.all(arr[1:] >= arr[:-1]), "sorted flag set on unsorted data"
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def sort(self) -> "SampleSet":
        if self.is_sorted:
            return self
        return SampleSet(np.sort(self.values), is_sorted=True)

    def mean(self) -> float:
        return float(self.values.mean())

    def variance(self) -> float:
        """Population variance (ddof=0)."""
        return float(self.values.var())


@dataclass(frozen=True)
class InitSpec:
    """Initial condition: uniform on [-1,1], a point mass, or resampling from
    an explicit sample."""

    kind: Literal["uniform", "point", "sample"]
    x0: float = 0.0
    source: Optional[SampleSet] = None

    def __post_init__(self):
        if self.kind not in ("uniform", "point", "sample"):
            raise DomainError(f"unknown init kind {self.kind!r}")
        if self.kind == "point" and not (-1.0 <= self.x0 <= 1.0):
            raise DomainError(f"point mass location must lie in [-1, 1], got {self.x0!r}")
        if self.kind == "sample" and self.source is None:
            raise DomainError("sample init requires a source SampleSet")

    @classmethod
    def uniform(cls) -> "InitSpec":
        return cls("uniform")

    @classmethod
    def point(cls, x0: float) -> "InitSpec":
        return cls("point", x0=float(x0))

    @classmethod
    def from_sample(cls, source: SampleSet) -> "InitSpec":
        return cls("sample", source=source)

    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.0
        if self.kind == "point":
            return self.x0
        return self.source.mean()

    @property
    def mean_is_exact(self) -> bool:
        """True when the law's mean is known exactly (uniform, point)."""
        return self.kind in ("uniform", "point")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(-1.0, 1.0, n)
        if self.kind == "point":
            return np.full(n, self.x0)
        return rng.choice(self.source.values, size=n, replace=True)
