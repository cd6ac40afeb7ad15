"""Uniformly sampled RingElement-valued functions of a real variable."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ring import RingElement

# A centred second-difference needs interior points on both sides.
MIN_STENCIL_LENGTH = 5


@dataclass(frozen=True)
class GridFunction:
    """Values of a RingElement-valued function on z0 + k*h, k = 0..len-1."""

    z0: float
    h: float
    values: tuple[RingElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.h <= 0:
            raise ValueError("grid step must be positive")
        if not self.values:
            raise ValueError("grid needs at least one value")

    @classmethod
    def sample(cls, fn: Callable[[float], RingElement], z0: float, h: float,
               n: int) -> "GridFunction":
        return cls(z0, h, tuple(fn(z0 + k * h) for k in range(n)))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k: int) -> RingElement:
        return self.values[k]

    def z(self, k: int) -> float:
        return self.z0 + k * self.h

    def zs(self) -> np.ndarray:
        return self.z0 + self.h * np.arange(len(self.values))

    def map(self, fn: Callable[[RingElement], RingElement]) -> "GridFunction":
        return GridFunction(self.z0, self.h, tuple(fn(v) for v in self.values))

    def same_grid(self, other: "GridFunction") -> bool:
        return (len(self) == len(other)
                and abs(self.z0 - other.z0) < 1e-12
                and abs(self.h - other.h) < 1e-15)

    def sup_norm(self, mask: Sequence[bool] | None = None) -> float:
        norms = self._masked_norms(mask)
        return max(norms) if norms else float("nan")

    def mean_norm(self, mask: Sequence[bool] | None = None) -> float:
        norms = self._masked_norms(mask)
        return sum(norms) / len(norms) if norms else float("nan")

    def _masked_norms(self, mask):
        if mask is None:
            return [v.norm() for v in self.values]
        return [v.norm() for v, ok in zip(self.values, mask) if ok]

    def allclose(self, other: "GridFunction", rtol=1e-9, atol=1e-12) -> bool:
        if not self.same_grid(other):
            return False
        return all(a.allclose(b, rtol=rtol, atol=atol)
                   for a, b in zip(self.values, other.values))


def require_stencil_length(f: GridFunction):
    if len(f) < MIN_STENCIL_LENGTH:
        raise ValueError(
            f"grid too short: {len(f)} points, need {MIN_STENCIL_LENGTH}")
