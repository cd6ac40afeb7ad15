"""Dense complex ring backends: scalars (d = 1) and d x d matrices.

Every formula in this package is written against the small ``RingElement``
interface, so the same matrix builders and residual checks run unchanged
over complex numbers, matrix rings, and the star-product polynomials of
:mod:`ncpain.moyal`.  Elements are immutable values: all operations return
fresh objects and are safe to share across threads.
"""

from __future__ import annotations

import abc

import numpy as np

# Relative conditioning floor: inverses are refused below smin/smax = 1e-12.
COND_FLOOR = 1e-12

_SCALAR_TYPES = (int, float, complex, np.integer, np.floating, np.complexfloating)


class DimensionMismatchError(ValueError):
    """Operands belong to different rings (size or deformation mismatch)."""


class NearSingularError(ArithmeticError):
    """Inverse refused because the operand is too ill-conditioned.

    ``condition`` carries the estimated condition number (``inf`` for an
    exactly singular operand).  ``where`` names the pivot block or grid
    point that failed when the error is raised by a composite computation.
    """

    def __init__(self, message: str, condition: float | None = None,
                 where: str | None = None):
        if where is not None:
            message = f"{message} [{where}]"
        super().__init__(message)
        self.condition = condition
        self.where = where


class RingElement(abc.ABC):
    """A value in an associative unital ring with a partial inverse.

    Python scalars act as central elements: ``2 * a``, ``a * 2j`` and
    ``a + 3`` (read as ``a + 3 * a.one_like()``) are all defined.
    """

    __slots__ = ()

    @abc.abstractmethod
    def _add(self, other: "RingElement") -> "RingElement": ...

    @abc.abstractmethod
    def _mul(self, other: "RingElement") -> "RingElement": ...

    @abc.abstractmethod
    def _scale(self, scalar: complex) -> "RingElement": ...

    @abc.abstractmethod
    def __neg__(self) -> "RingElement": ...

    @abc.abstractmethod
    def inv(self) -> "RingElement":
        """Two-sided ring inverse; raises NearSingularError when refused."""

    @abc.abstractmethod
    def norm(self) -> float: ...

    @abc.abstractmethod
    def one_like(self) -> "RingElement": ...

    @abc.abstractmethod
    def zero_like(self) -> "RingElement": ...

    @abc.abstractmethod
    def allclose(self, other: "RingElement", rtol: float = 1e-9,
                 atol: float = 1e-12) -> bool: ...

    @abc.abstractmethod
    def singular_extremes(self) -> tuple[float, float]:
        """(smallest, largest) singular-value estimates, for monitors."""

    def __add__(self, other):
        if isinstance(other, RingElement):
            return self._add(other)
        if isinstance(other, _SCALAR_TYPES):
            return self._add(self.one_like()._scale(complex(other)))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, RingElement):
            return self._add(-other)
        if isinstance(other, _SCALAR_TYPES):
            return self._add(self.one_like()._scale(-complex(other)))
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _SCALAR_TYPES):
            return (-self)._add(self.one_like()._scale(complex(other)))
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, RingElement):
            return self._mul(other)
        if isinstance(other, _SCALAR_TYPES):
            return self._scale(complex(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, _SCALAR_TYPES):
            return self._scale(complex(other))
        return NotImplemented

    def __pow__(self, exponent):
        if not isinstance(exponent, (int, np.integer)) or exponent < 0:
            return NotImplemented
        out = self.one_like()
        for _ in range(int(exponent)):
            out = out._mul(self)
        return out


class MatrixElement(RingElement):
    """Complex d x d matrix; d = 1 doubles as the scalar backend."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(
                f"expected a square array, got shape {arr.shape}")
        arr.setflags(write=False)
        self.data = arr

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @classmethod
    def eye(cls, d: int) -> "MatrixElement":
        return cls(np.eye(d))

    @classmethod
    def zeros(cls, d: int) -> "MatrixElement":
        return cls(np.zeros((d, d)))

    @classmethod
    def scalar(cls, value: complex) -> "MatrixElement":
        return cls(np.array([[value]]))

    def _require_same_ring(self, other):
        if not isinstance(other, MatrixElement):
            raise DimensionMismatchError(
                f"cannot combine MatrixElement with {type(other).__name__}")
        if other.d != self.d:
            raise DimensionMismatchError(
                f"dimension mismatch: {self.d} vs {other.d}")

    def _add(self, other):
        self._require_same_ring(other)
        return MatrixElement(self.data + other.data)

    def _mul(self, other):
        self._require_same_ring(other)
        return MatrixElement(self.data @ other.data)

    def _scale(self, scalar):
        return MatrixElement(scalar * self.data)

    def __neg__(self):
        return MatrixElement(-self.data)

    def inv(self):
        smin, smax = self.singular_extremes()
        if smin <= COND_FLOOR * smax or smax == 0.0:
            cond = float("inf") if smin == 0.0 else smax / smin
            raise NearSingularError(
                f"matrix is near-singular (condition ~ {cond:.3e})",
                condition=cond)
        return MatrixElement(np.linalg.inv(self.data))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def one_like(self):
        return MatrixElement.eye(self.d)

    def zero_like(self):
        return MatrixElement.zeros(self.d)

    def singular_extremes(self):
        if not np.all(np.isfinite(self.data)):
            return 0.0, float("inf")
        s = np.linalg.svd(self.data, compute_uv=False)
        return float(s[-1]), float(s[0])

    def condition(self) -> float:
        smin, smax = self.singular_extremes()
        if smin == 0.0:
            return float("inf")
        return smax / smin

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def allclose(self, other, rtol=1e-9, atol=1e-12):
        self._require_same_ring(other)
        return bool(np.allclose(self.data, other.data, rtol=rtol, atol=atol))

    def __repr__(self):
        if self.d == 1:
            return f"MatrixElement.scalar({self.data[0, 0]})"
        return f"MatrixElement({self.data.tolist()})"


def commutator(a: RingElement, b: RingElement) -> RingElement:
    """a*b - b*a."""
    return a * b - b * a


def anticommutator(a: RingElement, b: RingElement) -> RingElement:
    """a*b + b*a."""
    return a * b + b * a


def random_matrix(rng: np.random.Generator, d: int,
                  scale: float = 1.0) -> MatrixElement:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return MatrixElement(scale * z)


def random_invertible(rng: np.random.Generator, d: int, scale: float = 1.0,
                      max_condition: float = 1e4) -> MatrixElement:
    """Gaussian matrix, resampled until its condition number is moderate."""
    while True:
        m = random_matrix(rng, d, scale)
        if m.condition() <= max_condition:
            return m
