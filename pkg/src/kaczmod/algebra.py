"""Concrete unital C*-algebras: complex matrix algebras and complex
functions sampled on a finite grid.

Elements are immutable; every operation returns a fresh value, so they are
safe to share between threads. Matrix norms go through a Hermitian
eigendecomposition (no randomized estimators) so results are reproducible
across platforms.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DescriptorMismatchError

DEFAULT_POSITIVITY_TOL = 1e-10


class AlgebraKind(enum.Enum):
    MATRIX = "matrix"
    SAMPLED_FUNCTION = "sampled-function"


@dataclass(frozen=True)
class AlgebraDescriptor:
    """Which concrete algebra an element belongs to.

    Exactly one of ``dimension`` (matrix side length) and ``grid_size``
    (number of sample points) is meaningful, depending on ``kind``.
    """

    kind: AlgebraKind
    dimension: int | None = None
    grid_size: int | None = None

    def __post_init__(self):
        if self.kind is AlgebraKind.MATRIX:
            if self.dimension is None or self.dimension < 1:
                raise ValueError("matrix algebra needs dimension >= 1")
            if self.grid_size is not None:
                raise ValueError("matrix algebra takes no grid_size")
        else:
            if self.grid_size is None or self.grid_size < 1:
                raise ValueError("sampled algebra needs grid_size >= 1")
            if self.dimension is not None:
                raise ValueError("sampled algebra takes no dimension")

    @property
    def shape(self) -> tuple[int, ...]:
        if self.kind is AlgebraKind.MATRIX:
            return (self.dimension, self.dimension)
        return (self.grid_size,)


def matrix_algebra(dimension: int) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.MATRIX, dimension=dimension)


def function_algebra(grid_size: int) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.SAMPLED_FUNCTION, grid_size=grid_size)


class AlgebraElement:
    """An element of a concrete unital C*-algebra.

    Payload is a complex d x d matrix or a length-m vector of sample
    values; all entries must be finite.
    """

    __slots__ = ("descriptor", "payload")

    def __init__(self, descriptor: AlgebraDescriptor, payload):
        arr = np.asarray(payload, dtype=np.complex128)
        if arr.shape != descriptor.shape:
            raise ValueError(
                f"payload shape {arr.shape} does not match descriptor {descriptor.shape}"
            )
        if not np.isfinite(arr).all():
            raise ValueError("payload contains non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "payload", arr)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    def _check_peer(self, other):
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.descriptor != self.descriptor:
            raise DescriptorMismatchError(
                f"{self.descriptor} vs {other.descriptor}"
            )

    def __add__(self, other):
        self._check_peer(other)
        return AlgebraElement(self.descriptor, self.payload + other.payload)

    def __sub__(self, other):
        self._check_peer(other)
        return AlgebraElement(self.descriptor, self.payload - other.payload)

    def __neg__(self):
        return AlgebraElement(self.descriptor, -self.payload)

    def __mul__(self, other):
        """Algebra product; complex scalars multiply entrywise."""
        if isinstance(other, (int, float, complex, np.number)):
            return AlgebraElement(self.descriptor, self.payload * complex(other))
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check_peer(other)
        if self.descriptor.kind is AlgebraKind.MATRIX:
            return AlgebraElement(self.descriptor, self.payload @ other.payload)
        return AlgebraElement(self.descriptor, self.payload * other.payload)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return AlgebraElement(self.descriptor, complex(other) * self.payload)
        return NotImplemented

    def adjoint(self) -> "AlgebraElement":
        if self.descriptor.kind is AlgebraKind.MATRIX:
            return AlgebraElement(self.descriptor, self.payload.conj().T)
        return AlgebraElement(self.descriptor, self.payload.conj())

    def __repr__(self):
        return f"AlgebraElement({self.descriptor.kind.value}, {self.payload!r})"


def identity(descriptor: AlgebraDescriptor) -> AlgebraElement:
    """The multiplicative unit of the algebra."""
    if descriptor.kind is AlgebraKind.MATRIX:
        return AlgebraElement(descriptor, np.eye(descriptor.dimension))
    return AlgebraElement(descriptor, np.ones(descriptor.grid_size))


def zero(descriptor: AlgebraDescriptor) -> AlgebraElement:
    return AlgebraElement(descriptor, np.zeros(descriptor.shape))


def scalar_element(descriptor: AlgebraDescriptor, value: complex) -> AlgebraElement:
    """value * unit, the canonical embedding of a complex scalar."""
    if descriptor.kind is AlgebraKind.MATRIX:
        return AlgebraElement(descriptor, complex(value) * np.eye(descriptor.dimension))
    return AlgebraElement(
        descriptor, np.full(descriptor.grid_size, complex(value))
    )


def norm(a: AlgebraElement) -> float:
    """C*-norm: operator 2-norm for matrices, sup of moduli for samples."""
    if a.descriptor.kind is AlgebraKind.SAMPLED_FUNCTION:
        return float(np.max(np.abs(a.payload)))
    gram = a.payload.conj().T @ a.payload
    gram = (gram + gram.conj().T) / 2.0
    top = float(np.linalg.eigvalsh(gram)[-1])
    return float(np.sqrt(max(top, 0.0)))


def is_positive(a: AlgebraElement, tol: float = DEFAULT_POSITIVITY_TOL) -> bool:
    """Positivity test: self-adjoint within tol and spectrum >= -tol."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    if a.descriptor.kind is AlgebraKind.SAMPLED_FUNCTION:
        if np.max(np.abs(a.payload.imag)) > tol:
            return False
        return bool(np.min(a.payload.real) >= -tol)
    if np.max(np.abs(a.payload - a.payload.conj().T)) > tol:
        return False
    herm = (a.payload + a.payload.conj().T) / 2.0
    return bool(np.linalg.eigvalsh(herm)[0] >= -tol)
