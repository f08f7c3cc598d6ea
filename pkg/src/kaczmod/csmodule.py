"""Concrete Hilbert C*-module realizations.

Four realizations cover everything the library computes with:

* ``FreeModule`` -- rank-m columns over a matrix or sampled-function
  algebra, inner product sum_i f_i g_i^*.
* ``AtomicL2`` -- functions on the atoms of an atomic measure; literally
  C^N with a weighted inner product, embedded as 1x1 matrices so that the
  algebra-valued contracts stay uniform.
* ``TrigModule`` -- trigonometric polynomials with coefficient functions
  over a sampled parameter space, one measure per fiber; the dense
  finitely supported submodule of the associated completion.
* ``GridHilbert`` -- continuous H'-valued functions sampled on a grid.

Vectors are immutable. Inner products are left-linear in the first
argument and conjugate-linear in the second; negative-frequency moments
use conjugate symmetry.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import algebra as alg
from .algebra import AlgebraDescriptor, AlgebraElement, AlgebraKind
from .errors import (
    DescriptorMismatchError,
    FrequencyOverflowError,
    RankDeficiencyError,
)
from .measures import AtomicMeasure, MeasureFamily, family_moments

# Dense fiberwise moment matrices are cached up to this many complex entries;
# larger TrigModule inner products stream through convolutions instead.
_DENSE_MOMENT_ENTRIES = 4_000_000


@dataclass(frozen=True)
class FreeModule:
    """A^rank with inner(f, g) = sum_i f_i * g_i^*."""

    algebra: AlgebraDescriptor
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")


@dataclass(frozen=True)
class AtomicL2:
    """L^2 of an atomic probability measure, stored by values at the atoms."""

    measure: AtomicMeasure


@dataclass(frozen=True)
class TrigModule:
    """Span of exponentials e^{2 pi i n y}, n <= max_frequency, with
    coefficient functions sampled over the family's parameter grid."""

    family: MeasureFamily
    max_frequency: int

    def __post_init__(self):
        if self.max_frequency < 1:
            raise ValueError("max_frequency must be >= 1")


@dataclass(frozen=True)
class GridHilbert:
    """C^fiber_dim-valued functions on a sampled compact space."""

    grid_size: int
    fiber_dim: int

    def __post_init__(self):
        if self.grid_size < 1 or self.fiber_dim < 1:
            raise ValueError("grid_size and fiber_dim must be >= 1")


ModuleDescriptor = Union[FreeModule, AtomicL2, TrigModule, GridHilbert]


def payload_shape(descriptor: ModuleDescriptor) -> tuple[int, ...]:
    if isinstance(descriptor, FreeModule):
        return (descriptor.rank,) + descriptor.algebra.shape
    if isinstance(descriptor, AtomicL2):
        return (len(descriptor.measure.atoms),)
    if isinstance(descriptor, TrigModule):
        return (descriptor.max_frequency + 1, descriptor.family.size)
    if isinstance(descriptor, GridHilbert):
        return (descriptor.grid_size, descriptor.fiber_dim)
    raise TypeError(f"not a module descriptor: {type(descriptor).__name__}")


def coefficient_algebra(descriptor: ModuleDescriptor) -> AlgebraDescriptor:
    """The algebra that inner products of this module land in."""
    if isinstance(descriptor, FreeModule):
        return descriptor.algebra
    if isinstance(descriptor, AtomicL2):
        return alg.matrix_algebra(1)
    if isinstance(descriptor, TrigModule):
        return alg.function_algebra(descriptor.family.size)
    if isinstance(descriptor, GridHilbert):
        return alg.function_algebra(descriptor.grid_size)
    raise TypeError(f"not a module descriptor: {type(descriptor).__name__}")


class ModuleVector:
    """An element of a concrete module realization. Immutable."""

    __slots__ = ("descriptor", "payload")

    def __init__(self, descriptor: ModuleDescriptor, payload):
        arr = np.asarray(payload, dtype=np.complex128)
        expected = payload_shape(descriptor)
        if arr.shape != expected:
            raise ValueError(f"payload shape {arr.shape}, expected {expected}")
        if not np.isfinite(arr).all():
            raise ValueError("payload contains non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "descriptor", descriptor)
        object.__setattr__(self, "payload", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleVector is immutable")

    def _check_peer(self, other):
        if not isinstance(other, ModuleVector):
            raise TypeError(f"expected ModuleVector, got {type(other).__name__}")
        if other.descriptor != self.descriptor:
            raise DescriptorMismatchError("vectors live in different modules")

    def __add__(self, other):
        self._check_peer(other)
        return ModuleVector(self.descriptor, self.payload + other.payload)

    def __sub__(self, other):
        self._check_peer(other)
        return ModuleVector(self.descriptor, self.payload - other.payload)

    def __neg__(self):
        return ModuleVector(self.descriptor, -self.payload)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex, np.number)):
            return ModuleVector(self.descriptor, self.payload * complex(scalar))
        return NotImplemented

    def __rmul__(self, other):
        """Left action: complex scalars or coefficient-algebra elements."""
        if isinstance(other, (int, float, complex, np.number)):
            return ModuleVector(self.descriptor, complex(other) * self.payload)
        if isinstance(other, AlgebraElement):
            return _apply_coefficient(other, self)
        return NotImplemented

    def __repr__(self):
        return f"ModuleVector({self.descriptor!r})"


def _apply_coefficient(a: AlgebraElement, f: ModuleVector) -> ModuleVector:
    desc = f.descriptor
    if a.descriptor != coefficient_algebra(desc):
        raise DescriptorMismatchError("coefficient from the wrong algebra")
    if isinstance(desc, FreeModule):
        if desc.algebra.kind is AlgebraKind.MATRIX:
            return ModuleVector(desc, np.einsum("ij,rjk->rik", a.payload, f.payload))
        return ModuleVector(desc, a.payload[None, :] * f.payload)
    if isinstance(desc, AtomicL2):
        return ModuleVector(desc, complex(a.payload[0, 0]) * f.payload)
    if isinstance(desc, TrigModule):
        return ModuleVector(desc, a.payload[None, :] * f.payload)
    if isinstance(desc, GridHilbert):
        return ModuleVector(desc, a.payload[:, None] * f.payload)
    raise TypeError(f"not a module descriptor: {type(desc).__name__}")


def zero_vector(descriptor: ModuleDescriptor) -> ModuleVector:
    return ModuleVector(descriptor, np.zeros(payload_shape(descriptor)))


@functools.lru_cache(maxsize=64)
def _trig_moments(descriptor: TrigModule) -> np.ndarray:
    """(fibers, F+1) table of nonnegative moments, read-only."""
    table = family_moments(descriptor.family, descriptor.max_frequency)
    table.setflags(write=False)
    return table


@functools.lru_cache(maxsize=16)
def _trig_moment_matrices(descriptor: TrigModule) -> np.ndarray | None:
    """(fibers, F+1, F+1) array with entry [x, n, k] = moment(mu_x, k - n),
    or None when that would be too large to keep around."""
    f = descriptor.max_frequency + 1
    m = descriptor.family.size
    if m * f * f > _DENSE_MOMENT_ENTRIES:
        return None
    table = _trig_moments(descriptor)
    diff = np.arange(f)[None, :] - np.arange(f)[:, None]  # k - n
    mats = np.where(
        diff >= 0,
        table[:, np.abs(diff)],
        np.conj(table[:, np.abs(diff)]),
    )
    mats.setflags(write=False)
    return mats


def _inner_trig(f: np.ndarray, g: np.ndarray, desc: TrigModule) -> np.ndarray:
    mats = _trig_moment_matrices(desc)
    if mats is not None:
        return np.einsum("nx,xnk,kx->x", f, mats, np.conj(g), optimize=True)
    # streaming path: sum_d moment(d) * corr(d) per fiber
    table = _trig_moments(desc)
    top = desc.max_frequency
    out = np.empty(desc.family.size, dtype=np.complex128)
    for x in range(desc.family.size):
        mom = table[x]
        mext = np.concatenate([np.conj(mom[::-1]), mom[1:]])  # index i -> d=i-F
        conv = np.convolve(f[:, x], np.conj(g[::-1, x]))  # conv[i] = corr_{F-i}
        out[x] = np.dot(mext[::-1], conv)
    return out


def inner(f: ModuleVector, g: ModuleVector) -> AlgebraElement:
    """Algebra-valued inner product, left-linear in ``f``."""
    if f.descriptor != g.descriptor:
        raise DescriptorMismatchError("vectors live in different modules")
    desc = f.descriptor
    out_alg = coefficient_algebra(desc)
    if isinstance(desc, FreeModule):
        if desc.algebra.kind is AlgebraKind.MATRIX:
            val = np.einsum("rij,rkj->ik", f.payload, np.conj(g.payload))
        else:
            val = np.sum(f.payload * np.conj(g.payload), axis=0)
        return AlgebraElement(out_alg, val)
    if isinstance(desc, AtomicL2):
        w = np.asarray(desc.measure.weights)
        val = np.sum(w * f.payload * np.conj(g.payload))
        return AlgebraElement(out_alg, [[val]])
    if isinstance(desc, TrigModule):
        return AlgebraElement(out_alg, _inner_trig(f.payload, g.payload, desc))
    if isinstance(desc, GridHilbert):
        val = np.sum(f.payload * np.conj(g.payload), axis=1)
        return AlgebraElement(out_alg, val)
    raise TypeError(f"not a module descriptor: {type(desc).__name__}")


def module_norm(f: ModuleVector) -> float:
    """sqrt of the algebra norm of inner(f, f)."""
    return float(np.sqrt(max(alg.norm(inner(f, f)), 0.0)))


def exponential_vector(descriptor: ModuleDescriptor, n: int) -> ModuleVector:
    """The exponential e^{2 pi i n y} in a TrigModule or AtomicL2 realization."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if isinstance(descriptor, TrigModule):
        if n > descriptor.max_frequency:
            raise FrequencyOverflowError(
                f"n={n} exceeds max_frequency={descriptor.max_frequency}"
            )
        payload = np.zeros(payload_shape(descriptor))
        payload[n, :] = 1.0
        return ModuleVector(descriptor, payload)
    if isinstance(descriptor, AtomicL2):
        t = np.asarray(descriptor.measure.atoms)
        return ModuleVector(descriptor, np.exp(2j * np.pi * n * t))
    raise TypeError("exponential vectors exist in TrigModule or AtomicL2 only")


def is_unit_vector(e: ModuleVector, tol: float) -> bool:
    """True iff norm(inner(e, e) - identity) <= tol."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    gram = inner(e, e)
    return alg.norm(gram - alg.identity(gram.descriptor)) <= tol


def complex_dimension(descriptor: ModuleDescriptor) -> int:
    """Dimension of the realization as a plain complex vector space."""
    if isinstance(descriptor, TrigModule):
        raise TypeError("TrigModule has a degenerate Gram form; not flattened")
    return int(np.prod(payload_shape(descriptor)))


def flatten(f: ModuleVector) -> np.ndarray:
    complex_dimension(f.descriptor)
    return f.payload.reshape(-1).copy()


def unflatten(descriptor: ModuleDescriptor, vec: np.ndarray) -> ModuleVector:
    return ModuleVector(descriptor, np.asarray(vec).reshape(payload_shape(descriptor)))


def apply_frame_operator(
    vectors: Sequence[ModuleVector], f: ModuleVector
) -> ModuleVector:
    """S(f) = sum_n inner(f, e_n) e_n over the finite family."""
    out = zero_vector(f.descriptor)
    for e in vectors:
        out = out + inner(f, e) * e
    return out


def frame_operator_matrix(vectors: Sequence[ModuleVector]) -> np.ndarray:
    """The frame operator as a complex matrix on the flattened module."""
    if not vectors:
        raise ValueError("need at least one vector")
    desc = vectors[0].descriptor
    dim = complex_dimension(desc)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        basis = np.zeros(dim, dtype=np.complex128)
        basis[j] = 1.0
        mat[:, j] = flatten(apply_frame_operator(vectors, unflatten(desc, basis)))
    return mat


def frame_operator_solve(
    vectors: Sequence[ModuleVector], x: ModuleVector
) -> ModuleVector:
    """Solve S(y) = x for the finite frame operator of ``vectors``.

    The family must algebraically generate the module; otherwise S is
    singular and a RankDeficiencyError reports the condition number.
    """
    for e in vectors:
        if e.descriptor != x.descriptor:
            raise DescriptorMismatchError("frame vectors and target disagree")
    mat = frame_operator_matrix(vectors)
    cond = float(np.linalg.cond(mat))
    if not np.isfinite(cond) or cond > 1e12:
        raise RankDeficiencyError("frame operator is singular", cond)
    y = unflatten(x.descriptor, np.linalg.solve(mat, flatten(x)))
    residual = module_norm(apply_frame_operator(vectors, y) - x)
    bound = 1e-9 * max(module_norm(x), 1e-300)
    if residual > bound:
        raise RankDeficiencyError(
            f"frame solve residual {residual:.3e} exceeds {bound:.3e}", cond
        )
    return y


def random_vector(
    descriptor: ModuleDescriptor,
    rng: np.random.Generator,
    degree: int | None = None,
) -> ModuleVector:
    """A reproducible random element; for TrigModule, ``degree`` caps the
    frequency support and coefficients are constant across fibers."""
    if isinstance(descriptor, TrigModule):
        top = descriptor.max_frequency if degree is None else degree
        if top > descriptor.max_frequency:
            raise FrequencyOverflowError("degree exceeds max_frequency")
        payload = np.zeros(payload_shape(descriptor), dtype=np.complex128)
        coeffs = rng.normal(size=top + 1) + 1j * rng.normal(size=top + 1)
        payload[: top + 1, :] = coeffs[:, None]
        return ModuleVector(descriptor, payload)
    shape = payload_shape(descriptor)
    return ModuleVector(descriptor, rng.normal(size=shape) + 1j * rng.normal(size=shape))
