"""The Kaczmarz iteration for module-valued inner products, its auxiliary
sequence, and the exact diagnostic identities that make effectivity
checkable in finite realizations.

The update is

    x_0 = <x, e_0> e_0,     x_n = x_{n-1} + <x - x_{n-1}, e_n> e_n,

for unit vectors e_n (<e_n, e_n> = I, enforced at spec construction). The
auxiliary sequence

    g_0 = e_0,      g_n = e_n - sum_{k<n} <e_n, e_k> g_k

turns the iterate into the partial expansion sum_k <x, g_k> e_k, and the
Parseval defect <x,x> - sum_k <x,g_k><g_k,x> equals <x - x_n, x - x_n>.
Those identities are computed through independent routes here precisely so
tests can compare them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import algebra as alg
from . import csmodule as csm
from . import kernels
from .algebra import AlgebraElement
from .csmodule import (
    AtomicL2,
    ModuleDescriptor,
    ModuleVector,
    TrigModule,
    exponential_vector,
    inner,
    module_norm,
    zero_vector,
)
from .errors import SequenceExhaustedError, UnitVectorError
from .measures import moments as measure_moments

UNIT_VECTOR_TOL = 1e-9


class SequenceSpec:
    """A source of unit vectors e_0, e_1, ... in one module realization."""

    descriptor: ModuleDescriptor

    def __init__(self):
        self._aux_cache: list[ModuleVector] = []

    def term(self, n: int) -> ModuleVector:
        raise NotImplementedError

    def cross_gram(self, n: int, k: int) -> AlgebraElement:
        """<e_n, e_k>; overridden where a closed form exists."""
        return inner(self.term(n), self.term(k))

    def _require_unit(self, e: ModuleVector, n: int) -> ModuleVector:
        if not csm.is_unit_vector(e, UNIT_VECTOR_TOL):
            raise UnitVectorError(f"term {n} is not a unit vector")
        return e


class ExplicitSequence(SequenceSpec):
    """A finite list of vectors, optionally extended periodically."""

    def __init__(self, vectors, periodic: bool = False):
        super().__init__()
        vectors = tuple(vectors)
        if not vectors:
            raise ValueError("need at least one vector")
        desc = vectors[0].descriptor
        for i, v in enumerate(vectors):
            if v.descriptor != desc:
                raise ValueError("vectors live in different modules")
            self._require_unit(v, i)
        self.vectors = vectors
        self.periodic = bool(periodic)
        self.descriptor = desc

    def term(self, n: int) -> ModuleVector:
        if n < 0:
            raise ValueError("n must be >= 0")
        if self.periodic:
            return self.vectors[n % len(self.vectors)]
        if n >= len(self.vectors):
            raise SequenceExhaustedError(
                f"term {n} of a non-periodic sequence of length {len(self.vectors)}"
            )
        return self.vectors[n]


class StationaryExponentialSequence(SequenceSpec):
    """e_n = (multiplication by e^{2 pi i y})^n applied to the constant 1,
    i.e. the exponentials themselves, in a TrigModule or AtomicL2
    realization."""

    def __init__(self, descriptor):
        super().__init__()
        if not isinstance(descriptor, (TrigModule, AtomicL2)):
            raise TypeError("stationary exponentials need TrigModule or AtomicL2")
        self.descriptor = descriptor
        self._require_unit(exponential_vector(descriptor, 0), 0)

    def term(self, n: int) -> ModuleVector:
        return exponential_vector(self.descriptor, n)

    def cross_gram(self, n: int, k: int) -> AlgebraElement:
        out_alg = csm.coefficient_algebra(self.descriptor)
        if isinstance(self.descriptor, TrigModule):
            table = csm._trig_moments(self.descriptor)
            d = k - n
            vals = table[:, d] if d >= 0 else np.conj(table[:, -d])
            return AlgebraElement(out_alg, vals)
        mu = self.descriptor.measure
        t = np.asarray(mu.atoms)
        w = np.asarray(mu.weights)
        val = np.sum(w * np.exp(-2j * np.pi * (k - n) * t)) if k != n else 1.0
        return AlgebraElement(out_alg, [[val]])


class ConjugatedSequence(SequenceSpec):
    """Image of a base sequence under an invertible complex-linear map on
    the flattened module. Produced terms must still be unit vectors."""

    def __init__(self, base: SequenceSpec, mapping: np.ndarray):
        super().__init__()
        dim = csm.complex_dimension(base.descriptor)
        mapping = np.asarray(mapping, dtype=np.complex128)
        if mapping.shape != (dim, dim):
            raise ValueError(f"mapping must be {dim}x{dim}")
        if np.linalg.cond(mapping) > 1e12:
            raise ValueError("mapping is numerically singular")
        self.base = base
        self.mapping = mapping
        self.descriptor = base.descriptor

    def term(self, n: int) -> ModuleVector:
        e = csm.unflatten(
            self.descriptor, self.mapping @ csm.flatten(self.base.term(n))
        )
        return self._require_unit(e, n)


def auxiliary_sequence(spec: SequenceSpec, n: int) -> list[ModuleVector]:
    """g_0 .. g_n by the defining recursion; memoized on the spec."""
    if n < 0:
        raise ValueError("n must be >= 0")
    cache = spec._aux_cache
    while len(cache) <= n:
        m = len(cache)
        acc = spec.term(m).payload.copy()
        for k, g_k in enumerate(cache):
            acc -= (spec.cross_gram(m, k) * g_k).payload
        cache.append(ModuleVector(spec.descriptor, acc))
    return list(cache[: n + 1])


@dataclass
class KaczmarzState:
    """One in-progress run. ``step`` mutates the locally owned state;
    independent runs share nothing."""

    spec: SequenceSpec
    target: ModuleVector
    track_defect: bool = False
    n: int = field(default=-1, init=False)
    approximation: ModuleVector = field(init=False)
    residual_history: list[float] = field(init=False, default_factory=list)
    defect_history: list[AlgebraElement] = field(init=False, default_factory=list)

    def __post_init__(self):
        if self.target.descriptor != self.spec.descriptor:
            raise ValueError("target and sequence live in different modules")
        self.approximation = zero_vector(self.target.descriptor)
        self._defect_acc = inner(self.target, self.target) if self.track_defect else None

    def step(self) -> "KaczmarzState":
        n = self.n + 1
        e_n = self.spec.term(n)
        coeff = inner(self.target - self.approximation, e_n)
        self.approximation = self.approximation + coeff * e_n
        self.n = n
        self.residual_history.append(module_norm(self.target - self.approximation))
        if self.track_defect:
            g_n = auxiliary_sequence(self.spec, n)[n]
            p = inner(self.target, g_n)
            self._defect_acc = self._defect_acc - p * p.adjoint()
            self.defect_history.append(self._defect_acc)
        return self


def kaczmarz_step(state: KaczmarzState) -> KaczmarzState:
    """Advance the iteration by one index."""
    return state.step()


def reconstruct_partial(spec: SequenceSpec, x: ModuleVector, n: int) -> ModuleVector:
    """sum_{k<=n} <x, g_k> e_k, the closed form of the n-th iterate."""
    gs = auxiliary_sequence(spec, n)
    acc = zero_vector(spec.descriptor).payload.copy()
    for k, g_k in enumerate(gs):
        acc += (inner(x, g_k) * spec.term(k)).payload
    return ModuleVector(spec.descriptor, acc)


def _stationary_gram_coefficients(
    spec: StationaryExponentialSequence, x: ModuleVector, n: int
) -> np.ndarray:
    """<x, g_k> for k = 0..n through the moment/series route (no auxiliary
    vectors are materialized, so n may exceed the frequency bound).

    Shape (fibers, n+1) for TrigModule, (1, n+1) for AtomicL2.
    """
    desc = spec.descriptor
    if isinstance(desc, TrigModule):
        fam = desc.family
        top = desc.max_frequency
        table = np.stack([measure_moments(mu, max(n, top)) for mu in fam.fibers])
        out = np.empty((fam.size, n + 1), dtype=np.complex128)
        for i in range(fam.size):
            mom = table[i]
            c = kernels.invert_power_series(mom[: n + 1])
            # cross[j] = <x, e_j> = sum_i a_i moment(j - i)
            mseq = np.concatenate([np.conj(mom[top:0:-1]), mom[: n + 1]])
            cross = np.convolve(mseq, x.payload[:, i])[top : top + n + 1]
            out[i] = kernels.triangular_convolve(c, cross, n)
        return out
    mu = desc.measure
    t = np.asarray(mu.atoms)
    w = np.asarray(mu.weights)
    mom = measure_moments(mu, n)
    c = kernels.invert_power_series(mom)
    cross = np.exp(-2j * np.pi * np.outer(np.arange(n + 1), t)) @ (w * x.payload)
    return kernels.triangular_convolve(c, cross, n)[None, :]


def parseval_defect(spec: SequenceSpec, x: ModuleVector, n: int) -> AlgebraElement:
    """D_n = <x,x> - sum_{k<=n} <x,g_k><g_k,x>.

    Stationary exponential specs go through the coefficient recursion of
    the moment series, which is exact and fast at large n; every other
    spec accumulates the auxiliary vectors directly.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    gram = inner(x, x)
    if isinstance(spec, StationaryExponentialSequence):
        p = _stationary_gram_coefficients(spec, x, n)
        total = np.sum(np.abs(p) ** 2, axis=1)
        if isinstance(spec.descriptor, TrigModule):
            return AlgebraElement(gram.descriptor, gram.payload - total)
        return AlgebraElement(gram.descriptor, gram.payload - total[0])
    acc = gram
    for g_k in auxiliary_sequence(spec, n):
        p = inner(x, g_k)
        acc = acc - p * p.adjoint()
    return acc


def algebra_independence_gap(vectors) -> float:
    """Smallest singular value of the synthesis map (c_n) -> sum c_n e_n
    over algebra coefficients, on the flattened module.

    A gap above tolerance witnesses A-linear independence of the finite
    family; this is a numerical probe, not a certificate for the infinite
    sequence.
    """
    vectors = list(vectors)
    if not vectors:
        raise ValueError("need at least one vector")
    desc = vectors[0].descriptor
    dim = csm.complex_dimension(desc)
    out_alg = csm.coefficient_algebra(desc)
    alg_dim = int(np.prod(out_alg.shape))
    cols = []
    for e in vectors:
        for j in range(alg_dim):
            basis = np.zeros(alg_dim, dtype=np.complex128)
            basis[j] = 1.0
            coeff = AlgebraElement(out_alg, basis.reshape(out_alg.shape))
            cols.append(csm.flatten(coeff * e))
    mat = np.stack(cols, axis=1)
    if mat.shape[1] > mat.shape[0]:
        return 0.0  # more coefficient dimensions than module dimensions
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


def periodic_contraction_norm(vectors) -> float:
    """Spectral norm of (I - P_k) ... (I - P_0) on the flattened module,
    where P_n x = <x, e_n> e_n. Always <= 1; strictly < 1 exactly when the
    family algebraically generates."""
    vectors = list(vectors)
    if not vectors:
        raise ValueError("need at least one vector")
    desc = vectors[0].descriptor
    dim = csm.complex_dimension(desc)
    for i, e in enumerate(vectors):
        if not csm.is_unit_vector(e, UNIT_VECTOR_TOL):
            raise UnitVectorError(f"vector {i} is not a unit vector")
    prod = np.eye(dim, dtype=np.complex128)
    for e in vectors:
        proj = np.zeros((dim, dim), dtype=np.complex128)
        for j in range(dim):
            basis = np.zeros(dim, dtype=np.complex128)
            basis[j] = 1.0
            xj = csm.unflatten(desc, basis)
            proj[:, j] = csm.flatten(inner(xj, e) * e)
        prod = (np.eye(dim) - proj) @ prod
    return float(np.linalg.norm(prod, 2))


@dataclass
class RunResult:
    iterations: int
    residual_history: list[float]
    converged: bool
    state: KaczmarzState


def run_to_tolerance(
    spec: SequenceSpec,
    x: ModuleVector,
    tol: float,
    max_iter: int,
    track_defect: bool = False,
) -> RunResult:
    """Iterate until the residual falls below tol or max_iter steps ran.

    Non-convergence is an outcome, not an error: the caller inspects
    ``converged`` and the residual history.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    state = KaczmarzState(spec, x, track_defect=track_defect)
    converged = False
    for _ in range(max_iter):
        state.step()
        if state.residual_history[-1] <= tol:
            converged = True
            break
    return RunResult(state.n + 1, list(state.residual_history), converged, state)
