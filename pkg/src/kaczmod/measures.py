"""Borel probability measures on [0,1) with closed-form Fourier moments,
and weakly continuous families of such measures over a sampled parameter
space.

Moments are never computed by quadrature: atomic measures sum over their
atoms, Lebesgue measure kills every nonzero frequency, and mixtures take
the convex combination. This keeps every downstream identity exact up to
float roundoff.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many atoms t_j in [0,1) with positive weights summing to 1."""

    atoms: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        atoms = tuple(float(t) for t in self.atoms)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if len(atoms) == 0:
            raise ValueError("atomic measure needs at least one atom")
        if len(atoms) != len(weights):
            raise ValueError("atoms and weights must have equal length")
        if len(set(atoms)) != len(atoms):
            raise ValueError("atoms must be pairwise distinct")
        if any(not (0.0 <= t < 1.0) for t in atoms):
            raise ValueError("atoms must lie in [0,1)")
        if any(w <= 0.0 for w in weights):
            raise ValueError("weights must be positive")
        if abs(sum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {sum(weights)!r}, not 1")


@dataclass(frozen=True)
class LebesgueMeasure:
    """Lebesgue measure on [0,1)."""


@dataclass(frozen=True)
class MixtureMeasure:
    """alpha * Lebesgue + (1 - alpha) * atomic_part, with 0 < alpha < 1."""

    alpha: float
    atomic_part: AtomicMeasure

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie strictly between 0 and 1")


MeasureModel = Union[AtomicMeasure, LebesgueMeasure, MixtureMeasure]


class MeasureClass(enum.Enum):
    SINGULAR = "singular"
    LEBESGUE = "lebesgue"
    NEITHER = "neither"


def classify(mu: MeasureModel) -> MeasureClass:
    """Structural classification; analytic detection lives in `stationary`."""
    if isinstance(mu, AtomicMeasure):
        return MeasureClass.SINGULAR
    if isinstance(mu, LebesgueMeasure):
        return MeasureClass.LEBESGUE
    if isinstance(mu, MixtureMeasure):
        return MeasureClass.NEITHER
    raise TypeError(f"not a measure model: {type(mu).__name__}")


def moment(mu: MeasureModel, n: int) -> complex:
    """Fourier moment: integral of exp(-2 pi i n y) d mu(y).

    Negative n is served through the conjugate symmetry of real measures.
    moment(mu, 0) is exactly 1 for every model.
    """
    n = int(n)
    if n == 0:
        return 1.0 + 0.0j
    if n < 0:
        return complex(np.conj(moment(mu, -n)))
    if isinstance(mu, AtomicMeasure):
        t = np.asarray(mu.atoms)
        w = np.asarray(mu.weights)
        return complex(np.sum(w * np.exp(-2j * np.pi * n * t)))
    if isinstance(mu, LebesgueMeasure):
        return 0.0 + 0.0j
    if isinstance(mu, MixtureMeasure):
        return (1.0 - mu.alpha) * moment(mu.atomic_part, n)
    raise TypeError(f"not a measure model: {type(mu).__name__}")


def moments(mu: MeasureModel, n_max: int) -> np.ndarray:
    """Vectorized moments for n = 0 .. n_max."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    freqs = np.arange(n_max + 1)
    if isinstance(mu, AtomicMeasure):
        t = np.asarray(mu.atoms)
        w = np.asarray(mu.weights)
        out = np.exp(-2j * np.pi * np.outer(freqs, t)) @ w.astype(np.complex128)
    elif isinstance(mu, LebesgueMeasure):
        out = np.zeros(n_max + 1, dtype=np.complex128)
    elif isinstance(mu, MixtureMeasure):
        out = (1.0 - mu.alpha) * moments(mu.atomic_part, n_max)
    else:
        raise TypeError(f"not a measure model: {type(mu).__name__}")
    out[0] = 1.0
    return out


class FamilyProvenance(enum.Enum):
    PER_FIBER = "per-fiber"
    PARAMETRIZED = "parametrized"


@dataclass(frozen=True)
class MeasureFamily:
    """One measure per sample point of a compact parameter space.

    Weak continuity is certified only at grid resolution: adjacent fibers
    must have moments within ``continuity_budget`` of each other for all
    frequencies up to ``n_check``. The budget is declared by the caller and
    echoed in reports; it is a sampled witness, not a proof.
    """

    parameter_grid: tuple[float, ...]
    fibers: tuple[MeasureModel, ...]
    provenance: FamilyProvenance = FamilyProvenance.PER_FIBER
    continuity_budget: float = np.inf
    n_check: int = 8

    def __post_init__(self):
        object.__setattr__(
            self, "parameter_grid", tuple(float(x) for x in self.parameter_grid)
        )
        object.__setattr__(self, "fibers", tuple(self.fibers))
        if len(self.fibers) != len(self.parameter_grid):
            raise ValueError("fibers and parameter_grid must have equal length")
        if len(self.fibers) == 0:
            raise ValueError("family needs at least one fiber")
        table = family_moments(self, self.n_check)
        jumps = np.abs(np.diff(table, axis=0))
        if jumps.size and np.max(jumps) > self.continuity_budget:
            raise ValueError(
                f"weak-continuity witness fails: moment jump {np.max(jumps):.3e} "
                f"exceeds budget {self.continuity_budget:.3e}"
            )

    @property
    def size(self) -> int:
        return len(self.fibers)

    @classmethod
    def parametrized(
        cls,
        parameter_grid: Sequence[float],
        fiber_of: Callable[[float], MeasureModel],
        continuity_budget: float,
        n_check: int = 8,
    ) -> "MeasureFamily":
        """Sample a continuous parametrization x -> mu_x on the grid."""
        fibers = tuple(fiber_of(float(x)) for x in parameter_grid)
        return cls(
            tuple(float(x) for x in parameter_grid),
            fibers,
            FamilyProvenance.PARAMETRIZED,
            continuity_budget,
            n_check,
        )


def family_moments(fam: MeasureFamily, n_max: int) -> np.ndarray:
    """Moment table, entry (i, n) = moment(fibers[i], n); column 0 is 1."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return np.stack([moments(mu, n_max) for mu in fam.fibers])
