"""Disk-side analytics: Cauchy transforms, Herglotz functions, the
normalized Cauchy transform as a coefficient series, model-space
orthogonality, analysis operators of frames, and the shift-orbit identity
for auxiliary sequences.

All disk functions are evaluated in closed form per measure variant, and
all pairings on the Hardy side are truncated coefficient sums; no boundary
integrals appear anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement
from .csmodule import (
    AtomicL2,
    ModuleVector,
    TrigModule,
    exponential_vector,
    inner,
    module_norm,
)
from .errors import DescriptorMismatchError, FrequencyOverflowError, KaczmodError
from .kaczmarz import StationaryExponentialSequence, auxiliary_sequence
from .measures import (
    AtomicMeasure,
    LebesgueMeasure,
    MeasureModel,
    MixtureMeasure,
    moments as measure_moments,
)
from .stationary import _spec_moment_table, inverse_coefficients

MAX_DISK_RADIUS = 0.95


@dataclass(frozen=True)
class PowerSeries:
    """A truncated analytic function on the disk.

    ``coefficients`` has shape (N+1,) for a single function or
    (N+1, fibers) for a continuous family realized fiberwise.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coefficients, dtype=np.complex128)
        if arr.ndim not in (1, 2):
            raise ValueError("coefficients must be 1-d or 2-d")
        if not np.isfinite(arr).all():
            raise ValueError("coefficients contain non-finite entries")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @property
    def truncation(self) -> int:
        return self.coefficients.shape[0] - 1

    def squared_tail(self) -> np.ndarray:
        """sum_{n>=1} |b_n|^2 per fiber; <= 1 for inner-function candidates."""
        return np.sum(np.abs(self.coefficients[1:]) ** 2, axis=0)

    def is_inner_candidate(self, tol: float = 1e-9) -> bool:
        head = np.max(np.abs(self.coefficients[0]))
        return bool(head <= tol and np.max(self.squared_tail()) <= 1.0 + tol)


@dataclass(frozen=True)
class DiskSample:
    """Evaluation points strictly inside the disk, radius capped at 0.95."""

    points: tuple[complex, ...]

    def __post_init__(self):
        pts = tuple(complex(w) for w in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ValueError("need at least one point")
        top = max(abs(w) for w in pts)
        if top > MAX_DISK_RADIUS:
            raise ValueError(f"|w| up to {top} exceeds {MAX_DISK_RADIUS}")


def disk_sample(count: int, r_max: float, seed: int) -> DiskSample:
    """Reproducible sample of points with |w| <= r_max."""
    if not (0 < r_max <= MAX_DISK_RADIUS):
        raise ValueError("need 0 < r_max <= 0.95")
    rng = np.random.default_rng(seed)
    radii = r_max * np.sqrt(rng.uniform(size=count))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return DiskSample(tuple(radii * np.exp(1j * angles)))


def _require_inside(w: complex) -> complex:
    w = complex(w)
    if abs(w) >= 1.0:
        raise ValueError(f"|w| = {abs(w)} is not inside the unit disk")
    return w


def _atom_values(f, mu: AtomicMeasure) -> np.ndarray:
    """Values of the test function at the atoms."""
    if isinstance(f, ModuleVector):
        if not isinstance(f.descriptor, AtomicL2) or f.descriptor.measure != mu:
            raise DescriptorMismatchError("vector does not live over this measure")
        return f.payload
    coeffs = np.asarray(f, dtype=np.complex128).reshape(-1)
    t = np.asarray(mu.atoms)
    return np.exp(2j * np.pi * np.outer(t, np.arange(coeffs.size))) @ coeffs


def _trig_coefficients(f) -> np.ndarray:
    if isinstance(f, ModuleVector):
        raise TypeError(
            "measures with a Lebesgue part need trig-polynomial coefficients"
        )
    return np.asarray(f, dtype=np.complex128).reshape(-1)


def cauchy_transform(mu: MeasureModel, f, w: complex) -> complex:
    """[C_mu(f)](w): closed-form evaluation per measure variant.

    ``f`` is either a vector of values at the atoms (AtomicL2) or a 1-d
    array of trig-polynomial coefficients; measures with a Lebesgue part
    require the coefficient form.
    """
    w = _require_inside(w)
    if isinstance(mu, AtomicMeasure):
        vals = _atom_values(f, mu)
        t = np.asarray(mu.atoms)
        wts = np.asarray(mu.weights)
        return complex(np.sum(wts * vals / (1.0 - w * np.exp(-2j * np.pi * t))))
    if isinstance(mu, LebesgueMeasure):
        coeffs = _trig_coefficients(f)
        return complex(np.polyval(coeffs[::-1], w))
    if isinstance(mu, MixtureMeasure):
        coeffs = _trig_coefficients(f)
        return complex(
            mu.alpha * np.polyval(coeffs[::-1], w)
            + (1.0 - mu.alpha) * cauchy_transform(mu.atomic_part, coeffs, w)
        )
    raise TypeError(f"not a measure model: {type(mu).__name__}")


def herglotz_b(mu: MeasureModel, w: complex) -> complex:
    """b(w) = 1 - 1 / [C_mu(1)](w); bounded by one, vanishing at 0."""
    w = _require_inside(w)
    denom = cauchy_transform(mu, np.ones(1), w)
    if abs(denom) < 1e-14:
        raise KaczmodError(f"Cauchy transform of 1 vanishes at w={w}")
    return 1.0 - 1.0 / denom


def _herglotz_rhs(mu: MeasureModel, w: complex) -> complex:
    """Closed form of the moment integral (1+we^{-2pi ix})/(1-we^{-2pi ix})."""
    if isinstance(mu, AtomicMeasure):
        t = np.asarray(mu.atoms)
        wts = np.asarray(mu.weights)
        z = w * np.exp(-2j * np.pi * t)
        return complex(np.sum(wts * (1.0 + z) / (1.0 - z)))
    if isinstance(mu, LebesgueMeasure):
        return 1.0 + 0.0j
    if isinstance(mu, MixtureMeasure):
        return mu.alpha + (1.0 - mu.alpha) * _herglotz_rhs(mu.atomic_part, w)
    raise TypeError(f"not a measure model: {type(mu).__name__}")


def herglotz_residual(mu: MeasureModel, sample: DiskSample) -> float:
    """max over the sample of |(1+b)/(1-b) - closed-form moment integral|."""
    worst = 0.0
    for w in sample.points:
        b = herglotz_b(mu, w)
        lhs = (1.0 + b) / (1.0 - b)
        worst = max(worst, abs(lhs - _herglotz_rhs(mu, w)))
    return worst


def normalized_cauchy(
    spec: StationaryExponentialSequence, f: ModuleVector, n_max: int
) -> PowerSeries:
    """Coefficient series sum_n <f, g_n> w^n of the normalized transform.

    Single-measure realizations give scalar coefficients; a TrigModule over
    a family gives one coefficient function per index (fiberwise)."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    coeffs = _gram_coefficients(spec, f, n_max)
    if isinstance(spec.descriptor, AtomicL2):
        return PowerSeries(coeffs[:, 0])
    if spec.descriptor.family.size == 1:
        return PowerSeries(coeffs[:, 0])
    return PowerSeries(coeffs)


def _gram_coefficients(
    spec: StationaryExponentialSequence, f: ModuleVector, n_max: int
) -> np.ndarray:
    """<f, g_n> for n <= n_max as an (n_max+1, fibers) array."""
    gs = auxiliary_sequence(spec, n_max)
    rows = []
    for g in gs:
        val = inner(f, g)
        rows.append(val.payload.reshape(-1))
    return np.stack(rows)


def analysis_operator(
    frame: Sequence[ModuleVector], f: ModuleVector, n_max: int
) -> PowerSeries:
    """sum_n <f, frame[n]> w^n for an explicit frame list."""
    if len(frame) < n_max + 1:
        raise ValueError(f"need {n_max + 1} frame vectors, got {len(frame)}")
    rows = []
    for e in frame[: n_max + 1]:
        if e.descriptor != f.descriptor:
            raise DescriptorMismatchError("frame and argument disagree")
        rows.append(inner(f, e).payload.reshape(-1))
    coeffs = np.stack(rows)
    return PowerSeries(coeffs[:, 0]) if coeffs.shape[1] == 1 else PowerSeries(coeffs)


def isometry_defect(
    spec: StationaryExponentialSequence, f: ModuleVector, n_max: int
) -> float:
    """sup over fibers of |<f,f> - sum_{n<=N} |<f,g_n>|^2|.

    Monotone non-increasing in N: the partial sums climb toward the
    squared norm from below on effective fibers."""
    coeffs = _gram_coefficients(spec, f, n_max)
    gram = inner(f, f).payload.reshape(-1)
    defect = np.abs(gram - np.sum(np.abs(coeffs) ** 2, axis=0))
    return float(np.max(defect))


def _family_inner_coefficients(
    spec: StationaryExponentialSequence, n_max: int
) -> np.ndarray:
    """Taylor coefficients of the fiberwise inner-function candidates b^x,
    via b_n = -c_n for n >= 1, shape (n_max+1, fibers)."""
    table = _spec_moment_table(spec, n_max)
    series = inverse_coefficients(table.T, n_max)
    b = -series.coefficients
    b[0] = 0.0
    return b


def model_space_residual(
    spec: StationaryExponentialSequence,
    f: ModuleVector,
    n_max: int,
    m_max: int,
) -> float:
    """Orthogonality of the transform image against b * w^m, fiberwise.

    Pairs the truncated series sum <f,g_n> w^n with b^x(w) w^m for
    m <= m_max using coefficientwise Hardy pairings; returns the largest
    modulus over m and fibers. Exact up to the declared truncation."""
    if not (0 <= m_max <= n_max):
        raise ValueError("need 0 <= m_max <= n_max")
    coeffs = _gram_coefficients(spec, f, n_max)  # (N+1, fibers)
    b = _family_inner_coefficients(spec, n_max)  # (N+1, fibers)
    worst = 0.0
    for m in range(m_max + 1):
        # coefficient n of b * w^m is b_{n-m}
        shifted = np.zeros_like(b)
        shifted[m:] = b[: b.shape[0] - m]
        pairing = np.sum(coeffs * np.conj(shifted), axis=0)
        worst = max(worst, float(np.max(np.abs(pairing))))
    return worst


def _multiply_by_exponential(f: ModuleVector) -> ModuleVector:
    """Pointwise multiplication by e^{2 pi i y}."""
    desc = f.descriptor
    if isinstance(desc, AtomicL2):
        t = np.asarray(desc.measure.atoms)
        return ModuleVector(desc, f.payload * np.exp(2j * np.pi * t))
    if isinstance(desc, TrigModule):
        top = desc.max_frequency
        if np.max(np.abs(f.payload[top])) > 0.0:
            raise FrequencyOverflowError("shift would exceed max_frequency")
        shifted = np.zeros_like(f.payload)
        shifted[1:] = f.payload[:-1]
        return ModuleVector(desc, shifted)
    raise TypeError("exponential multiplication needs AtomicL2 or TrigModule")


def backward_shift_orbit_map(f: ModuleVector) -> ModuleVector:
    """T f = e^{2 pi i y} f - <e^{2 pi i y} f, 1> 1."""
    shifted = _multiply_by_exponential(f)
    e0 = exponential_vector(f.descriptor, 0)
    return shifted - inner(shifted, e0) * e0


def shift_orbit_residual(spec: StationaryExponentialSequence, n_max: int) -> float:
    """max_{n<=n_max} ||T g_n - g_{n+1}||: the auxiliary sequence is the
    orbit of the shift-and-recenter operator."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    desc = spec.descriptor
    if isinstance(desc, TrigModule) and n_max + 1 > desc.max_frequency:
        raise FrequencyOverflowError("n_max + 1 exceeds max_frequency")
    gs = auxiliary_sequence(spec, n_max + 1)
    worst = 0.0
    for n in range(n_max + 1):
        worst = max(worst, module_norm(backward_shift_orbit_map(gs[n]) - gs[n + 1]))
    return worst


def inner_coefficient_check(
    mu: MeasureModel,
    n_max: int,
    radius: float = 0.9,
    sample_size: int = 2048,
) -> float:
    """Compare two routes to the Taylor coefficients of the Herglotz
    function: closed-form disk evaluations resolved by a discrete Fourier
    sum on a circle of the given radius, against the negated reciprocal
    moment coefficients. Returns the largest |b_n + c_n| over 1 <= n <= N,
    including the |b_0| head term."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not (0 < radius <= MAX_DISK_RADIUS):
        raise ValueError("need 0 < radius <= 0.95")
    if sample_size < 4 * (n_max + 1):
        raise ValueError("sample_size too small for the requested degree")
    angles = 2.0 * np.pi * np.arange(sample_size) / sample_size
    ws = radius * np.exp(1j * angles)
    vals = np.array([herglotz_b(mu, w) for w in ws])
    b = np.fft.fft(vals)[: n_max + 1] / sample_size
    b /= radius ** np.arange(n_max + 1)
    series = inverse_coefficients(measure_moments(mu, n_max), n_max)
    c = series.coefficients
    worst = abs(b[0])
    worst = max(worst, float(np.max(np.abs(b[1:] + c[1:]))))
    return float(worst)

