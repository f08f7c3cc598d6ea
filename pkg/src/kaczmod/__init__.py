"""Kaczmarz iteration in concrete Hilbert C*-module realizations.

Subpackages by layer: ``algebra`` (concrete C*-algebras), ``measures``
(probability measures and families with closed-form moments), ``csmodule``
(module realizations and inner products), ``kaczmarz`` (the iteration and
its exact identities), ``stationary`` (moment-series inversion and
classification), ``cauchy`` (disk-side transforms), ``cli`` (batch
experiment runner).
"""
from . import algebra, cauchy, csmodule, kaczmarz, kernels, measures, stationary
from .algebra import (
    AlgebraDescriptor,
    AlgebraElement,
    AlgebraKind,
    function_algebra,
    identity,
    is_positive,
    matrix_algebra,
    norm,
)
from .cauchy import (
    DiskSample,
    PowerSeries,
    analysis_operator,
    cauchy_transform,
    disk_sample,
    herglotz_b,
    herglotz_residual,
    inner_coefficient_check,
    isometry_defect,
    model_space_residual,
    normalized_cauchy,
    shift_orbit_residual,
)
from .csmodule import (
    AtomicL2,
    FreeModule,
    GridHilbert,
    ModuleVector,
    TrigModule,
    exponential_vector,
    frame_operator_solve,
    inner,
    is_unit_vector,
    module_norm,
    zero_vector,
)
from .kaczmarz import (
    ConjugatedSequence,
    ExplicitSequence,
    KaczmarzState,
    RunResult,
    StationaryExponentialSequence,
    auxiliary_sequence,
    kaczmarz_step,
    parseval_defect,
    periodic_contraction_norm,
    reconstruct_partial,
    run_to_tolerance,
)
from .measures import (
    AtomicMeasure,
    LebesgueMeasure,
    MeasureClass,
    MeasureFamily,
    MixtureMeasure,
    classify,
    family_moments,
    moment,
    moments,
)
from .stationary import (
    ClassificationReport,
    CoefficientSeries,
    EffectivityReport,
    FiberVerdict,
    effectivity_condition,
    fiber_classification,
    inverse_coefficients,
    kwapien_identity_check,
    sarason_sum,
)

__version__ = "0.1.0"
