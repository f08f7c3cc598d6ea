"""Batch experiment runner: declarative JSON configs in, reproducible CSV
and JSON artifacts out.

Configs are strict: unknown keys anywhere are rejected so typos cannot
silently change an experiment. Given the same config and seed, the CSV
outputs are byte-identical across runs; floats print as their shortest
round-trip decimals. A mathematically negative verdict (an obstructed
fiber, a stalled iteration) is a reported result, not a process failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import algebra as alg
from . import csmodule as csm
from . import kernels
from .cauchy import (
    disk_sample,
    herglotz_residual,
    inner_coefficient_check,
    isometry_defect,
    model_space_residual,
    normalized_cauchy,
    analysis_operator,
    shift_orbit_residual,
)
from .csmodule import AtomicL2, FreeModule, ModuleVector, TrigModule
from .errors import ConfigError, KaczmodError
from .kaczmarz import (
    ConjugatedSequence,
    ExplicitSequence,
    StationaryExponentialSequence,
    auxiliary_sequence,
    parseval_defect,
    periodic_contraction_norm,
    run_to_tolerance,
)
from .measures import (
    AtomicMeasure,
    LebesgueMeasure,
    MeasureFamily,
    MixtureMeasure,
    family_moments,
    moments,
)
from .stationary import (
    effectivity_condition,
    fiber_classification,
    inverse_coefficients,
    sarason_sum,
)

EXPERIMENTS = (
    "finite-periodic",
    "stationary-single",
    "stationary-family",
    "cauchy-diagnostics",
    "frame-orbit",
)

CSV_HEADERS = {
    "convergence": "iter,residual_norm,defect_norm",
    "classification": "fiber_index,parameter,sarason_sum,verdict",
    "series": "index,re,im",
    "series_family": "index,re,im,fiber_index",
    "identity_residuals": "check_name,n,j,residual",
}


def _fmt(x) -> str:
    """Shortest round-trip decimal for a float."""
    return repr(float(x))


# ---------------------------------------------------------------- config

@dataclass
class NumericSettings:
    max_iter: int = 200
    tol: float = 1e-10
    truncation: int = 100
    disk_radius: float = 0.9
    seed: int | None = None


@dataclass
class OutputSettings:
    directory: str | None = None
    formats: tuple[str, ...] = ("csv", "json")


@dataclass
class ExperimentConfig:
    experiment: str
    measure: dict | None
    family: dict | None
    module: dict
    target: dict | None
    numeric: NumericSettings
    output: OutputSettings
    raw: dict = field(repr=False, default_factory=dict)


def _require_keys(d: dict, allowed: set[str], context: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in {context}; allowed: {sorted(allowed)}"
        )


def _build_measure(spec: dict, context: str):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{context} must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "atomic":
            _require_keys(spec, {"kind", "atoms", "weights"}, context)
            return AtomicMeasure(tuple(spec["atoms"]), tuple(spec["weights"]))
        if kind == "lebesgue":
            _require_keys(spec, {"kind"}, context)
            return LebesgueMeasure()
        if kind == "mixture":
            _require_keys(spec, {"kind", "alpha", "atoms", "weights"}, context)
            return MixtureMeasure(
                float(spec["alpha"]),
                AtomicMeasure(tuple(spec["atoms"]), tuple(spec["weights"])),
            )
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc
    raise ConfigError(f"{context}.kind must be atomic, lebesgue, or mixture")


def _build_family(spec: dict) -> MeasureFamily:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("family must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "per-fiber":
            _require_keys(
                spec,
                {"kind", "grid", "fibers", "continuity_budget", "n_check"},
                "family",
            )
            fibers = tuple(
                _build_measure(f, f"family.fibers[{i}]")
                for i, f in enumerate(spec["fibers"])
            )
            return MeasureFamily(
                tuple(spec["grid"]),
                fibers,
                continuity_budget=float(spec.get("continuity_budget", np.inf)),
                n_check=int(spec.get("n_check", 8)),
            )
        if kind == "two-atom-parametrized":
            _require_keys(
                spec,
                {"kind", "grid", "atoms", "continuity_budget", "n_check"},
                "family",
            )
            atoms = tuple(spec.get("atoms", (0.0, 0.5)))
            grid = tuple(float(s) for s in spec["grid"])
            return MeasureFamily.parametrized(
                grid,
                lambda s: AtomicMeasure(atoms, (s, 1.0 - s)),
                continuity_budget=float(spec.get("continuity_budget", np.inf)),
                n_check=int(spec.get("n_check", 8)),
            )
    except ValueError as exc:
        raise ConfigError(f"family: {exc}") from exc
    raise ConfigError("family.kind must be per-fiber or two-atom-parametrized")


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment config; unknown fields are errors."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(
        raw,
        {"experiment", "measure", "family", "module", "target", "numeric", "output"},
        "config",
    )
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")

    numeric_raw = raw.get("numeric", {})
    _require_keys(
        numeric_raw,
        {"max_iter", "tol", "truncation", "disk_radius", "seed"},
        "numeric",
    )
    numeric = NumericSettings(
        max_iter=int(numeric_raw.get("max_iter", 200)),
        tol=float(numeric_raw.get("tol", 1e-10)),
        truncation=int(numeric_raw.get("truncation", 100)),
        disk_radius=float(numeric_raw.get("disk_radius", 0.9)),
        seed=None if numeric_raw.get("seed") is None else int(numeric_raw["seed"]),
    )
    if numeric.max_iter < 1:
        raise ConfigError("numeric.max_iter must be >= 1")
    if numeric.tol <= 0:
        raise ConfigError("numeric.tol must be > 0")
    if numeric.truncation < 1:
        raise ConfigError("numeric.truncation must be >= 1")

    output_raw = raw.get("output", {})
    _require_keys(output_raw, {"directory", "formats"}, "output")
    formats = tuple(output_raw.get("formats", ("csv", "json")))
    for f in formats:
        if f not in ("csv", "json"):
            raise ConfigError(f"output.formats entries must be csv or json, got {f!r}")
    output = OutputSettings(output_raw.get("directory"), formats)

    module_raw = raw.get("module", {})
    _require_keys(
        module_raw,
        {"realization", "max_frequency", "dimension", "rank"},
        "module",
    )

    target_raw = raw.get("target")
    if target_raw is not None:
        _require_keys(target_raw, {"kind", "index", "degree", "values"}, "target")
        if target_raw.get("kind") not in ("exponential", "random", "coefficients"):
            raise ConfigError("target.kind must be exponential, random, or coefficients")

    config = ExperimentConfig(
        experiment=experiment,
        measure=raw.get("measure"),
        family=raw.get("family"),
        module=module_raw,
        target=target_raw,
        numeric=numeric,
        output=output,
        raw=raw,
    )
    _validate_experiment_inputs(config)
    return config


def _needs_seed(config: ExperimentConfig) -> bool:
    if config.experiment in ("finite-periodic", "frame-orbit", "cauchy-diagnostics"):
        return True
    return bool(config.target and config.target.get("kind") == "random")


def _validate_experiment_inputs(config: ExperimentConfig) -> None:
    exp = config.experiment
    if exp in ("stationary-single", "cauchy-diagnostics", "frame-orbit"):
        if config.measure is None:
            raise ConfigError(f"{exp} requires a 'measure'")
        _build_measure(config.measure, "measure")
    if exp == "stationary-family":
        if config.family is None:
            raise ConfigError("stationary-family requires a 'family'")
        _build_family(config.family)
    if exp == "finite-periodic":
        if config.module.get("realization", "free") != "free":
            raise ConfigError("finite-periodic requires module.realization = free")
    if _needs_seed(config) and config.numeric.seed is None:
        raise ConfigError(f"{exp} uses random probes; numeric.seed is required")


# ---------------------------------------------------------------- targets

def _single_fiber_module(measure_spec: dict, max_frequency: int) -> TrigModule:
    mu = _build_measure(measure_spec, "measure")
    fam = MeasureFamily((0.0,), (mu,))
    return TrigModule(fam, max_frequency)


def _build_target(config: ExperimentConfig, descriptor, rng) -> ModuleVector:
    spec = config.target or {"kind": "exponential", "index": 1}
    kind = spec.get("kind")
    if kind == "exponential":
        return csm.exponential_vector(descriptor, int(spec.get("index", 1)))
    if kind == "random":
        degree = spec.get("degree")
        return csm.random_vector(
            descriptor, rng, None if degree is None else int(degree)
        )
    values = np.asarray([complex(re, im) for re, im in spec.get("values", [])])
    if isinstance(descriptor, TrigModule):
        payload = np.zeros(csm.payload_shape(descriptor), dtype=np.complex128)
        if values.size > descriptor.max_frequency + 1:
            raise ConfigError("target.values exceed the module frequency bound")
        payload[: values.size, :] = values[:, None]
        return ModuleVector(descriptor, payload)
    if isinstance(descriptor, AtomicL2):
        return ModuleVector(descriptor, values)
    raise ConfigError("coefficient targets need a trig or atomic-l2 module")


# ---------------------------------------------------------------- summary

@dataclass
class RunSummary:
    config: dict
    verdicts: dict
    scalars: dict
    context: dict
    files: list[str]
    wall_clock_seconds: float

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "verdicts": self.verdicts,
            "scalars": self.scalars,
            "context": self.context,
            "files": self.files,
            "wall_clock_seconds": self.wall_clock_seconds,
        }


def _convergence_rows(result) -> list[str]:
    rows = []
    defects = result.state.defect_history
    for i, res in enumerate(result.residual_history):
        d = alg.norm(defects[i]) if i < len(defects) else float("nan")
        rows.append(f"{i},{_fmt(res)},{_fmt(d)}")
    return rows


def _series_rows(coeffs: np.ndarray) -> tuple[str, list[str]]:
    if coeffs.ndim == 1:
        rows = [f"{n},{_fmt(v.real)},{_fmt(v.imag)}" for n, v in enumerate(coeffs)]
        return "series", rows
    rows = []
    for n in range(coeffs.shape[0]):
        for x in range(coeffs.shape[1]):
            v = coeffs[n, x]
            rows.append(f"{n},{_fmt(v.real)},{_fmt(v.imag)},{x}")
    return "series_family", rows


# ------------------------------------------------------------- experiments

def _run_stationary_single(config: ExperimentConfig, rng):
    n_trunc = config.numeric.truncation
    realization = config.module.get("realization", "trig")
    mu = _build_measure(config.measure, "measure")
    if realization == "atomic-l2":
        if not isinstance(mu, AtomicMeasure):
            raise ConfigError("atomic-l2 realization needs an atomic measure")
        descriptor = AtomicL2(mu)
    else:
        top = int(config.module.get("max_frequency", max(config.numeric.max_iter, 1)))
        descriptor = _single_fiber_module(config.measure, top)
    spec = StationaryExponentialSequence(descriptor)
    target = _build_target(config, descriptor, rng)

    result = run_to_tolerance(
        spec, target, config.numeric.tol, config.numeric.max_iter, track_defect=True
    )
    series = inverse_coefficients(moments(mu, n_trunc), n_trunc)
    sar = float(sarason_sum(series))
    report = effectivity_condition(spec, n_trunc, max(config.numeric.tol, 1e-12))
    fam = MeasureFamily((0.0,), (mu,))
    classification = fiber_classification(fam, n_trunc, 1e-8)

    records = {"convergence": _convergence_rows(result)}
    kind, rows = _series_rows(series.coefficients)
    records[kind] = rows
    records["classification"] = [
        f"0,{_fmt(0.0)},{_fmt(sar)},{classification.verdicts[0].value}"
    ]
    verdicts = {
        "fiber_classification": classification.verdicts[0].value,
        "effectivity_condition_holds": report.holds,
        "converged": result.converged,
    }
    scalars = {
        "sarason_sum": sar,
        "final_residual": result.residual_history[-1],
        "iterations": result.iterations,
        "worst_effectivity_residual": report.worst_residual,
        "worst_effectivity_k": report.worst_k,
    }
    return verdicts, scalars, records


def _run_stationary_family(config: ExperimentConfig, rng):
    n_trunc = config.numeric.truncation
    fam = _build_family(config.family)
    top = int(config.module.get("max_frequency", 64))
    descriptor = TrigModule(fam, top)
    spec = StationaryExponentialSequence(descriptor)
    target = _build_target(config, descriptor, rng)

    classification = fiber_classification(fam, n_trunc, 1e-8)
    defect = parseval_defect(spec, target, config.numeric.max_iter)
    sup_defect = float(np.max(np.abs(defect.payload)))
    series = inverse_coefficients(family_moments(fam, n_trunc).T, n_trunc)

    records = {
        "classification": [
            f"{i},{_fmt(fam.parameter_grid[i])},{_fmt(classification.sarason_sums[i])},"
            f"{classification.verdicts[i].value}"
            for i in range(fam.size)
        ]
    }
    kind, rows = _series_rows(series.coefficients)
    records[kind] = rows
    verdicts = {
        "effective": classification.effective,
        "fiber_verdicts": [v.value for v in classification.verdicts],
    }
    scalars = {
        "sup_parseval_defect": sup_defect,
        "min_sarason_sum": float(np.min(classification.sarason_sums)),
        "max_sarason_sum": float(np.max(classification.sarason_sums)),
    }
    return verdicts, scalars, records


def _random_unitary(dim: int, rng) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def coisometry_pair(dimension: int, rng) -> list[ModuleVector]:
    """The standard finite family: e_0 = [U;V]/sqrt(2), e_1 = [W;0] with
    unitary U, V, W."""
    desc = FreeModule(alg.matrix_algebra(dimension), 2)
    u, v, w = (_random_unitary(dimension, rng) for _ in range(3))
    zeros = np.zeros((dimension, dimension))
    e0 = ModuleVector(desc, np.stack([u / np.sqrt(2), v / np.sqrt(2)]))
    e1 = ModuleVector(desc, np.stack([w, zeros]))
    return [e0, e1]


def _run_finite_periodic(config: ExperimentConfig, rng):
    dimension = int(config.module.get("dimension", 2))
    vectors = coisometry_pair(dimension, rng)
    spec = ExplicitSequence(vectors, periodic=True)
    target = _build_target(config, vectors[0].descriptor, rng)

    contraction = periodic_contraction_norm(vectors)
    result = run_to_tolerance(
        spec, target, config.numeric.tol, config.numeric.max_iter, track_defect=True
    )
    records = {"convergence": _convergence_rows(result)}
    verdicts = {
        "generating": contraction < 1.0 - 1e-9,
        "converged": result.converged,
    }
    scalars = {
        "contraction_norm": contraction,
        "final_residual": result.residual_history[-1],
        "iterations": result.iterations,
        "sweeps": result.iterations // len(vectors),
    }
    return verdicts, scalars, records


def _run_cauchy_diagnostics(config: ExperimentConfig, rng):
    n_trunc = config.numeric.truncation
    mu = _build_measure(config.measure, "measure")
    descriptor = _single_fiber_module(
        config.measure, int(config.module.get("max_frequency", n_trunc))
    )
    spec = StationaryExponentialSequence(descriptor)
    target = _build_target(config, descriptor, rng)

    sample = disk_sample(100, config.numeric.disk_radius, config.numeric.seed)
    h_resid = herglotz_residual(mu, sample)
    coeff_gap = inner_coefficient_check(mu, min(n_trunc, 40))
    transform = normalized_cauchy(spec, target, n_trunc)
    iso = isometry_defect(spec, target, n_trunc)
    m_max = min(10, n_trunc)
    msr = model_space_residual(spec, target, n_trunc, m_max)

    kind, rows = _series_rows(transform.coefficients)
    records = {
        kind: rows,
        "identity_residuals": [
            f"herglotz,{len(sample.points)},0,{_fmt(h_resid)}",
            f"inner_coefficient,{min(n_trunc, 40)},0,{_fmt(coeff_gap)}",
            f"isometry_defect,{n_trunc},0,{_fmt(iso)}",
            f"model_space,{n_trunc},{m_max},{_fmt(msr)}",
        ],
    }
    verdicts = {"inner_candidate": transform.is_inner_candidate()}
    scalars = {
        "herglotz_residual": h_resid,
        "inner_coefficient_gap": coeff_gap,
        "isometry_defect": iso,
        "model_space_residual": msr,
    }
    return verdicts, scalars, records


def weighted_unitary(measure: AtomicMeasure, rng) -> np.ndarray:
    """A random unitary of the weighted inner product on the atoms."""
    w = np.sqrt(np.asarray(measure.weights))
    q = _random_unitary(len(measure.atoms), rng)
    return q * w[None, :] / w[:, None]


def weighted_adjoint(measure: AtomicMeasure, mapping: np.ndarray) -> np.ndarray:
    """Adjoint of a flattened map with respect to the weighted inner product."""
    w = np.asarray(measure.weights)
    return mapping.conj().T * w[None, :] / w[:, None]


def _run_frame_orbit(config: ExperimentConfig, rng):
    mu = _build_measure(config.measure, "measure")
    if not isinstance(mu, AtomicMeasure):
        raise ConfigError("frame-orbit requires an atomic measure")
    n_trunc = config.numeric.truncation
    descriptor = AtomicL2(mu)
    spec = StationaryExponentialSequence(descriptor)
    n_orbit = min(30, n_trunc)
    orbit_resid = shift_orbit_residual(spec, n_orbit)

    mapping = weighted_unitary(mu, rng)
    conj_spec = ConjugatedSequence(spec, mapping)
    gs = auxiliary_sequence(spec, n_orbit)
    conj_gs = auxiliary_sequence(conj_spec, n_orbit)
    recursion_resid = max(
        csm.module_norm(
            conj_gs[n] - csm.unflatten(descriptor, mapping @ csm.flatten(gs[n]))
        )
        for n in range(n_orbit + 1)
    )

    f = csm.random_vector(descriptor, rng)
    frame = [
        csm.unflatten(descriptor, mapping @ csm.flatten(g)) for g in gs
    ]
    lhs = analysis_operator(frame, f, n_orbit)
    adj_f = csm.unflatten(descriptor, weighted_adjoint(mu, mapping) @ csm.flatten(f))
    rhs = normalized_cauchy(spec, adj_f, n_orbit)
    analysis_resid = float(np.max(np.abs(lhs.coefficients - rhs.coefficients)))

    records = {
        "identity_residuals": [
            f"shift_orbit,{n_orbit},0,{_fmt(orbit_resid)}",
            f"conjugated_recursion,{n_orbit},0,{_fmt(recursion_resid)}",
            f"analysis_adjoint,{n_orbit},0,{_fmt(analysis_resid)}",
        ]
    }
    verdicts = {"orbit_identities_hold": max(orbit_resid, recursion_resid, analysis_resid) <= 1e-9}
    scalars = {
        "shift_orbit_residual": orbit_resid,
        "conjugated_recursion_residual": recursion_resid,
        "analysis_adjoint_residual": analysis_resid,
    }
    return verdicts, scalars, records


_RUNNERS = {
    "stationary-single": _run_stationary_single,
    "stationary-family": _run_stationary_family,
    "finite-periodic": _run_finite_periodic,
    "cauchy-diagnostics": _run_cauchy_diagnostics,
    "frame-orbit": _run_frame_orbit,
}


def run_experiment(config: ExperimentConfig) -> tuple[RunSummary, dict]:
    """Execute one experiment; deterministic given (config, seed)."""
    start = time.perf_counter()
    rng = np.random.default_rng(config.numeric.seed)
    verdicts, scalars, records = _RUNNERS[config.experiment](config, rng)
    wall = time.perf_counter() - start
    summary = RunSummary(
        config=config.raw,
        verdicts=verdicts,
        scalars=scalars,
        context={
            "max_iter": config.numeric.max_iter,
            "tol": config.numeric.tol,
            "truncation": config.numeric.truncation,
            "disk_radius": config.numeric.disk_radius,
            "seed": config.numeric.seed,
            "kernel_backend": kernels.BACKEND,
        },
        files=[],
        wall_clock_seconds=wall,
    )
    return summary, records


def emit_outputs(summary: RunSummary, records: dict, directory) -> list[str]:
    """Write CSV/JSON artifacts; CSV bytes are reproducible run to run."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in summary_formats(summary):
        for kind, rows in records.items():
            name = "series" if kind == "series_family" else kind
            path = out / f"{name}.csv"
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(CSV_HEADERS[kind] + "\n")
                for row in rows:
                    fh.write(row + "\n")
            written.append(str(path))
    summary.files = sorted(written)
    if "json" in summary_formats(summary):
        path = out / "summary.json"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(str(path))
    return sorted(written)


def summary_formats(summary: RunSummary) -> tuple[str, ...]:
    output = summary.config.get("output", {})
    return tuple(output.get("formats", ("csv", "json")))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kaczmod",
        description="Run a declarative Kaczmarz-module experiment from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument(
        "--out",
        default=None,
        help="output directory (default: config output.directory, "
        "then $KACZMOD_OUT, then '.')",
    )
    parser.add_argument("--max-iter", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--truncation", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if args.max_iter is not None:
            config.numeric.max_iter = args.max_iter
        if args.tol is not None:
            config.numeric.tol = args.tol
        if args.truncation is not None:
            config.numeric.truncation = args.truncation
        if args.seed is not None:
            config.numeric.seed = args.seed
        _validate_experiment_inputs(config)
        directory = (
            args.out
            or config.output.directory
            or os.environ.get("KACZMOD_OUT")
            or "."
        )
        summary, records = run_experiment(config)
        files = emit_outputs(summary, records, directory)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except KaczmodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{config.experiment}: wrote {len(files)} file(s) to {directory}")
    for key, value in sorted(summary.scalars.items()):
        print(f"  {key} = {value}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
