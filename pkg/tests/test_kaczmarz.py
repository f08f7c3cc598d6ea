import numpy as np
import pytest

from kaczmod import algebra as alg
from kaczmod import csmodule as csm
from kaczmod import kaczmarz as kz
from kaczmod import measures as ms
from kaczmod.errors import SequenceExhaustedError, UnitVectorError

HALF_HALF = ms.AtomicMeasure((0.0, 0.5), (0.5, 0.5))
DELTA0 = ms.AtomicMeasure((0.0,), (1.0,))
SKEW = ms.AtomicMeasure((0.0, 0.5), (0.7, 0.3))
MIX = ms.MixtureMeasure(0.5, DELTA0)


def single_fiber_trig(mu, top):
    return csm.TrigModule(ms.MeasureFamily((0.0,), (mu,)), top)


def rand_unitary(d, rng):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def coisometry_pair(rng, d=2):
    desc = csm.FreeModule(alg.matrix_algebra(d), 2)
    u, v, w = (rand_unitary(d, rng) for _ in range(3))
    e0 = csm.ModuleVector(desc, np.stack([u, v]) / np.sqrt(2))
    e1 = csm.ModuleVector(desc, np.stack([w, np.zeros((d, d))]))
    return [e0, e1]


# ------------------------------------------------------------------ steps

def test_two_orthonormal_steps_recover_exactly():
    desc = csm.AtomicL2(HALF_HALF)
    spec = kz.StationaryExponentialSequence(desc)
    rng = np.random.default_rng(0)
    x = csm.random_vector(desc, rng)
    state = kz.KaczmarzState(spec, x)
    kz.kaczmarz_step(state)
    kz.kaczmarz_step(state)
    assert state.residual_history[1] <= 1e-14
    assert csm.module_norm(state.approximation - x) <= 1e-14


def test_first_step_on_leading_vector():
    desc = csm.AtomicL2(HALF_HALF)
    spec = kz.StationaryExponentialSequence(desc)
    e0 = spec.term(0)
    state = kz.KaczmarzState(spec, e0).step()
    assert state.residual_history == [pytest.approx(0.0, abs=1e-15)]
    assert np.allclose(state.approximation.payload, e0.payload, atol=1e-15)


def test_zero_target_stays_zero():
    desc = csm.AtomicL2(HALF_HALF)
    spec = kz.StationaryExponentialSequence(desc)
    state = kz.KaczmarzState(spec, csm.zero_vector(desc))
    for _ in range(4):
        state.step()
    assert np.all(state.approximation.payload == 0.0)
    assert state.residual_history == [0.0] * 4


# -------------------------------------------------------------- auxiliary

def test_lebesgue_auxiliary_is_the_exponentials():
    desc = single_fiber_trig(ms.LebesgueMeasure(), 12)
    spec = kz.StationaryExponentialSequence(desc)
    for n, g in enumerate(kz.auxiliary_sequence(spec, 8)):
        assert np.array_equal(g.payload, spec.term(n).payload)


def test_point_mass_auxiliary_degenerates():
    desc = csm.AtomicL2(DELTA0)
    spec = kz.StationaryExponentialSequence(desc)
    gs = kz.auxiliary_sequence(spec, 3)
    for g in gs[1:]:
        assert csm.module_norm(g) <= 1e-12


def test_orthonormal_auxiliary_is_unchanged():
    rng = np.random.default_rng(1)
    desc = csm.FreeModule(alg.matrix_algebra(2), 2)
    q = rand_unitary(4, rng)
    vecs = [
        csm.ModuleVector(desc, q[2 * i : 2 * i + 2].reshape(2, 2, 2).transpose(1, 0, 2))
        for i in range(2)
    ]
    spec = kz.ExplicitSequence(vecs, periodic=False)
    for n, g in enumerate(kz.auxiliary_sequence(spec, 1)):
        assert csm.module_norm(g - vecs[n]) <= 1e-12


def test_auxiliary_matches_reversed_inverse_coefficients():
    # stationary closed form: g_n carries conj(c_{n-j}) on frequency j
    from kaczmod.stationary import inverse_coefficients

    desc = single_fiber_trig(MIX, 16)
    spec = kz.StationaryExponentialSequence(desc)
    gs = kz.auxiliary_sequence(spec, 10)
    series = inverse_coefficients(ms.moments(MIX, 10), 10)
    for n, g in enumerate(gs):
        want = np.zeros(17, dtype=complex)
        want[: n + 1] = np.conj(series.coefficients[: n + 1][::-1])
        assert np.allclose(g.payload[:, 0], want, atol=1e-12)


# ---------------------------------------------------------- exact identities

REALIZATIONS = ["atomic", "free", "trig"]


def make_spec_and_targets(kind, rng, n_targets=3):
    if kind == "atomic":
        atoms = tuple(np.sort(rng.uniform(size=4)))
        w = rng.uniform(0.2, 1.0, size=4)
        mu = ms.AtomicMeasure(atoms, tuple(w / w.sum()))
        desc = csm.AtomicL2(mu)
        spec = kz.StationaryExponentialSequence(desc)
    elif kind == "free":
        vecs = coisometry_pair(rng)
        desc = vecs[0].descriptor
        spec = kz.ExplicitSequence(vecs, periodic=True)
    else:
        grid = np.linspace(0.2, 0.8, 3)
        fam = ms.MeasureFamily.parametrized(
            grid,
            lambda s: ms.AtomicMeasure((0.0, 0.5), (s, 1.0 - s)),
            continuity_budget=2.0,
        )
        desc = csm.TrigModule(fam, 40)
        spec = kz.StationaryExponentialSequence(desc)
    targets = [csm.random_vector(desc, rng, degree=7) if kind == "trig"
               else csm.random_vector(desc, rng) for _ in range(n_targets)]
    return spec, targets


@pytest.mark.parametrize("kind", REALIZATIONS)
def test_step_orthogonality(kind):
    rng = np.random.default_rng(21)
    spec, targets = make_spec_and_targets(kind, rng)
    for x in targets:
        state = kz.KaczmarzState(spec, x)
        for n in range(20):
            state.step()
            gap = csm.inner(x - state.approximation, spec.term(n))
            assert alg.norm(gap) <= 1e-10


@pytest.mark.parametrize("kind", REALIZATIONS)
def test_partial_sum_identity(kind):
    rng = np.random.default_rng(22)
    spec, targets = make_spec_and_targets(kind, rng)
    for x in targets:
        state = kz.KaczmarzState(spec, x)
        for n in range(15):
            state.step()
            rebuilt = kz.reconstruct_partial(spec, x, n)
            assert csm.module_norm(state.approximation - rebuilt) <= 1e-10


@pytest.mark.parametrize("kind", REALIZATIONS)
def test_defect_equals_squared_residual(kind):
    rng = np.random.default_rng(23)
    spec, targets = make_spec_and_targets(kind, rng)
    for x in targets:
        state = kz.KaczmarzState(spec, x)
        for n in range(15):
            state.step()
            defect = kz.parseval_defect(spec, x, n)
            r = x - state.approximation
            assert alg.norm(defect - csm.inner(r, r)) <= 1e-9
            assert alg.is_positive(defect, 1e-9)


@pytest.mark.parametrize("kind", REALIZATIONS)
def test_residuals_never_increase(kind):
    rng = np.random.default_rng(24)
    spec, targets = make_spec_and_targets(kind, rng)
    for x in targets:
        hist = kz.run_to_tolerance(spec, x, 1e-13, 40).residual_history
        for a, b in zip(hist, hist[1:]):
            assert b <= a + 1e-12


def test_stationary_defect_fast_path_matches_generic():
    desc = single_fiber_trig(MIX, 60)
    spec = kz.StationaryExponentialSequence(desc)
    rng = np.random.default_rng(25)
    x = csm.random_vector(desc, rng, degree=5)
    for n in (0, 3, 17, 40):
        fast = kz.parseval_defect(spec, x, n)
        acc = csm.inner(x, x)
        for g in kz.auxiliary_sequence(spec, n):
            p = csm.inner(x, g)
            acc = acc - p * p.adjoint()
        assert alg.norm(fast - acc) <= 1e-10


def test_mixture_defect_has_positive_floor():
    # limit = |x|^2 - sum |<x,g_k>|^2 = 1/6 for x = e_1 over the half-and-half
    # mixture; the n = 10^4 evaluation is the oracle for the n = 200 value
    desc = single_fiber_trig(MIX, 250)
    spec = kz.StationaryExponentialSequence(desc)
    x = csm.exponential_vector(desc, 1)
    d200 = kz.parseval_defect(spec, x, 200)
    oracle = kz.parseval_defect(spec, x, 10_000)
    assert alg.norm(oracle) > 0.1
    assert abs(alg.norm(d200) - alg.norm(oracle)) <= 1e-12
    assert abs(alg.norm(oracle) - 1.0 / 6.0) <= 1e-12


# ------------------------------------------------------------- contraction

def test_contraction_orthonormal_basis_is_zero():
    desc = csm.AtomicL2(HALF_HALF)
    e0 = csm.exponential_vector(desc, 0)
    e1 = csm.exponential_vector(desc, 1)
    assert kz.periodic_contraction_norm([e0, e1]) <= 1e-14


def test_contraction_single_vector_is_one():
    desc = csm.AtomicL2(HALF_HALF)
    e0 = csm.exponential_vector(desc, 0)
    assert abs(kz.periodic_contraction_norm([e0]) - 1.0) <= 1e-12


def test_contraction_unitary_pair_below_one():
    rng = np.random.default_rng(26)
    vecs = coisometry_pair(rng)
    norm_m = kz.periodic_contraction_norm(vecs)
    assert norm_m < 1.0 - 1e-6


def test_contraction_gives_geometric_sweep_bound():
    rng = np.random.default_rng(27)
    vecs = coisometry_pair(rng)
    spec = kz.ExplicitSequence(vecs, periodic=True)
    norm_m = kz.periodic_contraction_norm(vecs)
    x = csm.random_vector(vecs[0].descriptor, rng)
    result = kz.run_to_tolerance(spec, x, 1e-12, 60)
    hist = result.residual_history
    x_norm = csm.module_norm(x)
    for s in range(1, len(hist) // 2 + 1):
        assert hist[2 * s - 1] <= norm_m**s * x_norm + 1e-9


# ------------------------------------------------------------------- runs

def test_lebesgue_recovers_trig_polynomial_at_degree():
    desc = single_fiber_trig(ms.LebesgueMeasure(), 10)
    spec = kz.StationaryExponentialSequence(desc)
    rng = np.random.default_rng(28)
    x = csm.random_vector(desc, rng, degree=3)
    result = kz.run_to_tolerance(spec, x, 1e-12, 10)
    assert result.iterations == 4  # steps 0..3
    assert result.residual_history[3] <= 1e-12


def test_two_atom_equal_weight_recovers_after_two_steps():
    desc = csm.AtomicL2(HALF_HALF)
    spec = kz.StationaryExponentialSequence(desc)
    rng = np.random.default_rng(29)
    x = csm.random_vector(desc, rng)
    result = kz.run_to_tolerance(spec, x, 1e-10, 5)
    assert result.converged
    assert result.iterations == 2
    assert result.residual_history[1] <= 1e-10


def test_mixture_run_stalls_at_floor():
    desc = single_fiber_trig(MIX, 200)
    spec = kz.StationaryExponentialSequence(desc)
    x = csm.exponential_vector(desc, 1)
    result = kz.run_to_tolerance(spec, x, 1e-3, 200)
    assert not result.converged
    assert result.iterations == 200
    floor = np.sqrt(alg.norm(kz.parseval_defect(spec, x, 10_000)))
    assert abs(result.residual_history[-1] - floor) <= 1e-9


# ------------------------------------------------------- basis equivalence

def test_orthonormal_generating_family_is_effective_and_independent():
    rng = np.random.default_rng(30)
    desc = csm.FreeModule(alg.matrix_algebra(2), 2)
    q = rand_unitary(4, rng)
    vecs = [
        csm.ModuleVector(desc, q[2 * i : 2 * i + 2].reshape(2, 2, 2).transpose(1, 0, 2))
        for i in range(2)
    ]
    assert kz.algebra_independence_gap(vecs) > 1e-6
    spec = kz.ExplicitSequence(vecs, periodic=True)
    x = csm.random_vector(desc, rng)
    result = kz.run_to_tolerance(spec, x, 1e-11, 2)
    assert result.converged
    for g, e in zip(kz.auxiliary_sequence(spec, 1), vecs):
        assert csm.module_norm(g - e) <= 1e-9


def test_effective_independent_family_has_orthogonal_terms():
    # contrapositive probe: the non-orthogonal unitary pair is effective,
    # so its periodic extension must fail A-linear independence
    rng = np.random.default_rng(31)
    vecs = coisometry_pair(rng)
    assert kz.periodic_contraction_norm(vecs) < 1.0  # effective
    pair_gap = kz.algebra_independence_gap(vecs)
    extended_gap = kz.algebra_independence_gap(
        [vecs[0], vecs[1], vecs[0], vecs[1]]
    )
    gram = csm.inner(vecs[0], vecs[1])
    if alg.norm(gram) > 1e-9:  # not orthogonal
        assert extended_gap <= 1e-9  # so independence must fail
    assert pair_gap > 1e-6  # the two-element family alone is independent


# ------------------------------------------------------------------ specs

def test_explicit_requires_unit_vectors():
    desc = csm.AtomicL2(HALF_HALF)
    bad = csm.ModuleVector(desc, [0.5, 0.5])
    with pytest.raises(UnitVectorError):
        kz.ExplicitSequence([bad])


def test_explicit_non_periodic_exhausts():
    desc = csm.AtomicL2(HALF_HALF)
    e0 = csm.exponential_vector(desc, 0)
    spec = kz.ExplicitSequence([e0], periodic=False)
    with pytest.raises(SequenceExhaustedError):
        spec.term(1)
    assert kz.ExplicitSequence([e0], periodic=True).term(5) is e0


def test_conjugated_sequence_preserves_units():
    rng = np.random.default_rng(32)
    desc = csm.AtomicL2(SKEW)
    spec = kz.StationaryExponentialSequence(desc)
    w = np.sqrt(np.asarray(SKEW.weights))
    q = rand_unitary(2, rng)
    mapping = q * w[None, :] / w[:, None]  # unitary for the weighted product
    conj = kz.ConjugatedSequence(spec, mapping)
    for n in range(4):
        assert csm.is_unit_vector(conj.term(n), 1e-9)
    bad = kz.ConjugatedSequence(spec, 2.0 * np.eye(2))
    with pytest.raises(UnitVectorError):
        bad.term(0)
