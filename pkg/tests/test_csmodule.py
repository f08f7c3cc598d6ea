import numpy as np
import pytest

from kaczmod import algebra as alg
from kaczmod import csmodule as csm
from kaczmod import measures as ms
from kaczmod.errors import (
    DescriptorMismatchError,
    FrequencyOverflowError,
    RankDeficiencyError,
)

HALF_HALF = ms.AtomicMeasure((0.0, 0.5), (0.5, 0.5))
DELTA0 = ms.AtomicMeasure((0.0,), (1.0,))


def rand_unitary(d, rng):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def two_atom_trig(max_frequency=8, fibers=3):
    grid = np.linspace(0.2, 0.8, fibers)
    fam = ms.MeasureFamily.parametrized(
        grid,
        lambda s: ms.AtomicMeasure((0.0, 0.5), (s, 1.0 - s)),
        continuity_budget=2.0,
    )
    return csm.TrigModule(fam, max_frequency)


def brute_trig_inner(f, g, desc):
    """Triple-loop oracle for TrigModule inner products."""
    fam = desc.family
    out = np.zeros(fam.size, dtype=complex)
    for x, mu in enumerate(fam.fibers):
        for n in range(desc.max_frequency + 1):
            for k in range(desc.max_frequency + 1):
                out[x] += (
                    f.payload[n, x]
                    * np.conj(g.payload[k, x])
                    * ms.moment(mu, k - n)
                )
    return out


def test_atomic_inner_example():
    desc = csm.AtomicL2(HALF_HALF)
    e0 = csm.exponential_vector(desc, 0)
    e1 = csm.exponential_vector(desc, 1)
    # 1/2 (1*1) + 1/2 (1*(-1)) = 0
    assert abs(csm.inner(e0, e1).payload[0, 0]) <= 1e-15
    assert np.allclose(e1.payload, [1.0, -1.0], atol=1e-15)


def test_grid_hilbert_constant_vectors():
    desc = csm.GridHilbert(4, 3)
    rng = np.random.default_rng(2)
    u = rng.normal(size=3) + 1j * rng.normal(size=3)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    f = csm.ModuleVector(desc, np.tile(u, (4, 1)))
    g = csm.ModuleVector(desc, np.tile(v, (4, 1)))
    val = csm.inner(f, g).payload
    assert np.allclose(val, np.vdot(v, u), atol=1e-14)


def test_trig_inner_over_point_mass_is_all_ones():
    fam = ms.MeasureFamily((0.0, 1.0), (DELTA0, DELTA0))
    desc = csm.TrigModule(fam, 6)
    e0 = csm.exponential_vector(desc, 0)
    for n in range(7):
        en = csm.exponential_vector(desc, n)
        assert np.allclose(csm.inner(e0, en).payload, 1.0, atol=1e-15)


def test_trig_inner_matches_brute_force():
    desc = two_atom_trig(5, 3)
    rng = np.random.default_rng(4)
    for _ in range(5):
        f = csm.ModuleVector(
            desc, rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
        )
        g = csm.ModuleVector(
            desc, rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
        )
        want = brute_trig_inner(f, g, desc)
        assert np.allclose(csm.inner(f, g).payload, want, atol=1e-12)


def test_trig_streaming_path_matches_dense(monkeypatch):
    desc = two_atom_trig(7, 2)
    rng = np.random.default_rng(6)
    f = csm.random_vector(desc, rng)
    g = csm.random_vector(desc, rng)
    dense = csm.inner(f, g).payload
    monkeypatch.setattr(csm, "_DENSE_MOMENT_ENTRIES", 0)
    csm._trig_moment_matrices.cache_clear()
    streamed = csm.inner(f, g).payload
    csm._trig_moment_matrices.cache_clear()
    assert np.allclose(dense, streamed, atol=1e-12)


def test_atomic_inner_agrees_with_weighted_sum():
    rng = np.random.default_rng(8)
    atoms = tuple(np.sort(rng.uniform(size=5)))
    w = rng.uniform(0.2, 1.0, size=5)
    mu = ms.AtomicMeasure(atoms, tuple(w / w.sum()))
    desc = csm.AtomicL2(mu)
    f = csm.random_vector(desc, rng)
    g = csm.random_vector(desc, rng)
    want = sum(
        wt * fv * np.conj(gv) for wt, fv, gv in zip(mu.weights, f.payload, g.payload)
    )
    assert abs(csm.inner(f, g).payload[0, 0] - want) <= 1e-15 * abs(want)


def test_module_norm_examples():
    desc = csm.AtomicL2(HALF_HALF)
    assert csm.module_norm(csm.zero_vector(desc)) == 0.0
    f = csm.ModuleVector(desc, [2.0, 0.0])
    assert abs(csm.module_norm(f) - np.sqrt(2)) <= 1e-15
    trig = two_atom_trig()
    assert abs(csm.module_norm(csm.exponential_vector(trig, 0)) - 1.0) <= 1e-15


def test_exponential_vectors_are_units():
    trig = two_atom_trig()
    for n in range(5):
        assert csm.is_unit_vector(csm.exponential_vector(trig, n), 1e-12)
    with pytest.raises(FrequencyOverflowError):
        csm.exponential_vector(trig, 9)
    assert not csm.is_unit_vector(csm.zero_vector(trig), 0.5)


def test_unitary_pair_is_unit_vector():
    # [U/sqrt2; V/sqrt2] with unitary U, V satisfies <e,e> = I
    rng = np.random.default_rng(10)
    desc = csm.FreeModule(alg.matrix_algebra(2), 2)
    u, v = rand_unitary(2, rng), rand_unitary(2, rng)
    e = csm.ModuleVector(desc, np.stack([u, v]) / np.sqrt(2))
    assert csm.is_unit_vector(e, 1e-12)


def test_inner_properties_random():
    rng = np.random.default_rng(12)
    descs = [
        csm.FreeModule(alg.matrix_algebra(2), 3),
        csm.FreeModule(alg.function_algebra(4), 2),
        csm.AtomicL2(HALF_HALF),
        two_atom_trig(4, 2),
        csm.GridHilbert(3, 2),
    ]
    for desc in descs:
        out_alg = csm.coefficient_algebra(desc)
        for _ in range(5):
            f, g, h = (csm.random_vector(desc, rng) for _ in range(3))
            gram = csm.inner(f, f)
            assert alg.is_positive(gram, 1e-10)
            sym = csm.inner(f, g) - csm.inner(g, f).adjoint()
            assert alg.norm(sym) <= 1e-12
            # left linearity over the coefficient algebra
            a = alg.AlgebraElement(
                out_alg,
                rng.normal(size=out_alg.shape) + 1j * rng.normal(size=out_alg.shape),
            )
            b = alg.AlgebraElement(
                out_alg,
                rng.normal(size=out_alg.shape) + 1j * rng.normal(size=out_alg.shape),
            )
            lhs = csm.inner(a * f + b * g, h)
            rhs = a * csm.inner(f, h) + b * csm.inner(g, h)
            assert alg.norm(lhs - rhs) <= 1e-10 * max(1.0, alg.norm(lhs))
            # Cauchy-Schwarz
            assert alg.norm(csm.inner(f, g)) <= (
                csm.module_norm(f) * csm.module_norm(g) + 1e-9
            )


def test_frame_operator_orthonormal_is_identity():
    desc = csm.FreeModule(alg.matrix_algebra(2), 2)
    eye = np.eye(2)
    zero = np.zeros((2, 2))
    e0 = csm.ModuleVector(desc, np.stack([eye, zero]))
    e1 = csm.ModuleVector(desc, np.stack([zero, eye]))
    rng = np.random.default_rng(14)
    x = csm.random_vector(desc, rng)
    y = csm.frame_operator_solve([e0, e1], x)
    assert np.allclose(y.payload, x.payload, atol=1e-12)


def test_frame_operator_repeated_vector():
    # family {e0, e1, e0}: S = I + projection onto e0, eigenvalues {2, 1}
    desc = csm.AtomicL2(HALF_HALF)
    e0 = csm.exponential_vector(desc, 0)
    e1 = csm.exponential_vector(desc, 1)
    mat = csm.frame_operator_matrix([e0, e1, e0])
    eigs = np.sort(np.linalg.eigvals(mat).real)
    assert np.allclose(eigs, [1.0, 2.0], atol=1e-12)
    y = csm.frame_operator_solve([e0, e1, e0], e0)
    assert np.allclose(y.payload, e0.payload / 2, atol=1e-12)


def test_frame_reconstruction_roundtrip():
    rng = np.random.default_rng(16)
    desc = csm.FreeModule(alg.matrix_algebra(2), 2)
    vectors = []
    for _ in range(3):
        q = rand_unitary(4, rng)[:2]  # rows of a unitary: q q^* = I
        vectors.append(csm.ModuleVector(desc, q.reshape(2, 2, 2).transpose(1, 0, 2)))
    # reshape rows into two 2x2 blocks: [a b] with a a^* + b b^* = I
    for v in vectors:
        assert csm.is_unit_vector(v, 1e-10)
    x = csm.random_vector(desc, rng)
    y = csm.frame_operator_solve(vectors, x)
    back = csm.apply_frame_operator(vectors, y)
    assert csm.module_norm(back - x) <= 1e-9 * csm.module_norm(x)


def test_frame_operator_rank_deficient():
    desc = csm.AtomicL2(HALF_HALF)
    e0 = csm.exponential_vector(desc, 0)
    with pytest.raises(RankDeficiencyError) as err:
        csm.frame_operator_solve([e0], e0)
    assert err.value.condition_number > 1e12


def test_descriptor_mismatch_raises():
    a = csm.exponential_vector(csm.AtomicL2(HALF_HALF), 0)
    b = csm.exponential_vector(csm.AtomicL2(DELTA0), 0)
    with pytest.raises(DescriptorMismatchError):
        csm.inner(a, b)
