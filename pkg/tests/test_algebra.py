import numpy as np
import pytest

from kaczmod import algebra as alg
from kaczmod.errors import DescriptorMismatchError


def rand_element(desc, rng):
    return alg.AlgebraElement(
        desc, rng.normal(size=desc.shape) + 1j * rng.normal(size=desc.shape)
    )


def test_adjoint_of_identity_is_identity():
    d2 = alg.matrix_algebra(2)
    e = alg.identity(d2)
    assert np.array_equal(e.adjoint().payload, e.payload)


def test_adjoint_is_conjugate_transpose():
    d2 = alg.matrix_algebra(2)
    a = alg.AlgebraElement(d2, [[0, 1], [0, 0]])
    assert np.array_equal(a.adjoint().payload, [[0, 0], [1, 0]])


def test_sampled_multiplication_is_pointwise():
    fd = alg.function_algebra(2)
    a = alg.AlgebraElement(fd, [1, 2j])
    b = alg.AlgebraElement(fd, [3, -1j])
    assert np.array_equal((a * b).payload, [3, 2])


def test_identity_values():
    assert np.array_equal(alg.identity(alg.matrix_algebra(3)).payload, np.eye(3))
    assert np.array_equal(
        alg.identity(alg.function_algebra(4)).payload, np.ones(4)
    )
    rng = np.random.default_rng(0)
    a = rand_element(alg.matrix_algebra(3), rng)
    assert np.allclose((alg.identity(alg.matrix_algebra(3)) * a).payload, a.payload)


def test_norm_examples():
    assert alg.norm(alg.identity(alg.matrix_algebra(3))) == 1.0
    fd = alg.function_algebra(2)
    assert alg.norm(alg.AlgebraElement(fd, [3j, -4])) == 4.0
    # oracle: singular values of [[0,2],[0,0]] by brute-force SVD
    a = np.array([[0.0, 2.0], [0.0, 0.0]])
    expected = np.linalg.svd(a, compute_uv=False)[0]
    got = alg.norm(alg.AlgebraElement(alg.matrix_algebra(2), a))
    assert abs(got - expected) <= 1e-12 * expected


def test_positivity_examples():
    d2 = alg.matrix_algebra(2)
    # eigenvalues 1 and 3
    assert alg.is_positive(alg.AlgebraElement(d2, [[2, 1], [1, 2]]), 1e-10)
    # eigenvalues -1 and 3
    assert not alg.is_positive(alg.AlgebraElement(d2, [[1, 2], [2, 1]]), 1e-10)
    assert alg.is_positive(alg.zero(d2), 0.0)
    assert alg.is_positive(alg.zero(alg.function_algebra(3)), 0.0)


def test_sampled_positivity():
    fd = alg.function_algebra(3)
    assert alg.is_positive(alg.AlgebraElement(fd, [1.0, 0.0, 2.0]), 1e-10)
    assert not alg.is_positive(alg.AlgebraElement(fd, [1.0, -1.0, 2.0]), 1e-10)
    assert not alg.is_positive(alg.AlgebraElement(fd, [1.0, 1j, 2.0]), 1e-10)


@pytest.mark.parametrize("desc", [alg.matrix_algebra(3), alg.function_algebra(5)])
def test_norm_dominates_summands_of_positives(desc):
    # for positive C, B: norm(C) and norm(B) never exceed norm(C + B)
    rng = np.random.default_rng(7)
    for _ in range(25):
        m1, m2 = rand_element(desc, rng), rand_element(desc, rng)
        c = m1 * m1.adjoint()
        b = m2 * m2.adjoint()
        top = alg.norm(c + b)
        assert alg.norm(c) <= top + 1e-12
        assert alg.norm(b) <= top + 1e-12


@pytest.mark.parametrize("desc", [alg.matrix_algebra(4), alg.function_algebra(6)])
def test_cstar_identities(desc):
    rng = np.random.default_rng(11)
    for _ in range(25):
        a, b = rand_element(desc, rng), rand_element(desc, rng)
        na, nb = alg.norm(a), alg.norm(b)
        assert alg.norm(a * b) <= na * nb * (1 + 1e-9)
        assert abs(alg.norm(a.adjoint() * a) - na**2) <= 1e-9 * na**2
        assert np.array_equal(a.adjoint().adjoint().payload, a.payload)
        assert alg.is_positive(a.adjoint() * a, 1e-10)


def test_descriptor_mismatch():
    a = alg.identity(alg.matrix_algebra(2))
    b = alg.identity(alg.matrix_algebra(3))
    with pytest.raises(DescriptorMismatchError):
        a + b
    with pytest.raises(DescriptorMismatchError):
        a * alg.identity(alg.function_algebra(2))


def test_payload_validation():
    d2 = alg.matrix_algebra(2)
    with pytest.raises(ValueError):
        alg.AlgebraElement(d2, [[1, 2, 3], [4, 5, 6]])
    with pytest.raises(ValueError):
        alg.AlgebraElement(d2, [[np.nan, 0], [0, 0]])
    with pytest.raises(ValueError):
        alg.AlgebraDescriptor(alg.AlgebraKind.MATRIX, dimension=0)


def test_elements_are_immutable():
    a = alg.identity(alg.matrix_algebra(2))
    with pytest.raises(AttributeError):
        a.payload = np.zeros((2, 2))
    with pytest.raises(ValueError):
        a.payload[0, 0] = 5.0
