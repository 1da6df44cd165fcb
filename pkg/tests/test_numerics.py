import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kingcode.errors import DimensionError, KingcodeError
from kingcode.numerics import (
    StateVector,
    Tolerance,
    adjoint,
    decode_matrix,
    decode_vector,
    encode_matrix,
    encode_vector,
    orthonormalize,
    projector,
    psd_defect,
    random_unitary,
    tensor,
)

KET0 = StateVector([1, 0], (2,))
KET1 = StateVector([0, 1], (2,))


def random_matrix(rng, r, c):
    return rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))


def test_tensor_identities():
    assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_kets_concatenate_dims():
    v = tensor(KET0, KET1)
    assert v.factor_dims == (2, 2)
    assert np.array_equal(v.amplitudes, [0, 1, 0, 0])


def test_tensor_block_structure(rng):
    A, B = random_matrix(rng, 2, 2), random_matrix(rng, 3, 3)
    K = tensor(A, B)
    assert K.shape == (6, 6)
    for i in range(2):
        for j in range(2):
            assert np.allclose(K[3 * i : 3 * i + 3, 3 * j : 3 * j + 3], A[i, j] * B)


def test_tensor_rejects_mixed_operands():
    with pytest.raises(KingcodeError):
        tensor(KET0, np.eye(2))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_tensor_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_matrix(rng, k, k) for k in (2, 3, 2))
    assert np.allclose(tensor(tensor(a, b), c), tensor(a, tensor(b, c)), atol=1e-12)
    u, v, w = (StateVector(random_matrix(rng, k, 1)[:, 0], (k,)) for k in (2, 3, 2))
    left, right = tensor(tensor(u, v), w), tensor(u, tensor(v, w))
    assert left.factor_dims == right.factor_dims == (2, 3, 2)
    assert np.allclose(left.amplitudes, right.amplitudes)


def test_adjoint(rng, err):
    assert np.array_equal(adjoint(np.eye(3)), np.eye(3))
    L1 = err[1]
    assert adjoint(L1)[1, 0] == pytest.approx((1 + 1j) / 4)
    assert adjoint(L1)[0, 1] == pytest.approx((1 - 1j) / 4)
    assert np.allclose(adjoint(L1), L1)
    M = random_matrix(rng, 3, 4)
    assert np.array_equal(adjoint(adjoint(M)), M)


def test_orthonormalize_examples():
    out = orthonormalize([KET0, KET0])
    assert len(out) == 1 and out[0].allclose(KET0)
    out = orthonormalize([KET0, KET1])
    assert len(out) == 2 and out[0].allclose(KET0) and out[1].allclose(KET1)
    plus = StateVector(np.array([1, 1]) / math.sqrt(2), (2,))
    # hand Gram-Schmidt: residual of |+> is (0, 1/sqrt2), which normalizes to |1>
    out = orthonormalize([KET0, plus])
    assert out[0].allclose(KET0) and out[1].allclose(KET1)
    assert orthonormalize([]) == []


def test_orthonormalize_rejects_mixed_dims():
    with pytest.raises(DimensionError):
        orthonormalize([KET0, StateVector([1, 0, 0], (3,))])


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_orthonormalize_idempotent_and_projector_valid(seed, dim, count):
    rng = np.random.default_rng(seed)
    vs = [StateVector(random_matrix(rng, dim, 1)[:, 0], (dim,)) for _ in range(count)]
    vs.append(vs[0])  # a dependent vector must be dropped
    once = orthonormalize(vs)
    twice = orthonormalize(once)
    assert len(once) == min(dim, count)
    assert all(a.allclose(b) for a, b in zip(once, twice))
    P = projector(once)
    assert np.allclose(P @ P, P, atol=1e-9)
    assert np.allclose(P, P.conj().T, atol=1e-9)


def test_projector_examples():
    assert np.allclose(projector([KET0]), np.diag([1, 0]))
    assert np.allclose(projector([StateVector.basis(i, (3,)) for i in range(3)]), np.eye(3))
    bell = StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2), (2, 2))
    P = projector([bell])
    direct = np.outer(bell.amplitudes, bell.amplitudes.conj())
    assert np.allclose(P, direct)
    assert np.trace(P).real == pytest.approx(1)
    assert np.linalg.matrix_rank(P) == 1


def test_projector_rejects_non_orthonormal():
    with pytest.raises(KingcodeError, match="orthonormal"):
        projector([KET0, StateVector([1, 1], (2,))])


def test_psd_defect(err):
    assert psd_defect(np.eye(3)) == 0
    assert psd_defect(np.diag([1, -0.5])) == pytest.approx(0.5)
    assert psd_defect(np.eye(2) - err.completeness()) <= 1e-12
    with pytest.raises(KingcodeError):
        psd_defect(np.array([[0, 1], [0, 0]]))


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_psd_defect_of_gram_is_zero(seed, dim):
    rng = np.random.default_rng(seed)
    A = random_matrix(rng, dim, dim)
    assert psd_defect(A.conj().T @ A) <= 1e-9


def test_statevector_validation():
    with pytest.raises(DimensionError):
        StateVector([1, 0, 0], (2, 2))
    with pytest.raises(KingcodeError):
        StateVector([np.nan, 0], (2,))
    with pytest.raises(KingcodeError):
        StateVector([0, 0], (2,)).normalized()
    v = StateVector.basis((1, 0), (2, 3))
    assert v.amplitudes[3] == 1


def test_tolerance_validation(monkeypatch):
    with pytest.raises(KingcodeError):
        Tolerance(eps_eq=0)
    monkeypatch.setenv("KINGCODE_TOL", "1e-12")
    assert Tolerance.from_env().eps_eq == 1e-12
    assert Tolerance.from_env(eps_eq=1e-5).eps_eq == 1e-5
    monkeypatch.setenv("KINGCODE_TOL", "abc")
    with pytest.raises(KingcodeError):
        Tolerance.from_env()


def test_json_round_trip(rng):
    M = random_matrix(rng, 2, 3)
    enc = encode_matrix(M)
    assert enc["rows"] == 2 and enc["cols"] == 3 and len(enc["data"]) == 6
    assert enc["data"][1] == [M[0, 1].real, M[0, 1].imag]
    assert np.array_equal(decode_matrix(enc), M)
    v = StateVector(random_matrix(rng, 6, 1)[:, 0], (2, 3))
    back = decode_vector(encode_vector(v))
    assert back.factor_dims == (2, 3) and np.array_equal(back.amplitudes, v.amplitudes)
    with pytest.raises(DimensionError):
        decode_matrix({"rows": 2, "cols": 2, "data": [[0, 0]]})


def test_random_unitary(rng):
    U = random_unitary(5, rng)
    assert np.allclose(U.conj().T @ U, np.eye(5), atol=1e-12)
