import math

import numpy as np
import pytest

from kingcode.errors import DimensionError, KingcodeError
from kingcode.model import (
    ErrorModel,
    IndexSets,
    MeasurementFamily,
    SchmidtState,
    born,
    embed_on_slot,
    random_schmidt_state,
)
from kingcode.numerics import StateVector

KET0 = StateVector([1, 0], (2,))


def test_born_examples(families):
    z0 = families[2].ops[0]
    p, post = born(z0, KET0)
    assert p == pytest.approx(1) and post.allclose(KET0)

    p, post = born(families[0].ops[0], KET0)
    plus = StateVector(np.array([1, 1]) / math.sqrt(2), (2,))
    assert p == pytest.approx(0.5) and post.allclose(plus)

    p, post = born(families[2].ops[1], KET0)
    assert p == 0 and post is None


def test_born_dimension_mismatch():
    with pytest.raises(DimensionError):
        born(np.eye(3), KET0)


def test_born_probabilities_sum_to_one(families, rng):
    for _ in range(20):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        psi = StateVector(z, (2,)).normalized()
        for fam in families:
            assert sum(born(M, psi)[0] for M in fam.ops) == pytest.approx(1, abs=1e-12)


def test_embed_on_slot(err, bell):
    L1 = err[1]
    assert np.allclose(embed_on_slot(L1, 2, (2, 2)), np.kron(np.eye(2), L1))
    assert np.allclose(embed_on_slot(np.eye(2), 2, (2, 2, 2)), np.eye(8))
    v = embed_on_slot(L1, 1, (2, 2)) @ bell.vector().amplitudes
    assert np.vdot(v, v).real == pytest.approx(0.25, abs=1e-15)


def test_embed_on_slot_errors(err):
    with pytest.raises(DimensionError):
        embed_on_slot(err[1], 3, (2, 2))
    with pytest.raises(DimensionError):
        embed_on_slot(err[1], 1, (3, 2))


def test_embed_matches_axis_oracle(rng, oracle):
    dims = (2, 3, 2)
    psi = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(embed_on_slot(A, 2, dims) @ psi, oracle.apply(A, psi, 2, dims))


def test_embed_respects_composition(rng):
    A, B = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(2))
    for slot in (1, 2, 3):
        dims = (2, 2, 2)
        assert np.allclose(
            embed_on_slot(A @ B, slot, dims), embed_on_slot(A, slot, dims) @ embed_on_slot(B, slot, dims)
        )


def test_standard_measurements(families):
    assert [f.label for f in families] == [1, 2, 3]
    assert np.allclose(families[0].ops[0], np.full((2, 2), 0.5))
    assert np.allclose(families[1].ops[0], np.array([[1, -1j], [1j, 1]]) / 2)
    assert families[1].ops[0][1, 0] == pytest.approx(0.5j)
    for fam in families:
        assert np.allclose(sum(M.conj().T @ M for M in fam.ops), np.eye(2))


def test_example_error_model(err):
    assert np.allclose(err[1], np.array([[2, 1 - 1j], [1 + 1j, 0]]) / 4)
    assert np.linalg.norm(err.completeness() - np.eye(2)) <= 1e-12
    assert np.allclose(err[1] + err[2], np.diag([1, 0]))


def test_example_decompositions(err, families, table):
    for fam in families:
        for i, M in enumerate(fam.ops, start=1):
            total = sum(err[k] for k in table[(fam.label, i)])
            assert np.max(np.abs(M - total)) <= 1e-12


def test_example_index_sets(table):
    assert table[(1, 1)] == (1, 3)
    expected = {(1, 1): (1, 3), (1, 2): (2, 4), (2, 1): (1, 4), (2, 2): (2, 3), (3, 1): (1, 2), (3, 2): (3, 4)}
    assert table.sets == expected
    for J in (1, 2, 3):
        assert not set(table[(J, 1)]) & set(table[(J, 2)])
    assert set(table.coeffs.values()) == {1}


def test_index_sets_validation():
    with pytest.raises(KingcodeError, match="share"):
        IndexSets({(1, 1): {1, 2}, (1, 2): {2, 3}})
    with pytest.raises(KingcodeError, match="empty"):
        IndexSets({(1, 1): set()})
    with pytest.raises(KingcodeError):
        IndexSets({(1, 1): {1}}, {(1, 1, 2): 1.0})


def test_index_sets_json_round_trip(table):
    back = IndexSets.from_json(table.to_json())
    assert back == table and back.coeffs == table.coeffs
    assert table.to_json()["sets"]["1,1"] == [1, 3]


def test_schmidt_state_invariants(rng):
    with pytest.raises(KingcodeError):
        SchmidtState([1.0, 0.0])
    with pytest.raises(KingcodeError):
        SchmidtState([0.5, 0.5])
    with pytest.raises(KingcodeError):
        SchmidtState([2**-0.5, 2**-0.5], basis_k=np.array([[1, 1], [0, 1]]))
    for _ in range(10):
        st = random_schmidt_state(3, rng)
        assert st.vector().norm() == pytest.approx(1, abs=1e-12)
        assert st.eta.min() >= 0.1


def test_measurement_family_completeness():
    with pytest.raises(KingcodeError, match="complete"):
        MeasurementFamily(1, (np.diag([1, 0]),))
    fam = MeasurementFamily(1, (np.diag([1, 0]),), check=False)
    back = MeasurementFamily.from_json(fam.to_json(), check=False)
    assert back.label == 1 and np.array_equal(back.ops[0], fam.ops[0])


def test_error_model_rejects_trace_increase():
    with pytest.raises(KingcodeError, match="increases trace"):
        ErrorModel((np.eye(2), np.eye(2)))
    model = ErrorModel((np.diag([1, 0]),))
    assert len(model) == 1
    with pytest.raises(IndexError):
        model[2]
