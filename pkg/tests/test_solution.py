import math

import numpy as np
import pytest

from kingcode.errors import DecompositionError, KingcodeError
from kingcode.model import ErrorModel, MeasurementFamily, SchmidtState, embed_on_slot, random_schmidt_state
from kingcode.numerics import psd_defect, random_unitary
from kingcode.solution import (
    SolutionPair,
    decompose_families,
    derive_error_operators,
    derive_index_sets,
    gram_check,
    pvm_from_error_model,
    verify_solution,
)


def reconstructed_pvm(bell, err):
    psi = bell.vector().amplitudes
    return SolutionPair(bell, np.stack([2 * np.kron(np.eye(2), L) @ psi for L in err.kraus], axis=1))


def test_gram_of_example(bell, err):
    rep = gram_check(bell, err)
    assert np.max(np.abs(rep.gram - np.eye(4) / 4)) <= 1e-12
    assert rep.alpha == pytest.approx(0.5)
    assert rep.passed


def test_gram_of_identity(rng):
    st = random_schmidt_state(3, rng)
    rep = gram_check(st, ErrorModel((np.eye(3),)))
    assert rep.gram.shape == (1, 1) and rep.gram[0, 0] == pytest.approx(1)


def test_gram_two_amplitudes(bell):
    # |0><0| keeps (|00>)/sqrt2, |0><1| maps |11> to |10>: orthogonal, each norm^2 1/2
    rep = gram_check(bell, ErrorModel((np.diag([1, 0]), np.array([[0, 1], [0, 0]]))))
    assert np.allclose(rep.gram, np.diag([0.5, 0.5]))
    assert rep.max_offdiag == 0 and rep.passed


def test_round_trip_recovers_example(bell, err):
    derived = derive_error_operators(reconstructed_pvm(bell, err))
    for L, ref in zip(derived.kraus, err.kraus):
        assert np.max(np.abs(L - ref)) <= 1e-9
        assert np.linalg.norm(np.kron(np.eye(2), L) @ bell.vector().amplitudes) == pytest.approx(0.5)


def test_product_basis_gives_complete_operators(bell):
    derived = derive_error_operators(SolutionPair(bell, np.eye(4)))
    assert np.linalg.norm(derived.completeness() - np.eye(2)) <= 1e-12


def test_derived_operators_map_state_to_pvm(rng):
    for _ in range(10):
        st = random_schmidt_state(3, rng)
        sol = SolutionPair(st, random_unitary(9, rng))
        derived = derive_error_operators(sol)
        c = math.sqrt(st.alpha / 3)
        psi = st.vector().amplitudes
        for k, L in enumerate(derived.kraus):
            assert np.allclose(embed_on_slot(L, 2, (3, 3)) @ psi, c * sol.pvm_basis[:, k], atol=1e-12)
        rep = gram_check(st, derived)
        assert rep.passed and rep.alpha == pytest.approx(st.alpha)
        ltl = derived.completeness()
        assert np.allclose(st.basis_k.conj().T @ ltl @ st.basis_k, np.diag(st.alpha / st.eta**2), atol=1e-12)


def test_index_sets_from_example(bell, err, families, table):
    sets = derive_index_sets(bell, err, families)
    assert sets == table
    assert all(abs(f - 1) <= 1e-9 for f in sets.coeffs.values())


def test_trivial_family_uses_every_index(bell, err):
    sets = derive_index_sets(bell, err, [MeasurementFamily(7, (np.eye(2),))])
    assert sets[(7, 1)] == (1, 2, 3, 4)


def test_perturbed_family_fails(bell, err, families):
    M = families[0].ops[0] + 0.1 * np.array([[0, 1], [0, 0]])
    bad = [MeasurementFamily(1, (M, families[0].ops[1]), check=False)]
    with pytest.raises(DecompositionError) as info:
        derive_index_sets(bell, err, bad)
    assert (1, 1) in info.value.offending
    assert info.value.residuals[(1, 1)] == pytest.approx(0.1 / math.sqrt(2), abs=1e-12)
    rep = decompose_families(bell, err, bad)
    assert rep.overlaps == {1: [2, 4]}


def test_derive_index_sets_requires_orthogonal_images(bell):
    with pytest.raises(KingcodeError, match="orthogonal"):
        derive_index_sets(bell, ErrorModel((0.5 * np.diag([1, 0]), 0.5 * np.eye(2))), [])


def test_verify_solution_on_example(bell, err, families):
    rep = verify_solution(pvm_from_error_model(bell, err), families)
    assert rep.is_solution and rep.min_success_probability == pytest.approx(1, abs=1e-12)
    assert rep.guess_map[(3, 1)] == 1 and rep.guess_map[(3, 3)] == 2


def test_verify_solution_rejects_product_basis(bell, families):
    rep = verify_solution(SolutionPair(bell, np.eye(4)), families)
    assert not rep.is_solution
    # for J=1 both outcomes leave |+,+> or |-,-> which hit every product outcome
    assert any(J == 1 for (_, J, _, _) in rep.conflicts)
    assert rep.min_success_probability == pytest.approx(0)


def test_solution_pair_validation(bell):
    with pytest.raises(KingcodeError):
        SolutionPair(bell, np.ones((4, 4)))
    with pytest.raises(KingcodeError):
        SchmidtState([1.0, 0.0])


def test_solution_pair_json_round_trip(rng):
    st = random_schmidt_state(2, rng)
    sol = SolutionPair(st, random_unitary(4, rng))
    back = SolutionPair.from_json(sol.to_json())
    assert np.allclose(back.pvm_basis, sol.pvm_basis)
    assert np.allclose(back.state.vector().amplitudes, st.vector().amplitudes)
