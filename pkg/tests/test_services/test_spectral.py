import numpy as np
import pytest

from app.core.exceptions import AsymmetricKick, InvariantViolation
from app.services.hamiltonian import (build_diagonal, build_random_hermitian,
                                      build_transverse_ising)
from app.services.spectral import (build_eigensystem, build_kick,
                                   infinite_temperature_state, kick_operators,
                                   pairing_overlaps)


def test_pairing_overlaps_symmetric():
    es = build_eigensystem(build_random_hermitian(2, seed=2))
    overlaps = pairing_overlaps(es)

    assert np.allclose(overlaps, overlaps.T)


def test_conjugate_vectors_are_eigenvectors_of_conjugate():
    es = build_eigensystem(build_random_hermitian(3, seed=7))
    h_tilde = es.hamiltonian.conj()

    assert np.max(np.abs(h_tilde @ es.conj_vectors - es.conj_vectors * es.energies)) < 1e-9


def test_real_hamiltonian_pairs_with_itself():
    """Тест: для вещественного H векторы совпадают с партнёрами"""
    es = build_eigensystem(build_transverse_ising(2, 1.0, 0.3))
    assert np.allclose(es.vectors, es.conj_vectors)


def test_infinite_temperature_identity():
    es = build_eigensystem(build_random_hermitian(2, seed=13))
    state = infinite_temperature_state(es)

    assert np.linalg.norm(state) == pytest.approx(1.0)
    assert np.allclose(state.reshape(4, 4), np.eye(4) / 2)


@pytest.mark.parametrize("kind", ["spin-flips", "pauli-flips", "single-flip", "swap", "identity"])
def test_kick_table_is_doubly_stochastic(kind):
    es = build_eigensystem(build_random_hermitian(2, seed=3))
    kick = build_kick(es, kind)

    assert np.allclose(kick.transition_table.sum(axis=1), 1.0)
    assert np.allclose(kick.transition_table, kick.transition_table.T)


def test_spin_flips_register_dim():
    es = build_eigensystem(build_transverse_ising(3, 1.0, 1.0))

    assert build_kick(es, "spin-flips").register_dim == 3
    assert build_kick(es, "pauli-flips").register_dim == 6
    assert build_kick(es, "single-flip", 2).register_dim == 1


def test_single_flip_on_diagonal_model():
    es = build_eigensystem(build_diagonal(1, [0.0, 1.0]))
    kick = build_kick(es, "single-flip", 1)

    assert np.allclose(kick.transition_table, [[0, 1], [1, 0]])


def test_asymmetric_kick_rejected():
    """Тест: несимметричный оператор (σʸ) отвергается"""
    es = build_eigensystem(build_diagonal(1, [0.0, 1.0]))
    sigma_y = np.array([[[0, -1j], [1j, 0]]])

    with pytest.raises(AsymmetricKick):
        build_kick(es, operators=sigma_y)


def test_non_unitary_kick_rejected():
    es = build_eigensystem(build_diagonal(1, [0.0, 1.0]))

    with pytest.raises(InvariantViolation):
        build_kick(es, operators=np.array([[[1.0, 0.5], [0.5, 1.0]]]))


def test_swap_kick_exchanges_first_qubits():
    swap = kick_operators("swap", 2)[0]
    assert np.allclose(swap, np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))


def test_unknown_kick_and_bad_site():
    with pytest.raises(ValueError):
        kick_operators("rotate", 2)
    with pytest.raises(ValueError):
        kick_operators("single-flip", 2, site=3)
    with pytest.raises(ValueError):
        kick_operators("swap", 1)
