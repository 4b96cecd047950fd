import math

import numpy as np
import pytest

from app.core.exceptions import SizeOutOfRange
from app.services.hamiltonian import (build_ising, build_random_hermitian,
                                      build_transverse_ising)
from app.services.metropolis import build_chain, classical_gap, gibbs_state
from app.services.numerics import is_unitary, partial_trace_pure, trace_distance
from app.services.qsa import cets_exact
from app.services.spectral import build_eigensystem, build_kick
from app.services.walk import (build_projector_Lambda1, build_U_X, build_U_Y,
                               build_walk_operator, controlled_swap,
                               paired_basis, restricted_operator,
                               similarity_check, verify_gap_inequality,
                               walk_space)

LN2 = math.log(2)


def test_walk_space_layout(tfim2):
    es, kick = tfim2
    space = walk_space(es, kick)

    assert space.dims == [4, 4, 4, 2]
    assert space.total_dim == 128


def test_walk_size_guard():
    es = build_eigensystem(build_ising(5, 1.0))
    kick = build_kick(es, "single-flip", 1)

    with pytest.raises(SizeOutOfRange):
        build_U_X(es, kick, 1.0)


def test_walk_space_n5_with_allow_large():
    """Тест: n=5 с флагом строится для толчка с L = 1, регистр spin-flips отклоняется с причиной"""
    es = build_eigensystem(build_ising(5, 1.0))

    space = walk_space(es, build_kick(es, "single-flip", 3), allow_large=True)
    assert space.total_dim == 2048

    with pytest.raises(SizeOutOfRange, match="регистр толчка 'spin-flips'.*L=5"):
        walk_space(es, build_kick(es, "spin-flips"), allow_large=True)


def test_unitaries_and_projector(tfim2):
    es, kick = tfim2
    u_x = build_U_X(es, kick, 1.0)
    u_y = build_U_Y(u_x, kick.register_dim)
    lambda1 = build_projector_Lambda1(es, kick.register_dim)

    assert is_unitary(u_x)
    assert is_unitary(u_y)
    assert np.allclose(lambda1 @ lambda1, lambda1)
    assert np.trace(lambda1).real == pytest.approx(es.dim)


def test_controlled_swap_is_involution(tfim2):
    es, kick = tfim2
    swap = controlled_swap(walk_space(es, kick))
    assert np.allclose(swap @ swap, np.eye(swap.shape[0]))


def test_restricted_operator_decomposition(random2):
    """Тест: ⟨j|U_X†U_Y|i⟩ = √(π_i/π_j)·m_ij"""
    es, kick = random2
    beta = 0.8
    chain = build_chain(es, kick, beta)
    u_x = build_U_X(es, kick, beta)
    restricted = restricted_operator(
        u_x, build_U_Y(u_x, kick.register_dim), paired_basis(es, kick.register_dim)
    )
    pi = chain.pi
    expected = np.sqrt(pi[None, :] / pi[:, None]) * chain.transition.T

    assert np.allclose(restricted, expected, atol=1e-10)
    assert np.allclose(restricted, restricted.conj().T, atol=1e-10)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_similarity_with_chain_spectrum(tfim2, beta):
    es, kick = tfim2
    chain = build_chain(es, kick, beta)
    walk = build_walk_operator(es, kick, beta)

    assert np.allclose(walk.restricted_eigenvalues, chain.eigenvalues, atol=1e-8)
    assert similarity_check(walk.u_x, walk.u_y, walk.lambda1, chain) < 1e-8


def test_cets_fixed_point_and_thermal_marginal(tfim2):
    es, kick = tfim2
    beta = 1.0
    walk = build_walk_operator(es, kick, beta)

    assert np.linalg.norm(walk.w @ walk.cets - walk.cets) < 1e-8
    assert abs(np.vdot(cets_exact(es, beta, kick.register_dim), walk.cets)) == pytest.approx(1.0)
    reduced = partial_trace_pure(walk.cets, [0], walk.space.dims)
    assert trace_distance(reduced, gibbs_state(es.hamiltonian, beta)) < 1e-6


def test_block_spectrum_pairs(random2):
    es, kick = random2
    walk = build_walk_operator(es, kick, 1.0)
    spectrum = np.exp(1j * walk.eigenphases)

    for value, theta in zip(walk.restricted_eigenvalues[1:], walk.thetas[1:]):
        if 0 < value < 1:
            for sign in (1, -1):
                assert np.min(np.abs(spectrum - np.exp(sign * 2j * theta))) < 1e-7


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_quadratic_gap_inequality(seed):
    es = build_eigensystem(build_random_hermitian(2, seed=seed))
    kick = build_kick(es, "spin-flips")
    chain = build_chain(es, kick, 1.0)
    walk = build_walk_operator(es, kick, 1.0, with_spectrum=False)
    report = verify_gap_inequality(walk, chain)

    assert report.two_sqrt_delta == pytest.approx(2 * math.sqrt(classical_gap(chain)))
    if report.all_nonnegative:
        assert report.passed
        assert walk.delta_min >= report.two_sqrt_delta - 1e-9


def test_two_state_walk_gap(two_state):
    """Тест: λ₁ = −1/2 даёт θ₁ = 2π/3 и Δ_min = 4π/3"""
    es, kick = two_state
    walk = build_walk_operator(es, kick, LN2)

    assert walk.delta_min == pytest.approx(4 * math.pi / 3)
    assert walk.space.total_dim == 8


def test_single_flip_walk_on_ising(ising3):
    es, kick = ising3
    walk = build_walk_operator(es, kick, 0.5)

    assert walk.space.kick_dim == 1
    assert walk.fixed_point_residual < 1e-8


def test_walk_without_spectrum_skips_eigenphases():
    es = build_eigensystem(build_transverse_ising(1, 1.0, 1.0))
    walk = build_walk_operator(es, build_kick(es, "spin-flips"), 1.0, with_spectrum=False)
    assert walk.eigenphases is None


@pytest.mark.parametrize("instance", ["tfim2", "random2", "ising3"])
def test_reflections_and_second_projector(instance, request):
    es, kick = request.getfixturevalue(instance)
    walk = build_walk_operator(es, kick, 0.9, with_spectrum=False)
    identity = np.eye(walk.space.total_dim)
    product = walk.u_x.conj().T @ walk.u_y
    reflection = 2 * walk.lambda1 - identity

    assert np.allclose(reflection @ reflection, identity, atol=1e-10)
    assert np.allclose(walk.lambda2, product @ walk.lambda1 @ product.conj().T, atol=1e-10)
    assert np.allclose(walk.lambda2 @ walk.lambda2, walk.lambda2, atol=1e-10)
    assert np.trace(walk.lambda2).real == pytest.approx(np.trace(walk.lambda1).real)


@pytest.mark.parametrize("instance", ["tfim2", "random2", "ising3"])
def test_restricted_product_is_hermitian(instance, request):
    """Тест: Λ₁U_X†U_YΛ₁ = Λ₁U_Y†U_XΛ₁"""
    es, kick = request.getfixturevalue(instance)
    walk = build_walk_operator(es, kick, 0.9, with_spectrum=False)
    forward = walk.lambda1 @ walk.u_x.conj().T @ walk.u_y @ walk.lambda1
    backward = walk.lambda1 @ walk.u_y.conj().T @ walk.u_x @ walk.lambda1

    assert np.allclose(forward, backward, atol=1e-10)
