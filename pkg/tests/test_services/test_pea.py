import numpy as np
import pytest

from app.core.exceptions import NormLoss
from app.models.pea import PEAConfig
from app.services.hamiltonian import (build_diagonal, build_ising,
                                      build_random_hermitian)
from app.services.measurement import exact_measure, outcome_groups
from app.services.pea import (difference_phases, eigenphase_distances,
                              leakage_analysis, pea_error_repeated,
                              pea_error_single, pea_projective_step,
                              resolution_errors)
from app.services.spectral import build_eigensystem, build_kick
from app.services.walk import build_walk_operator


def test_pea_error_single_formula():
    assert pea_error_single(0.0, 0.5, 2**-3) == pytest.approx((0.125 / 0.5) ** 2)
    assert pea_error_single(0.3, 0.3, 2**-3) == 1.0
    assert pea_error_single(0.0, 0.1, 2**-3) == 1.0


def test_pea_error_repeated_formula():
    assert pea_error_repeated(0.0625, 3) == pytest.approx(0.0625**3)
    assert pea_error_repeated(1.0, 5) == 1.0
    with pytest.raises(ValueError):
        pea_error_repeated(1.5, 2)
    with pytest.raises(ValueError):
        pea_error_repeated(0.5, 0)


def test_pea_config_window():
    assert PEAConfig(a=6).window == pytest.approx(1 / 64)
    with pytest.raises(ValueError):
        PEAConfig(a=0)
    with pytest.raises(ValueError):
        PEAConfig(bits=6)


def test_difference_phases_antisymmetric():
    es = build_eigensystem(build_random_hermitian(2, seed=8))
    phases = difference_phases(es, PEAConfig())

    assert phases.shape == (4, 4)
    assert np.allclose(np.diag(phases), 0.0)
    assert np.allclose(np.exp(1j * (phases + phases.T)), 1.0)


def test_resolution_errors_diagonal_unresolved():
    es = build_eigensystem(build_random_hermitian(2, seed=8))
    errors = resolution_errors(es, PEAConfig(a=5, repeats=2))

    assert np.allclose(np.diag(errors), 1.0)
    assert np.all((errors >= 0) & (errors <= 1))


def test_constant_hamiltonian_fully_leaks():
    """Тест: при полностью вырожденном спектре η = 1 для любого окна"""
    es = build_eigensystem(build_diagonal(2, [1.0, 1.0, 1.0, 1.0]))
    kick = build_kick(es, "spin-flips")
    for a in (3, 6, 8):
        report = leakage_analysis(es, kick, PEAConfig(a=a))

        assert np.allclose(report.eta, 1.0)
        assert report.flagged


def _basis_index(es, i):
    return int(np.argmax(np.abs(es.vectors[:, i])))


def _ising_energy(x, n=3):
    spins = [1 - 2 * ((x >> (n - 1 - q)) & 1) for q in range(n)]
    return sum(spins[q] * spins[q + 1] for q in range(n - 1))


@pytest.mark.parametrize("site", [1, 2, 3])
def test_ising_leakage_matches_flip_enumeration(site):
    """Тест: η_i равна числу переворотов без изменения энергии"""
    es = build_eigensystem(build_ising(3, 1.0))
    kick = build_kick(es, "single-flip", site)
    mask = 1 << (3 - site)
    for a in range(3, 9):
        report = leakage_analysis(es, kick, PEAConfig(a=a))
        for i in range(es.dim):
            x = _basis_index(es, i)
            zero_change = _ising_energy(x) == _ising_energy(x ^ mask)
            assert report.eta[i] == pytest.approx(1.0 if zero_change else 0.0, abs=1e-12)


def test_ising_end_spin_flip_has_no_leakage():
    es = build_eigensystem(build_ising(3, 1.0))
    report = leakage_analysis(es, build_kick(es, "single-flip", 1), PEAConfig(a=3))

    assert report.max_eta == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(report.omega, 2.0)
    assert not report.flagged


def test_leakage_monotone_in_window():
    es = build_eigensystem(build_random_hermitian(3, seed=21))
    kick = build_kick(es, "spin-flips")
    etas = [leakage_analysis(es, kick, PEAConfig(a=a)).eta for a in range(3, 9)]

    for coarse, fine in zip(etas, etas[1:]):
        assert np.all(fine <= coarse + 1e-12)


def test_outcome_groups_merge_close_values():
    groups = outcome_groups(np.array([0.0, 0.5, 1e-12, 0.5 + 1e-12]), 1e-9)
    assert groups == [[0, 2], [1, 3]]


def test_measure_rejects_state_outside_range(tfim2):
    es, kick = tfim2
    walk = build_walk_operator(es, kick, 1.0, with_spectrum=False)
    state = np.zeros(walk.space.total_dim, dtype=complex)
    state[1] = 1.0  # анцилла в |1⟩

    with pytest.raises(NormLoss):
        exact_measure(state, walk, np.random.default_rng(0))


def test_pea_step_on_fixed_point(tfim2):
    es, kick = tfim2
    walk = build_walk_operator(es, kick, 1.0, with_spectrum=False)
    outcome, state, p0, merged = pea_projective_step(
        walk.cets, walk, PEAConfig(a=6), np.random.default_rng(1)
    )

    assert outcome == 0
    assert p0 == pytest.approx(1.0)
    assert abs(np.vdot(walk.cets, state)) == pytest.approx(1.0)
    assert all(len(group) > 1 for group in merged)


def test_eigenphase_distances_range(tfim2):
    es, kick = tfim2
    walk = build_walk_operator(es, kick, 1.0, with_spectrum=False)
    distances = eigenphase_distances(walk)

    assert distances[0] == pytest.approx(0.0, abs=1e-7)
    assert np.all((distances >= 0) & (distances <= 0.5))


def test_pea_step_matches_exact_below_phase_spacing(two_state):
    """Тест: окно меньше расстояния между фазами - исходы и состояния совпадают с точным измерением"""
    es, kick = two_state
    walk = build_walk_operator(es, kick, 1.0, with_spectrum=False)
    config = PEAConfig(a=30)
    assert np.min(eigenphase_distances(walk)[1:]) > 100 * config.window
    state = build_walk_operator(es, kick, 0.0, with_spectrum=False).cets

    for seed in range(10):
        exact = exact_measure(state, walk, np.random.default_rng(seed))
        outcome, pea_state, p0, merged = pea_projective_step(
            state, walk, config, np.random.default_rng(seed)
        )
        assert merged == []
        assert outcome == exact[0]
        assert p0 == pytest.approx(exact[2], abs=1e-12)
        assert np.allclose(pea_state, exact[1], atol=1e-10)
