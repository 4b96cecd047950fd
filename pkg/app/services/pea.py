import numpy as np
from loguru import logger

from app.models.hamiltonian import Hamiltonian
from app.models.pea import LeakageReport, PEAConfig
from app.models.spectral import EigenSystem, KickModel
from app.models.walk import WalkOperator
from app.services.hamiltonian import normalize_spectrum
from app.services.measurement import measure, outcome_groups


def pea_error_single(energy_i: float, energy_j: float, window: float) -> float:
    """
    Ошибка одного прогона оценки фазы: min(1, Δ²/|E_i − E_j|²).

    Равна 1, если |E_i − E_j| ≤ Δ (пара неразличима в окне).
    """
    gap = abs(energy_i - energy_j)
    if gap <= window:
        return 1.0
    return min(1.0, window**2 / gap**2)


def pea_error_repeated(single_error: float, k: int) -> float:
    """Ошибка после k повторений: ε^k."""
    if not 0 <= single_error <= 1:
        raise ValueError(f"Ошибка должна лежать в [0, 1], получено {single_error}")
    if k < 1:
        raise ValueError(f"Число повторений должно быть ≥ 1, получено {k}")
    return single_error**k


def _normalized_energies(es: EigenSystem, margin: float) -> np.ndarray:
    h = Hamiltonian(n=es.n, matrix=es.hamiltonian, label=es.label)
    return normalize_spectrum(h, margin).apply(es.energies)


def difference_phases(es: EigenSystem, config: PEAConfig) -> np.ndarray:
    """
    Собственные фазы U = e^{−iHt}⊗e^{+iHt} на нормированных энергиях.

    phases[i, j] = (E_i − E_j)·t mod 2π.
    """
    energies = _normalized_energies(es, config.margin)
    return np.mod((energies[:, None] - energies[None, :]) * config.evolution_time, 2 * np.pi)


def resolution_errors(es: EigenSystem, config: PEAConfig) -> np.ndarray:
    """Матрица ошибок ε^k различения пар энергий окном Δ."""
    energies = _normalized_energies(es, config.margin)
    single = np.vectorize(lambda a, b: pea_error_single(a, b, config.window))
    return single(energies[:, None], energies[None, :]) ** config.repeats


def leakage_analysis(es: EigenSystem, kick: KickModel, config: PEAConfig) -> LeakageReport:
    """
    Утечка η_i = Σ′_k |⟨φ_k|K|φ̃_i⟩|² по k с |E_i − E_k| < Δ (нормированные энергии).

    Ω_i = |⟨φ̃_i|K H̃ K|φ̃_i⟩ − ⟨φ̃_i|H̃|φ̃_i⟩| усредняется по семейству K_λ и
    выражается в физических единицах.
    """
    energies = _normalized_energies(es, config.margin)
    within = np.abs(energies[:, None] - energies[None, :]) < config.window
    eta = np.sum(kick.transition_table * within, axis=1)

    h_tilde = es.hamiltonian.conj()
    before = np.real(np.einsum("xi,xy,yi->i", es.vectors, h_tilde, es.conj_vectors))
    after = np.mean(
        [
            np.real(np.einsum("xi,xy,yi->i", es.vectors, k @ h_tilde @ k, es.conj_vectors))
            for k in kick.operators
        ],
        axis=0,
    )
    omega = np.abs(after - before)

    errors = resolution_errors(es, config)
    resolved = ~within
    resolution_error = np.max(np.where(resolved, errors, 0.0), axis=1)

    max_eta = float(np.max(eta))
    flagged = max_eta > config.threshold
    if flagged:
        logger.warning(
            f"Утечка η превышает порог {config.threshold}: max η = {max_eta:.4f} при Δ = {config.window}"
        )
    return LeakageReport(
        window=config.window,
        normalized_energies=energies,
        eta=eta,
        omega=omega,
        resolution_error=resolution_error,
        max_eta=max_eta,
        mean_eta=float(np.mean(eta)),
        threshold=config.threshold,
        flagged=bool(flagged),
    )


def eigenphase_distances(walk: WalkOperator) -> np.ndarray:
    """Расстояние фаз ±2θ_k от нуля в долях оборота, в [0, 1/2]."""
    turns = np.mod(2 * walk.thetas / (2 * np.pi), 1.0)
    return np.minimum(turns, 1.0 - turns)


def pea_projective_step(
    state: np.ndarray,
    walk_next: WalkOperator,
    config: PEAConfig,
    rng: np.random.Generator,
    post_select: bool = False,
) -> tuple[int, np.ndarray, float, list[list[int]]]:
    """
    Измерение с конечным разрешением оценки фазы (модель фильтра Λ₁′).

    Собственные векторы с фазами W ближе окна Δ склеиваются в общий исход;
    компонента вне группы исхода 0 проходит в него с весом ε^k.

    :return: (исход, состояние, вероятность исхода 0, склеенные группы)
    """
    distances = eigenphase_distances(walk_next)
    groups = outcome_groups(distances, config.window)
    weights = np.array(
        [pea_error_repeated(pea_error_single(0.0, d, config.window), config.repeats) for d in distances]
    )
    merged = [g for g in groups if len(g) > 1]
    if merged:
        logger.debug(f"Склеенные исходы при Δ={config.window}: {merged}")
    outcome, post_state, p0 = measure(state, walk_next, groups, weights, rng, post_select)
    return outcome, post_state, p0, merged
