import math
import warnings

import numpy as np
from loguru import logger

from app.core.config import get_tolerances
from app.core.exceptions import (DisconnectedChain, InvariantViolation,
                                 NegativeEigenvalueWarning)
from app.models.chain import MetropolisChain
from app.models.hamiltonian import Hamiltonian
from app.models.spectral import EigenSystem, KickModel
from app.services.numerics import matrix_exponential_hermitian, max_abs_deviation


def metropolis_filter(energy_i: float, energy_j: float, beta: float) -> float:
    """Фильтр Метрополиса z_ij = min{1, e^{−β(E_j − E_i)}}."""
    if beta < 0:
        raise ValueError(f"β должно быть неотрицательным, получено {beta}")
    return math.exp(min(0.0, -beta * (energy_j - energy_i)))


def filter_matrix(energies: np.ndarray, beta: float) -> np.ndarray:
    """Матрица z[i, j] для всех пар энергий."""
    if beta < 0:
        raise ValueError(f"β должно быть неотрицательным, получено {beta}")
    difference = energies[None, :] - energies[:, None]
    return np.exp(np.minimum(0.0, -beta * difference))


def stationary_distribution(energies: np.ndarray, beta: float) -> np.ndarray:
    """Гиббсовское распределение π_i = e^{−βE_i}/Z."""
    weights = np.exp(-beta * (energies - energies.min()))
    return weights / weights.sum()


def gibbs_state(h: Hamiltonian | np.ndarray, beta: float) -> np.ndarray:
    """Тепловое состояние e^{−βH}/Z."""
    matrix = h.matrix if isinstance(h, Hamiltonian) else h
    shift = np.real(np.trace(matrix)) / matrix.shape[0]
    shifted = matrix - shift * np.eye(matrix.shape[0])
    rho = matrix_exponential_hermitian(shifted, -beta)
    return rho / np.real(np.trace(rho))


def build_chain(
    es: EigenSystem, kick: KickModel, beta: float, lazy: bool = False
) -> MetropolisChain:
    """
    Строит матрицу перехода цепи Метрополиса.

    Вне диагонали m_ij = s_ij·z_ij, на диагонали
    m_ii = s_ii + Σ_{k≠i} s_ik(1 − z_ik), где s - таблица толчка.
    Собственные числа берутся у симметризованной матрицы D_π^{1/2} M D_π^{−1/2},
    элементы которой равны √(m_ij m_ji).

    :param es: Собственная система
    :param kick: Модель толчка
    :param beta: Обратная температура
    :param lazy: Заменить M на (M + I)/2 (вне исходной схемы)
    :return: MetropolisChain
    """
    tol = get_tolerances()
    try:
        s = kick.transition_table
        z = filter_matrix(es.energies, beta)
        off = s * z
        np.fill_diagonal(off, 0.0)
        rejected = s * (1.0 - z)
        np.fill_diagonal(rejected, 0.0)
        transition = off + np.diag(np.diag(s) + rejected.sum(axis=1))
        if lazy:
            transition = (transition + np.eye(es.dim)) / 2

        pi = stationary_distribution(es.energies, beta)
        flow = pi[:, None] * transition
        residual = max_abs_deviation(flow, flow.T)
        row_error = max_abs_deviation(transition.sum(axis=1), np.ones(es.dim))
        if residual > tol.detailed_balance or row_error > tol.stochastic:
            raise InvariantViolation(
                f"Детальный баланс {residual:.3e}, стохастичность {row_error:.3e}"
            )

        symmetric = np.sqrt(transition * transition.T)
        eigenvalues = np.sort(np.linalg.eigvalsh(symmetric))[::-1]
    except Exception as e:
        logger.error(f"Ошибка построения цепи Метрополиса: {str(e)}")
        raise

    chain = MetropolisChain(
        beta=beta,
        energies=es.energies,
        pi=pi,
        transition=transition,
        eigenvalues=eigenvalues,
        detailed_balance_residual=residual,
        lazy=lazy,
    )
    if chain.has_negative_eigenvalues:
        message = (
            f"Неположительные собственные числа цепи при β={beta}: "
            f"min λ = {eigenvalues[-1]:.6g}"
        )
        logger.warning(message)
        warnings.warn(message, NegativeEigenvalueWarning, stacklevel=2)
    return chain


def classical_gap(chain: MetropolisChain) -> float:
    """
    Спектральная щель δ = 1 − λ₁.

    :raises DisconnectedChain: λ₁ ≥ 1 − допуск (цепь не связна под толчком)
    """
    second = float(chain.eigenvalues[1])
    if second >= 1 - get_tolerances().disconnected:
        raise DisconnectedChain(f"Старшее собственное число вырождено: λ₁ = {second:.15g}")
    return 1.0 - second


def mixing_time_estimate(chain: MetropolisChain) -> float:
    """Оценка времени перемешивания 1/δ без констант."""
    return 1.0 / classical_gap(chain)
