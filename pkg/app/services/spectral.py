import numpy as np
from loguru import logger

from app.core.config import get_tolerances
from app.core.exceptions import AsymmetricKick, InvariantViolation
from app.models.hamiltonian import Hamiltonian
from app.models.spectral import EigenSystem, KickModel
from app.services.hamiltonian import pauli_string
from app.services.numerics import (hermitian_eigendecomposition, is_unitary,
                                   max_abs_deviation)


def build_eigensystem(h: Hamiltonian) -> EigenSystem:
    """
    Строит спаренный собственный базис (|φ_i⟩, |φ̃_i⟩).

    Партнёр |φ̃_i⟩ получается сопряжением |φ_i⟩, поэтому спаривание точно
    и при вырождении: сопряжённый собственный вектор H - собственный вектор H̃
    с той же энергией.

    :param h: Гамильтониан
    :return: EigenSystem
    :raises NonHermitianInput: Матрица H не эрмитова
    :raises InvariantViolation: Невязка собственных уравнений выше допуска
    """
    tol = get_tolerances()
    energies, vectors = hermitian_eigendecomposition(h.matrix)
    conj_vectors = vectors.conj()

    residual = max_abs_deviation(h.matrix @ vectors, vectors * energies)
    residual_tilde = max_abs_deviation(h.matrix.conj() @ conj_vectors, conj_vectors * energies)
    if max(residual, residual_tilde) > tol.eigen_residual:
        raise InvariantViolation(
            f"Невязка собственных уравнений {max(residual, residual_tilde):.3e}"
        )
    logger.debug(f"Собственная система {h.label}: невязка {residual:.2e}")
    return EigenSystem(
        n=h.n,
        hamiltonian=h.matrix,
        energies=energies,
        vectors=vectors,
        conj_vectors=conj_vectors,
        label=h.label,
    )


def pairing_overlaps(es: EigenSystem) -> np.ndarray:
    """Матрица G_ij = ⟨φ_i|φ̃_j⟩; симметрична для любого H."""
    return es.vectors.conj().T @ es.conj_vectors


def kick_operators(kind: str, n: int, site: int = 1) -> np.ndarray:
    """
    Операторы толчка в вычислительном базисе, массив формы (L, N, N).

    spin-flips - σˣ на каждом спине λ = 1..n; pauli-flips - σˣ и σᶻ на каждом
    спине (L = 2n, меняет чётность Π σˣ, сохраняемую поперечной моделью Изинга);
    single-flip - σˣ на спине site;
    swap - обмен кубитов 1 и 2; identity - тождественный оператор.
    """
    dim = 2**n
    if kind == "spin-flips":
        return np.stack([pauli_string({q: "X"}, n) for q in range(n)])
    if kind == "pauli-flips":
        return np.stack([pauli_string({q: p}, n) for q in range(n) for p in "XZ"])
    if kind == "single-flip":
        if not 1 <= site <= n:
            raise ValueError(f"Номер спина {site} вне диапазона 1..{n}")
        return pauli_string({site - 1: "X"}, n)[None]
    if kind == "swap":
        if n < 2:
            raise ValueError("SWAP требует минимум двух кубитов")
        swap = np.zeros((dim, dim), dtype=complex)
        for x in range(dim):
            bits = [(x >> (n - 1 - q)) & 1 for q in range(n)]
            bits[0], bits[1] = bits[1], bits[0]
            y = int("".join(map(str, bits)), 2)
            swap[y, x] = 1
        return swap[None]
    if kind == "identity":
        return np.eye(dim, dtype=complex)[None]
    raise ValueError(f"Неизвестный тип толчка: {kind}")


def build_kick(
    es: EigenSystem, kind: str = "spin-flips", site: int = 1, operators: np.ndarray | None = None
) -> KickModel:
    """
    Строит модель толчка и таблицы амплитуд α_{kĩ} = ⟨φ_k|K|φ̃_i⟩.

    Для spin-flips эффективная вероятность перехода - среднее по λ
    (1/n)Σ_λ |⟨φ_j|K_λ|φ̃_i⟩|².

    :param es: Собственная система
    :param kind: Тип толчка
    :param site: Номер спина для single-flip (с единицы)
    :param operators: Явные операторы (L, N, N) вместо стандартных
    :raises AsymmetricKick: K не симметричен в вычислительном базисе
    :raises InvariantViolation: K не унитарен или нарушена нормировка таблицы
    """
    tol = get_tolerances()
    if operators is None:
        operators = kick_operators(kind, es.n, site)
    operators = np.asarray(operators, dtype=complex)

    for index, k in enumerate(operators):
        asymmetry = max_abs_deviation(k, k.T)
        if asymmetry > tol.kick_symmetry:
            raise AsymmetricKick(f"K[{index}] несимметричен: {asymmetry:.3e}")
        if not is_unitary(k, tol.normalization):
            raise InvariantViolation(f"K[{index}] не унитарен")

    amplitudes = np.einsum("xk,lxy,yi->lki", es.vectors.conj(), operators, es.conj_vectors)
    squared = np.mean(np.abs(amplitudes) ** 2, axis=0)
    # squared[k, i] = |α_{kĩ}|²; таблица симметрична
    transition_table = squared.T.copy()

    row_error = max_abs_deviation(transition_table.sum(axis=1), np.ones(es.dim))
    symmetry_error = max_abs_deviation(transition_table, transition_table.T)
    if max(row_error, symmetry_error) > tol.normalization:
        raise InvariantViolation(
            f"Таблица толчка: нормировка {row_error:.3e}, симметрия {symmetry_error:.3e}"
        )
    logger.info(f"Модель толчка {kind}: {operators.shape[0]} оператор(ов)")
    return KickModel(
        kind=kind,
        operators=operators,
        amplitudes=amplitudes,
        transition_table=transition_table,
    )


def infinite_temperature_state(es: EigenSystem) -> np.ndarray:
    """
    Состояние бесконечной температуры N^{−1/2} Σ_x |x⟩|x⟩ на двух регистрах.

    Проверяет тождество полноты: оно совпадает с N^{−1/2} Σ_i |φ_i⟩|φ̃_i⟩.

    :raises InvariantViolation: Тождество нарушено
    """
    dim = es.dim
    state = np.eye(dim, dtype=complex).reshape(-1) / np.sqrt(dim)
    paired = np.einsum("xi,yi->xy", es.vectors, es.conj_vectors).reshape(-1) / np.sqrt(dim)
    deviation = max_abs_deviation(state, paired)
    if deviation > get_tolerances().pairing:
        raise InvariantViolation(f"Тождество полноты нарушено: {deviation:.3e}")
    return state
