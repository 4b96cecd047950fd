"""Плотная комплексная линейная алгебра, на которой построены остальные сервисы."""

from typing import Sequence

import numpy as np
import scipy.linalg as la
from loguru import logger

from app.core.config import get_tolerances, settings
from app.core.exceptions import DimensionMismatch, NonHermitianInput, SizeOutOfRange


def max_abs_deviation(a: np.ndarray, b: np.ndarray) -> float:
    """Максимальное поэлементное отклонение |a − b|."""
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def check_dimension(dim: int) -> None:
    if dim > settings.MAX_DIM:
        raise SizeOutOfRange(
            f"Размерность {dim} превышает допустимую {settings.MAX_DIM}"
        )


def hermiticity_error(m: np.ndarray) -> float:
    return max_abs_deviation(m, m.conj().T)


def assert_hermitian(m: np.ndarray) -> None:
    """
    Проверяет эрмитовость матрицы.

    :param m: Квадратная матрица
    :raises DimensionMismatch: Матрица не квадратная
    :raises NonHermitianInput: max|m − m†| превышает допуск
    """
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"Ожидалась квадратная матрица, получено {m.shape}")
    error = hermiticity_error(m)
    if error > get_tolerances().hermitian:
        raise NonHermitianInput(f"Отклонение от эрмитовости {error:.3e}")


def is_unitary(u: np.ndarray, tol: float | None = None) -> bool:
    """Проверка ‖U†U − I‖_max < tol."""
    tol = get_tolerances().unitary if tol is None else tol
    return max_abs_deviation(u.conj().T @ u, np.eye(u.shape[0])) < tol


def _fix_phases(vectors: np.ndarray, cutoff: float) -> np.ndarray:
    """Первая компонента с модулем больше cutoff делается вещественной и положительной."""
    fixed = vectors.copy()
    for col in range(fixed.shape[1]):
        column = fixed[:, col]
        leading = np.flatnonzero(np.abs(column) > cutoff)
        if leading.size:
            pivot = column[leading[0]]
            fixed[:, col] = column * (abs(pivot) / pivot)
    return fixed


def _order_degenerate(
    values: np.ndarray, vectors: np.ndarray, spread: float
) -> np.ndarray:
    """Внутри вырожденных кластеров упорядочивает столбцы по модулям амплитуд."""
    order = list(range(len(values)))
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and values[stop] - values[start] < spread:
            stop += 1
        if stop - start > 1:
            cluster = order[start:stop]
            keys = {c: tuple(np.round(np.abs(vectors[:, c]), 12)) for c in cluster}
            order[start:stop] = sorted(cluster, key=lambda c: keys[c], reverse=True)
        start = stop
    return vectors[:, order]


def hermitian_eigendecomposition(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Спектральное разложение эрмитовой матрицы с детерминированной фазовой конвенцией.

    Собственные числа по возрастанию; первая компонента каждого собственного
    вектора с модулем больше phase_cutoff вещественна и положительна; внутри
    вырожденных кластеров столбцы упорядочены лексикографически по убыванию
    модулей амплитуд. Диагональная матрица раскладывается по вычислительному
    базису без вызова LAPACK.

    :param m: Эрмитова матрица
    :return: (собственные числа, матрица собственных векторов по столбцам)
    :raises NonHermitianInput: Матрица не эрмитова
    """
    m = np.asarray(m, dtype=complex)
    assert_hermitian(m)
    tol = get_tolerances()
    off_diagonal = m - np.diag(np.diag(m))
    if not np.any(np.abs(off_diagonal) > tol.hermitian):
        diagonal = np.real(np.diag(m))
        order = np.argsort(diagonal, kind="stable")
        return diagonal[order], np.eye(m.shape[0], dtype=complex)[:, order]

    values, vectors = la.eigh(m)
    vectors = _fix_phases(vectors, tol.phase_cutoff)
    vectors = _order_degenerate(values, vectors, tol.degeneracy)
    return values, vectors


def matrix_exponential_hermitian(m: np.ndarray, scale: float) -> np.ndarray:
    """
    Вычисляет e^{scale·m} через спектральное разложение.

    :param m: Эрмитова матрица
    :param scale: Вещественный множитель
    :return: Эрмитова положительно определённая матрица
    """
    values, vectors = hermitian_eigendecomposition(m)
    return (vectors * np.exp(scale * values)) @ vectors.conj().T


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Произведение Кронекера."""
    return np.kron(a, b)


def _validate_registers(dim: int, keep: Sequence[int], dims: Sequence[int]) -> None:
    if int(np.prod(dims)) != dim:
        raise DimensionMismatch(
            f"Произведение размерностей регистров {list(dims)} не равно {dim}"
        )
    if any(k < 0 or k >= len(dims) for k in keep) or len(set(keep)) != len(keep):
        raise DimensionMismatch(f"Некорректный набор регистров {list(keep)}")


def partial_trace(
    rho: np.ndarray, keep: Sequence[int], dims: Sequence[int]
) -> np.ndarray:
    """
    Частичный след матрицы плотности по регистрам, не входящим в keep.

    :param rho: Квадратная матрица размерности prod(dims)
    :param keep: Индексы сохраняемых регистров
    :param dims: Размерности регистров
    :return: Редуцированная матрица плотности
    :raises DimensionMismatch: Размерности не согласованы
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"Ожидалась квадратная матрица, получено {rho.shape}")
    keep = sorted(keep)
    _validate_registers(rho.shape[0], keep, dims)

    count = len(dims)
    traced = [r for r in range(count) if r not in keep]
    kept_dim = int(np.prod([dims[r] for r in keep]))
    traced_dim = int(np.prod([dims[r] for r in traced]))

    tensor = rho.reshape(list(dims) * 2)
    perm = keep + traced + [count + r for r in keep] + [count + r for r in traced]
    tensor = tensor.transpose(perm).reshape(kept_dim, traced_dim, kept_dim, traced_dim)
    return np.einsum("ajbj->ab", tensor)


def partial_trace_pure(
    psi: np.ndarray, keep: Sequence[int], dims: Sequence[int]
) -> np.ndarray:
    """Редуцированная матрица плотности чистого состояния без построения |ψ⟩⟨ψ|."""
    psi = np.asarray(psi)
    keep = sorted(keep)
    _validate_registers(psi.shape[0], keep, dims)
    traced = [r for r in range(len(dims)) if r not in keep]
    kept_dim = int(np.prod([dims[r] for r in keep]))
    amplitudes = psi.reshape(dims).transpose(keep + traced).reshape(kept_dim, -1)
    return amplitudes @ amplitudes.conj().T


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """½‖ρ − σ‖₁ для эрмитовых матриц."""
    difference = rho - sigma
    return float(0.5 * np.sum(np.abs(la.eigvalsh((difference + difference.conj().T) / 2))))


def state_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Точность по Ульману (Tr √(√ρ σ √ρ))²."""
    root = la.sqrtm(rho)
    inner = la.sqrtm(root @ sigma @ root)
    value = float(np.real(np.trace(inner)) ** 2)
    logger.debug(f"Точность состояний: {value:.12f}")
    return min(1.0, value)
