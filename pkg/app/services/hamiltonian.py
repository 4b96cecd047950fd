from functools import reduce
from itertools import combinations, product

import numpy as np
from loguru import logger

from app.core.exceptions import DimensionMismatch, SizeOutOfRange
from app.models.hamiltonian import Hamiltonian, NormalizedSpectrum
from app.schemas.experiment_schema import HamiltonianSpec
from app.services.numerics import assert_hermitian, hermitian_eigendecomposition

MAX_QUBITS = 5

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_size(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SizeOutOfRange(f"Число кубитов {n} вне диапазона 1..{MAX_QUBITS}")


def pauli_string(ops: dict[int, str], n: int) -> np.ndarray:
    """
    Оператор-строка Паули; кубит 0 - старший множитель произведения Кронекера.

    :param ops: Отображение номер кубита -> буква Паули
    :param n: Число кубитов
    """
    factors = [PAULI[ops.get(q, "I")] for q in range(n)]
    return reduce(np.kron, factors)


def _bonds(n: int, periodic: bool) -> list[tuple[int, int]]:
    bonds = [(q, q + 1) for q in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    return bonds


def _make(n: int, matrix: np.ndarray, coupling_scale: float, label: str) -> Hamiltonian:
    matrix = (matrix + matrix.conj().T) / 2
    assert_hermitian(matrix)
    return Hamiltonian(n=n, matrix=matrix, coupling_scale=coupling_scale, label=label)


def build_ising(n: int, J: float, periodic: bool = False) -> Hamiltonian:
    """
    Модель Изинга H = J Σ σᶻσᶻ по связям цепочки.

    :param n: Число спинов (1..5)
    :param J: Константа связи
    :param periodic: Замкнуть цепочку (для n > 2)
    :raises SizeOutOfRange: n вне диапазона
    """
    _check_size(n)
    dim = 2**n
    matrix = np.zeros((dim, dim), dtype=complex)
    for a, b in _bonds(n, periodic):
        matrix += J * pauli_string({a: "Z", b: "Z"}, n)
    return _make(n, matrix, abs(J), f"ising(n={n},J={J},periodic={periodic})")


def build_transverse_ising(
    n: int, J: float, h: float, periodic: bool = False
) -> Hamiltonian:
    """Изинг в поперечном поле: H = J Σ σᶻσᶻ + h Σ σˣ."""
    _check_size(n)
    matrix = build_ising(n, J, periodic).matrix.copy()
    for q in range(n):
        matrix += h * pauli_string({q: "X"}, n)
    scale = max(abs(J), abs(h))
    return _make(n, matrix, scale, f"tfim(n={n},J={J},h={h},periodic={periodic})")


def build_random_hermitian(
    n: int, seed: int, local: bool = True, J: float = 1.0
) -> Hamiltonian:
    """
    Случайный эрмитов гамильтониан, детерминированный по seed.

    При local=True - сумма одно- и двухкубитных слагаемых Паули с коэффициентами,
    равномерными на [−J, J]; иначе - плотная случайная эрмитова матрица.
    """
    _check_size(n)
    rng = np.random.default_rng(seed)
    dim = 2**n
    if local:
        matrix = np.zeros((dim, dim), dtype=complex)
        for q in range(n):
            for p in "XYZ":
                matrix += rng.uniform(-J, J) * pauli_string({q: p}, n)
        for a, b in combinations(range(n), 2):
            for p, r in product("XYZ", repeat=2):
                matrix += rng.uniform(-J, J) * pauli_string({a: p, b: r}, n)
    else:
        raw = rng.uniform(-J, J, (dim, dim)) + 1j * rng.uniform(-J, J, (dim, dim))
        matrix = raw
    kind = "random2local" if local else "random"
    return _make(n, matrix, abs(J), f"{kind}(n={n},seed={seed})")


def build_diagonal(n: int, energies: list[float]) -> Hamiltonian:
    """Диагональный гамильтониан с явно заданными энергиями базисных состояний."""
    _check_size(n)
    if len(energies) != 2**n:
        raise DimensionMismatch(
            f"Ожидалось {2**n} энергий, получено {len(energies)}"
        )
    values = np.asarray(energies, dtype=float)
    span = float(np.max(values) - np.min(values))
    return _make(n, np.diag(values).astype(complex), span or 1.0, f"diagonal(n={n})")


def time_reversal_conjugate(h: Hamiltonian) -> Hamiltonian:
    """H̃ = H* - поэлементное комплексное сопряжение в вычислительном базисе."""
    label = h.label[:-1] if h.label.endswith("~") else f"{h.label}~"
    return Hamiltonian(
        n=h.n, matrix=h.matrix.conj(), coupling_scale=h.coupling_scale, label=label
    )


def normalize_spectrum(h: Hamiltonian, margin: float = 0.1) -> NormalizedSpectrum:
    """
    Нормирует собственные энергии в открытый интервал (0, 1).

    E → (E − E_min + margin·span) / (span·(1 + 2·margin)), span = E_max − E_min;
    при span < 1e−12 все энергии отображаются в 0.5.

    :param h: Гамильтониан
    :param margin: Отступ от границ, из (0, 0.5)
    """
    if not 0 < margin < 0.5:
        raise ValueError(f"margin должен лежать в (0, 0.5), получено {margin}")
    energies, _ = hermitian_eigendecomposition(h.matrix)
    span = float(energies[-1] - energies[0])
    if span < 1e-12:
        return NormalizedSpectrum(offset=0.5, scale=0.0, margin=margin, energies=energies)
    scale = 1.0 / (span * (1 + 2 * margin))
    offset = (margin * span - float(energies[0])) * scale
    return NormalizedSpectrum(offset=offset, scale=scale, margin=margin, energies=energies)


def pauli_decomposition(h: Hamiltonian, cutoff: float = 1e-12) -> dict[str, float]:
    """
    Разложение по базису строк Паули: вес Tr(P·H)/N для каждой строки.

    :return: Словарь строка Паули (например "XIZ") -> коэффициент, только ненулевые
    """
    weights = {}
    for letters in product("IXYZ", repeat=h.n):
        ops = {q: p for q, p in enumerate(letters) if p != "I"}
        coefficient = np.trace(pauli_string(ops, h.n) @ h.matrix).real / h.dim
        if abs(coefficient) > cutoff:
            weights["".join(letters)] = float(coefficient)
    return weights


def hamiltonian_from_spec(spec: HamiltonianSpec) -> Hamiltonian:
    """
    Строит гамильтониан по JSON-описанию.

    :param spec: Описание модели
    :return: Hamiltonian
    """
    try:
        logger.info(f"Строим гамильтониан: model={spec.model}, n={spec.n}")
        if spec.model == "ising":
            return build_ising(spec.n, spec.J, spec.periodic)
        if spec.model == "tfim":
            return build_transverse_ising(spec.n, spec.J, spec.h, spec.periodic)
        if spec.model == "random2local":
            return build_random_hermitian(spec.n, spec.seed, local=True, J=spec.J)
        if spec.model == "random":
            return build_random_hermitian(spec.n, spec.seed, local=False, J=spec.J)
        return build_diagonal(spec.n, spec.energies or [])
    except Exception as e:
        logger.error(f"Ошибка построения гамильтониана: {str(e)}")
        raise
