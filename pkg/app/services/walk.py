import numpy as np
import scipy.linalg as la
from loguru import logger

from app.core.config import get_tolerances, settings
from app.core.exceptions import BlockMismatch, InvariantViolation, SizeOutOfRange
from app.models.chain import MetropolisChain
from app.models.spectral import EigenSystem, KickModel
from app.models.walk import GapReport, WalkOperator, WalkSpace
from app.services.metropolis import filter_matrix
from app.services.numerics import check_dimension, is_unitary, max_abs_deviation


def walk_space(es: EigenSystem, kick: KickModel, allow_large: bool = False) -> WalkSpace:
    """
    Раскладка пространства блуждания.

    Регистр толчка умножает размерность на L, поэтому при n=5 в предел MAX_DIM
    укладываются только толчки с L = 1 (single-flip, swap, identity).

    :raises SizeOutOfRange: n > WALK_MAX_QUBITS без allow_large или размерность > MAX_DIM
    """
    if es.n > settings.WALK_MAX_QUBITS and not allow_large:
        raise SizeOutOfRange(
            f"Построение блуждания для n={es.n} требует флага --allow-large "
            f"(предел по умолчанию n ≤ {settings.WALK_MAX_QUBITS})"
        )
    space = WalkSpace(n=es.n, kick_dim=kick.register_dim)
    if space.total_dim > settings.MAX_DIM and kick.register_dim > 1:
        raise SizeOutOfRange(
            f"Размерность блуждания {space.total_dim} превышает допустимую {settings.MAX_DIM}: "
            f"регистр толчка '{kick.kind}' добавляет множитель L={kick.register_dim} "
            f"к 2·4^{es.n}; для n={es.n} используйте толчок с L = 1 (single-flip, swap, identity)"
        )
    check_dimension(space.total_dim)
    return space


def _embed_without_kick(op: np.ndarray, space: WalkSpace) -> np.ndarray:
    """Оператор на (r1, r2, анцилла) продолжается тождественно на регистр толчка."""
    pairs = space.register_dim**2
    tensor = op.reshape(pairs, 2, pairs, 2)
    full = np.einsum("abcd,lm->albcmd", tensor, np.eye(space.kick_dim))
    return full.reshape(space.total_dim, space.total_dim)


def _uniform_preparation(dim: int) -> np.ndarray:
    """Унитарная матрица с первым столбцом (1/√L)Σ|λ⟩ (дискретное Фурье)."""
    idx = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(idx, idx) / dim) / np.sqrt(dim)


def filter_rotation(es: EigenSystem, beta: float, space: WalkSpace) -> np.ndarray:
    """
    Управляемый разностью энергий поворот анциллы в базисе |φ_i⟩|φ_k⟩.

    |0⟩ → √z_ik|0⟩ + √(1−z_ik)|1⟩, |1⟩ → −√(1−z_ik)|0⟩ + √z_ik|1⟩.
    """
    z = filter_matrix(es.energies, beta).reshape(-1)
    c, s = np.sqrt(z), np.sqrt(1.0 - z)
    blocks = [np.array([[ci, -si], [si, ci]]) for ci, si in zip(c, s)]
    rotation_eig = la.block_diag(*blocks)
    change = np.kron(np.kron(es.vectors, es.vectors), np.eye(2))
    rotation = change @ rotation_eig @ change.conj().T
    return _embed_without_kick(rotation, space)


def build_U_X(
    es: EigenSystem, kick: KickModel, beta: float, allow_large: bool = False
) -> np.ndarray:
    """
    U_X = R ∘ (Σ_λ I ⊗ K_λ ⊗ |λ⟩⟨λ| ⊗ I) ∘ (I ⊗ I ⊗ F ⊗ I).

    F готовит равномерную суперпозицию регистра толчка, K_λ действует на регистр 2,
    R - поворот фильтра Метрополиса. На входах |i⟩ = |φ_i⟩|φ̃_i⟩|0⟩|0⟩ даёт
    Σ_k α_{kĩ}|φ_i⟩|φ_k⟩(√z_ik|0⟩ + √(1−z_ik)|1⟩) (с усреднением по λ).
    """
    space = walk_space(es, kick, allow_large)
    dim = es.dim
    kick_dim = space.kick_dim

    controlled_kick = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for index, k in enumerate(kick.operators):
        selector = np.zeros((kick_dim, kick_dim))
        selector[index, index] = 1.0
        controlled_kick += np.kron(
            np.kron(np.kron(np.eye(dim), k), selector), np.eye(2)
        )
    preparation = np.kron(
        np.kron(np.eye(dim * dim), _uniform_preparation(kick_dim)), np.eye(2)
    )
    u_x = filter_rotation(es, beta, space) @ controlled_kick @ preparation
    if not is_unitary(u_x):
        raise InvariantViolation("U_X не унитарен")
    return u_x


def controlled_swap(space: WalkSpace) -> np.ndarray:
    """S₀: обмен регистров 1 и 2 при анцилле в |0⟩."""
    dim, kick_dim = space.register_dim, space.kick_dim
    a, b, lam, anc = np.unravel_index(np.arange(space.total_dim), space.dims)
    swapped = np.where(anc == 0, np.ravel_multi_index((b, a, lam, anc), space.dims), np.arange(space.total_dim))
    perm = np.zeros((space.total_dim, space.total_dim))
    perm[swapped, np.arange(space.total_dim)] = 1.0
    logger.debug(f"S₀ на пространстве {dim}x{dim}x{kick_dim}x2")
    return perm


def _space_from_dim(u_x: np.ndarray, kick_dim: int) -> WalkSpace:
    pairs = u_x.shape[0] // (2 * kick_dim)
    n = int(round(np.log2(pairs) / 2))
    return WalkSpace(n=n, kick_dim=kick_dim)


def build_U_Y(u_x: np.ndarray, kick_dim: int = 1) -> np.ndarray:
    """U_Y = S₀ ∘ U_X."""
    return controlled_swap(_space_from_dim(u_x, kick_dim)) @ u_x


def paired_basis(es: EigenSystem, kick_dim: int = 1) -> np.ndarray:
    """Столбцы |i⟩ = |φ_i⟩|φ̃_i⟩|0⟩_толчок|0⟩_анцилла."""
    zero_kick = np.zeros(kick_dim)
    zero_kick[0] = 1.0
    tail = np.kron(zero_kick, np.array([1.0, 0.0]))
    pairs = np.einsum("xi,yi->xyi", es.vectors, es.conj_vectors).reshape(es.dim**2, es.dim)
    return np.einsum("pi,t->pti", pairs, tail).reshape(-1, es.dim)


def build_projector_Lambda1(es: EigenSystem, kick_dim: int = 1) -> np.ndarray:
    """Λ₁ = Σ_i |i⟩⟨i| - ортопроектор ранга N."""
    basis = paired_basis(es, kick_dim)
    return basis @ basis.conj().T


def restricted_operator(u_x: np.ndarray, u_y: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Матрица ⟨j|U_X†U_Y|i⟩ (строка j, столбец i)."""
    return basis.conj().T @ u_x.conj().T @ u_y @ basis


def _match_distance(eigenvalues: np.ndarray, phase: float) -> float:
    target = np.exp(1j * phase)
    return float(np.min(np.abs(eigenvalues - target)))


def build_walk(
    u_x: np.ndarray,
    u_y: np.ndarray,
    lambda1: np.ndarray,
    basis: np.ndarray,
    kick_dim: int = 1,
    with_spectrum: bool = True,
) -> WalkOperator:
    """
    Строит W = (2Λ₂ − I)(2Λ₁ − I), Λ₂ = U_X†U_Y Λ₁ U_Y†U_X.

    Спектр блока k - e^{±2iθ_k}, cos θ_k = λ_k; Δ_min = 2θ₁. Неподвижная точка
    |α₀⟩ извлекается из собственного вектора ограниченного оператора с λ = 1.

    :param with_spectrum: Диагонализовать W целиком и сверить пары фаз
    :raises BlockMismatch: Для некоторого λ_k нет пары фаз W
    """
    tol = get_tolerances()
    identity = np.eye(u_x.shape[0])
    product = u_x.conj().T @ u_y
    lambda2 = product @ lambda1 @ product.conj().T
    w = (2 * lambda2 - identity) @ (2 * lambda1 - identity)

    restricted = basis.conj().T @ product @ basis
    hermitian_part = (restricted + restricted.conj().T) / 2
    values, vectors = np.linalg.eigh(hermitian_part)
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    for col in range(vectors.shape[1]):
        pivot = vectors[np.argmax(np.abs(vectors[:, col])), col]
        vectors[:, col] *= abs(pivot) / pivot

    thetas = np.arccos(np.clip(values, -1.0, 1.0))
    delta_min = float(abs(2 * thetas[1])) if len(thetas) > 1 else 0.0
    cets = basis @ vectors[:, 0]
    residual = float(np.linalg.norm(w @ cets - cets))
    if residual > tol.fixed_point:
        raise InvariantViolation(f"|α₀⟩ не неподвижна под W: {residual:.3e}")

    eigenphases = None
    if with_spectrum:
        spectrum = np.linalg.eigvals(w)
        for value, theta in zip(values[1:], thetas[1:]):
            if not -1 < value < 1:
                continue
            distance = max(
                _match_distance(spectrum, 2 * theta), _match_distance(spectrum, -2 * theta)
            )
            if distance > tol.block_match:
                logger.error(f"Несоответствие блоков W для λ={value:.12g}")
                raise BlockMismatch(float(value), distance)
        eigenphases = np.sort(np.mod(np.angle(spectrum), 2 * np.pi))

    space = _space_from_dim(u_x, kick_dim)
    return WalkOperator(
        space=space,
        u_x=u_x,
        u_y=u_y,
        lambda1=lambda1,
        lambda2=lambda2,
        w=w,
        basis=basis,
        restricted=restricted,
        restricted_eigenvalues=values,
        restricted_eigenvectors=vectors,
        thetas=thetas,
        delta_min=delta_min,
        cets=cets,
        fixed_point_residual=residual,
        eigenphases=eigenphases,
    )


def build_walk_operator(
    es: EigenSystem,
    kick: KickModel,
    beta: float,
    with_spectrum: bool = True,
    allow_large: bool = False,
) -> WalkOperator:
    """
    Полный цикл построения блуждания для (es, kick, β).

    :return: WalkOperator
    """
    try:
        logger.info(f"Строим блуждание: {es.label}, β={beta}, толчок {kick.kind}")
        u_x = build_U_X(es, kick, beta, allow_large)
        u_y = build_U_Y(u_x, kick.register_dim)
        basis = paired_basis(es, kick.register_dim)
        lambda1 = basis @ basis.conj().T
        return build_walk(u_x, u_y, lambda1, basis, kick.register_dim, with_spectrum)
    except SizeOutOfRange:
        raise
    except Exception as e:
        logger.error(f"Ошибка построения блуждания: {str(e)}")
        raise


def verify_gap_inequality(walk: WalkOperator, chain: MetropolisChain) -> GapReport:
    """
    Проверка квадратичного неравенства Δ_min ≥ 2√δ.

    Выполнение обязательно, когда все собственные числа цепи неотрицательны.
    """
    delta = 1.0 - float(chain.eigenvalues[1])
    two_sqrt_delta = 2.0 * np.sqrt(max(delta, 0.0))
    passed = walk.delta_min >= two_sqrt_delta - 1e-9
    all_nonnegative = bool(np.all(chain.eigenvalues >= 0))
    if all_nonnegative and not passed:
        logger.warning(
            f"Неравенство щелей нарушено: Δ_min={walk.delta_min:.6g} < 2√δ={two_sqrt_delta:.6g}"
        )
    return GapReport(
        delta_min=walk.delta_min,
        two_sqrt_delta=float(two_sqrt_delta),
        passed=bool(passed),
        all_nonnegative=all_nonnegative,
    )


def similarity_check(
    u_x: np.ndarray, u_y: np.ndarray, lambda1: np.ndarray, chain: MetropolisChain
) -> float:
    """
    Сравнивает спектр Λ₁U_X†U_YΛ₁ на образе Λ₁ со спектром цепи.

    Базис образа Λ₁ находится из самого проектора.

    :return: Максимальное отклонение собственных чисел
    """
    projector_values, projector_vectors = np.linalg.eigh((lambda1 + lambda1.conj().T) / 2)
    range_basis = projector_vectors[:, projector_values > 0.5]
    restricted = restricted_operator(u_x, u_y, range_basis)
    values = np.sort(np.linalg.eigvalsh((restricted + restricted.conj().T) / 2))[::-1]
    if len(values) != len(chain.eigenvalues):
        raise InvariantViolation(
            f"Ранг Λ₁ {len(values)} не равен размеру цепи {len(chain.eigenvalues)}"
        )
    return max_abs_deviation(values, chain.eigenvalues)
