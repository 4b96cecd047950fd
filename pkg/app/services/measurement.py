import numpy as np

from app.core.config import get_tolerances
from app.core.exceptions import NormLoss
from app.models.walk import WalkOperator


def outcome_groups(values: np.ndarray, tolerance: float) -> list[list[int]]:
    """Склеивает индексы с соседними (после сортировки) значениями ближе tolerance."""
    order = np.argsort(values, kind="stable")
    groups: list[list[int]] = []
    for index in order:
        if groups and values[index] - values[groups[-1][-1]] < tolerance:
            groups[-1].append(int(index))
        else:
            groups.append([int(index)])
    return sorted(groups, key=min)


def measure(
    state: np.ndarray,
    walk_next: WalkOperator,
    groups: list[list[int]],
    weights: np.ndarray,
    rng: np.random.Generator,
    post_select: bool = False,
) -> tuple[int, np.ndarray, float]:
    """
    Измерение в собственном базисе {|α_k⟩} ограниченного оператора Λ₁U_X†U_YΛ₁.

    Элемент исхода 0 - группа, содержащая k = 0, плюс компоненты вне неё с весами
    weights[k]; группа каждого другого исхода получает оставшиеся 1 − weights[k].
    Номер исхода - наименьший индекс k в группе.

    :param post_select: Всегда выбирать исход 0, вероятность лишь фиксируется
    :return: (исход, состояние после измерения, вероятность исхода 0)
    :raises NormLoss: Состояние выходит из образа Λ₁
    """
    coefficients = walk_next.basis.conj().T @ state
    leaked = float(np.linalg.norm(state - walk_next.basis @ coefficients))
    if leaked > get_tolerances().leakage:
        raise NormLoss(leaked)

    overlaps = walk_next.restricted_eigenvectors.conj().T @ coefficients
    population = np.abs(overlaps) ** 2
    zero_group = next(g for g in groups if 0 in g)
    accept = np.asarray(weights, dtype=float).copy()
    accept[zero_group] = 1.0

    others = [g for g in groups if g is not zero_group]
    probabilities = np.array(
        [np.sum(population * accept)]
        + [np.sum(population[g] * (1.0 - accept[g])) for g in others]
    )
    p0 = float(probabilities[0])
    if post_select:
        choice = 0
    else:
        choice = int(rng.choice(len(probabilities), p=probabilities / probabilities.sum()))

    if choice == 0:
        kraus = np.sqrt(accept)
        outcome = 0
    else:
        group = others[choice - 1]
        kraus = np.zeros(len(overlaps))
        kraus[group] = np.sqrt(1.0 - accept[group])
        outcome = min(group)
    projected = walk_next.restricted_eigenvectors @ (kraus * overlaps)
    magnitude = float(np.linalg.norm(projected))
    if magnitude < get_tolerances().disconnected:
        raise NormLoss(magnitude)
    projected /= magnitude
    return outcome, walk_next.basis @ projected, p0


def exact_measure(
    state: np.ndarray,
    walk_next: WalkOperator,
    rng: np.random.Generator,
    post_select: bool = False,
) -> tuple[int, np.ndarray, float]:
    """Точная проекция: группы - вырожденные собственные числа, без примеси вне группы."""
    groups = outcome_groups(-walk_next.restricted_eigenvalues, get_tolerances().degeneracy)
    weights = np.zeros(len(walk_next.restricted_eigenvalues))
    return measure(state, walk_next, groups, weights, rng, post_select)
