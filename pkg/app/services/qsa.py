import math
from typing import Literal

import numpy as np
from loguru import logger

from app.core.config import get_tolerances
from app.core.exceptions import AnnealAborted, InvariantViolation
from app.models.anneal import AnnealSchedule, AnnealStep, AnnealTrace, BudgetReport
from app.models.hamiltonian import Hamiltonian
from app.models.pea import PEAConfig
from app.models.spectral import EigenSystem, KickModel
from app.models.walk import WalkOperator
from app.services.measurement import exact_measure
from app.services.metropolis import gibbs_state, stationary_distribution
from app.services.numerics import (matrix_exponential_hermitian,
                                   partial_trace_pure, state_fidelity,
                                   trace_distance)
from app.services.pea import pea_projective_step
from app.services.walk import build_walk_operator, paired_basis

Policy = Literal["abort", "retry-step", "accept-and-continue"]


def build_schedule(
    h: Hamiltonian | np.ndarray, beta: float, d: int, epsilon: float | None = None
) -> AnnealSchedule:
    """Расписание с оценкой ⟨H²⟩₀ = Tr(H²)/N."""
    matrix = h.matrix if isinstance(h, Hamiltonian) else h
    h2_bound = float(np.real(np.trace(matrix @ matrix)) / matrix.shape[0])
    return AnnealSchedule(beta_final=beta, d=d, h2_bound=h2_bound, epsilon=epsilon)


def cets_exact(es: EigenSystem, beta: float, kick_dim: int = 1) -> np.ndarray:
    """Когерентное кодирование теплового состояния Σ_i (e^{−βE_i}/Z)^{1/2}|i⟩."""
    if beta < 0:
        raise ValueError(f"β должно быть неотрицательным, получено {beta}")
    return paired_basis(es, kick_dim) @ np.sqrt(stationary_distribution(es.energies, beta))


def step_overlap(es: EigenSystem, beta_j: float, delta_beta: float) -> float:
    """
    Квадрат перекрытия |⟨α₀^j|α₀^{j+1}⟩|².

    Считается двумя путями: отношением ⟨e^{−ΔβH/2}⟩²/⟨e^{−ΔβH}⟩ в тепловом
    состоянии β_j и прямой суммой Σ_i √(π_i^j π_i^{j+1}).

    :raises InvariantViolation: Пути расходятся больше допуска
    """
    if delta_beta < 0:
        raise ValueError(f"Δβ должно быть неотрицательным, получено {delta_beta}")
    rho = gibbs_state(es.hamiltonian, beta_j)
    half = matrix_exponential_hermitian(es.hamiltonian, -delta_beta / 2)
    full = matrix_exponential_hermitian(es.hamiltonian, -delta_beta)
    ratio = float(np.real(np.trace(rho @ half)) ** 2 / np.real(np.trace(rho @ full)))

    pi_j = stationary_distribution(es.energies, beta_j)
    pi_next = stationary_distribution(es.energies, beta_j + delta_beta)
    direct = float(np.sum(np.sqrt(pi_j * pi_next)) ** 2)
    if abs(ratio - direct) > get_tolerances().normalization:
        raise InvariantViolation(
            f"Формулы перекрытия расходятся: {ratio:.15g} против {direct:.15g}"
        )
    return direct


def projective_step(
    state: np.ndarray,
    walk_next: WalkOperator,
    rng: np.random.Generator,
    post_select: bool = False,
) -> tuple[int, np.ndarray]:
    """
    Точное проективное измерение Π = Σ_k |α_k⟩⟨α_k| (вырожденные λ_k склеены).

    :return: (номер исхода, нормированное состояние после измерения)
    """
    outcome, post_state, _ = exact_measure(state, walk_next, rng, post_select)
    return outcome, post_state


def required_steps(beta: float, h2_bound: float, epsilon: float) -> int:
    """d = ceil(β²⟨H²⟩₀/ε), не меньше 1."""
    if not 0 < epsilon < 1:
        raise ValueError(f"ε должно лежать в (0, 1), получено {epsilon}")
    return max(1, math.ceil(beta**2 * h2_bound / epsilon))


def budget_formula(beta: float, h2_bound: float, delta: float, epsilon: float) -> BudgetReport:
    """
    Число управляемых W: (β²⟨H²⟩₀/(√δ ε))·ln(β²⟨H²⟩₀/ε²), не меньше 1.

    Классический ориентир β²⟨H²⟩₀/(δ ε).
    """
    if delta <= 0:
        raise ValueError(f"δ должно быть положительным, получено {delta}")
    load = beta**2 * h2_bound
    if load == 0:
        return BudgetReport(quantum=1.0, classical=1.0, ratio=1.0)
    if epsilon <= 0:
        raise ValueError(f"ε должно быть положительным, получено {epsilon}")
    logarithm = math.log(load / epsilon**2)
    quantum = max(1.0, load / (math.sqrt(delta) * epsilon) * logarithm)
    classical = max(1.0, load / (delta * epsilon))
    return BudgetReport(quantum=quantum, classical=classical, ratio=classical / quantum)


def controlled_w_budget(trace: AnnealTrace, delta: float, epsilon: float) -> BudgetReport:
    """Оценка бюджета управляемых W для расписания прогона отжига."""
    schedule = trace.schedule
    return budget_formula(schedule.beta_final, schedule.h2_bound, delta, epsilon)


def _step_budget(epsilon: float, d: int, delta_min: float) -> int:
    epsilon_0 = epsilon / d
    if delta_min <= 0 or epsilon_0 <= 0:
        return 0
    return max(1, math.ceil(math.log(1.0 / epsilon_0) / delta_min))


def run_annealing(
    es: EigenSystem,
    kick: KickModel,
    schedule: AnnealSchedule,
    mode: Literal["exact", "pea"] = "exact",
    seed: int = 0,
    policy: Policy = "retry-step",
    post_select: bool = False,
    pea_config: PEAConfig | None = None,
    max_retries: int = 10,
    allow_large: bool = False,
) -> AnnealTrace:
    """
    Квантовый имитационный отжиг |α₀⁰⟩ → |α₀¹⟩ → … → |α₀^d⟩.

    На каждом шаге строится блуждание при β_{j+1} и выполняется проективное
    измерение (точное или модель оценки фазы). Ненулевой исход обрабатывается
    политикой: abort - исключение, retry-step - повторная подготовка входа шага
    и повторное измерение (не более max_retries раз), accept-and-continue -
    продолжение из полученного состояния.

    :raises AnnealAborted: Ненулевой исход при политике abort или исчерпании повторов
    """
    if mode == "pea" and pea_config is None:
        raise ValueError("Для режима pea нужна конфигурация PEAConfig")

    rng = np.random.default_rng(seed)
    kick_dim = kick.register_dim
    epsilon = schedule.target_error
    betas = schedule.betas
    state = cets_exact(es, 0.0, kick_dim)
    cumulative = 1.0
    retries = 0
    steps = []
    logger.info(
        f"Запуск отжига: β={schedule.beta_final}, d={schedule.d}, режим {mode}, политика {policy}"
    )

    for j in range(1, schedule.d + 1):
        walk = build_walk_operator(
            es, kick, float(betas[j]), with_spectrum=False, allow_large=allow_large
        )
        step_input = state
        attempts = 0
        while True:
            attempts += 1
            if mode == "pea":
                outcome, state, p0, merged = pea_projective_step(
                    step_input, walk, pea_config, rng, post_select
                )
            else:
                outcome, state, p0 = exact_measure(step_input, walk, rng, post_select)
                merged = []
            if attempts == 1:
                cumulative *= p0
            if outcome == 0 or policy == "accept-and-continue":
                break
            if policy == "abort" or attempts > max_retries:
                logger.error(f"Отжиг прерван на шаге {j}, исход {outcome}")
                raise AnnealAborted(j, outcome)
            retries += 1
            logger.info(f"Шаг {j}: исход {outcome}, повторяем измерение")

        exact = cets_exact(es, float(betas[j]), kick_dim)
        steps.append(
            AnnealStep(
                step=j,
                beta_j=float(betas[j]),
                overlap_sq=step_overlap(es, float(betas[j - 1]), schedule.delta_beta),
                outcome=outcome,
                cum_success=cumulative,
                fidelity_to_exact=float(abs(np.vdot(exact, state)) ** 2),
                delta_min_j=walk.delta_min,
                cw_budget_j=_step_budget(epsilon, schedule.d, walk.delta_min),
                attempts=attempts,
                merged=merged,
            )
        )

    dims = [es.dim, es.dim, kick_dim, 2]
    reduced = partial_trace_pure(state, [0], dims)
    thermal = gibbs_state(es.hamiltonian, schedule.beta_final)
    final_exact = cets_exact(es, schedule.beta_final, kick_dim)
    trace = AnnealTrace(
        schedule=schedule,
        mode=mode,
        policy=policy,
        seed=seed,
        post_select=post_select,
        steps=steps,
        final_state=state,
        final_fidelity=float(abs(np.vdot(final_exact, state)) ** 2),
        final_trace_distance=trace_distance(reduced, thermal),
        thermal_fidelity=state_fidelity(reduced, thermal),
        cumulative_success=cumulative,
        retries=retries,
        controlled_w_count=sum(s.cw_budget_j for s in steps),
    )
    logger.info(
        f"Отжиг завершён: точность {trace.final_fidelity:.9f}, успех {cumulative:.6f}"
    )
    return trace
