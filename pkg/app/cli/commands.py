import json
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError
from scipy.linalg import LinAlgError

from app.core.exceptions import (AnnealAborted, BlockMismatch, ConfigError,
                                 DisconnectedChain, InvariantViolation,
                                 NormLoss, Q2MAError)
from app.dependencies.pool_dep import get_worker_pool
from app.models.spectral import EigenSystem, KickModel
from app.repositories.result_repo import ResultRepository
from app.schemas.experiment_schema import (ExperimentConfig, HamiltonianSpec,
                                           InstanceSpec, KickSpec)
from app.schemas.report_schema import (SAnnealMetadata, SAnnealRun,
                                       SChainSummary, SLeakageSummary,
                                       SLeakageWindow, SMergedOutcomes,
                                       SWalkSummary)
from app.services.hamiltonian import hamiltonian_from_spec
from app.services.metropolis import (build_chain, classical_gap, gibbs_state,
                                     mixing_time_estimate)
from app.services.numerics import partial_trace_pure, trace_distance
from app.services.pea import leakage_analysis
from app.services.qsa import (build_schedule, controlled_w_budget,
                              required_steps, run_annealing)
from app.services.spectral import build_eigensystem, build_kick
from app.services.walk import (build_walk_operator, similarity_check,
                               verify_gap_inequality)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STRUCTURAL = 2
EXIT_ABORTED = 3

TRACE_HEADER = [
    "step",
    "beta_j",
    "overlap_sq",
    "outcome",
    "cum_success",
    "fidelity_to_exact",
    "delta_min_j",
    "cw_budget_j",
]
SWEEP_HEADER = ["instance", "beta", "delta", "delta_min", "ratio", "pass", "errors"]
LEAKAGE_HEADER = ["i", "E_i_normalized", "eta_i", "omega_i"]


def load_config(path: Union[str, Path], overrides: Optional[dict] = None) -> ExperimentConfig:
    """
    Чтение и проверка конфигурации эксперимента.

    Args:
        path: Путь к JSON-файлу
        overrides: Значения флагов командной строки поверх файла
            (seed заменяет также generate.seed)

    Returns:
        ExperimentConfig: Проверенная конфигурация

    Raises:
        ConfigError: Файл не читается, JSON некорректен или не проходит схему
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: не удалось прочитать файл ({e.strerror})")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: ожидался JSON-объект на верхнем уровне")
    overrides = {key: value for key, value in (overrides or {}).items() if value is not None}
    raw.update(overrides)
    if "seed" in overrides and isinstance(raw.get("generate"), dict):
        raw["generate"] = {**raw["generate"], "seed": overrides["seed"]}
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}"
            for err in e.errors()
        )
        raise ConfigError(f"{path}: {details}")


def _require_hamiltonian(config: ExperimentConfig) -> HamiltonianSpec:
    if config.hamiltonian is None:
        raise ConfigError("hamiltonian: поле обязательно для этой команды")
    return config.hamiltonian


def _require_non_lazy(config: ExperimentConfig, command: str) -> None:
    if config.lazy_chain:
        raise ConfigError(
            f"lazy_chain: команда {command} строит блуждание по неленивой цепи; "
            f"флаг --lazy-chain поддерживается только командой chain"
        )


def build_instance(h_spec: HamiltonianSpec, k_spec: KickSpec) -> Tuple[EigenSystem, KickModel]:
    """Собственная система и модель толчка по описанию из конфигурации."""
    es = build_eigensystem(hamiltonian_from_spec(h_spec))
    return es, build_kick(es, k_spec.kind, k_spec.site)


def cmd_chain(config: ExperimentConfig, repo: ResultRepository) -> None:
    """Матрица Метрополиса: chain.csv (i, j, m_ij) и chain_summary.json."""
    es, kick = build_instance(_require_hamiltonian(config), config.kick)
    chain = build_chain(es, kick, config.beta, lazy=config.lazy_chain)
    delta = classical_gap(chain)
    dim = es.dim
    rows = [(i, j, float(chain.transition[i, j])) for i in range(dim) for j in range(dim)]
    summary = SChainSummary(
        beta=config.beta,
        delta=delta,
        eigenvalues=[float(x) for x in chain.eigenvalues],
        detailed_balance_residual=chain.detailed_balance_residual,
        mixing_time=mixing_time_estimate(chain),
        negative_eigenvalues=chain.has_negative_eigenvalues,
        lazy=chain.lazy,
    )
    repo.write_csv("chain.csv", ["i", "j", "m_ij"], rows)
    repo.write_json("chain_summary.json", summary)


def cmd_walk(config: ExperimentConfig, repo: ResultRepository) -> None:
    """Блуждание Сегеди: walk_summary.json с проверкой Δ_min ≥ 2√δ."""
    _require_non_lazy(config, "walk")
    es, kick = build_instance(_require_hamiltonian(config), config.kick)
    chain = build_chain(es, kick, config.beta)
    classical_gap(chain)
    walk = build_walk_operator(
        es, kick, config.beta, with_spectrum=True, allow_large=config.allow_large
    )
    gap = verify_gap_inequality(walk, chain)
    reduced = partial_trace_pure(walk.cets, [0], walk.space.dims)
    summary = SWalkSummary(
        delta_min=gap.delta_min,
        two_sqrt_delta=gap.two_sqrt_delta,
        passed=gap.passed,
        fixed_point_residual=walk.fixed_point_residual,
        similarity_deviation=similarity_check(walk.u_x, walk.u_y, walk.lambda1, chain),
        thermal_trace_distance=trace_distance(reduced, gibbs_state(es.hamiltonian, config.beta)),
        eigenphases=[float(x) for x in walk.eigenphases],
    )
    repo.write_json("walk_summary.json", summary)


def _anneal_lengths(config: ExperimentConfig, h2_bound: float) -> List[int]:
    schedule = config.schedule
    if schedule is None:
        raise ConfigError("schedule: поле обязательно для команды anneal")
    if schedule.ds:
        return list(schedule.ds)
    if schedule.d is not None:
        return [schedule.d]
    return [required_steps(config.beta, h2_bound, schedule.epsilon)]


def cmd_anneal(config: ExperimentConfig, repo: ResultRepository) -> None:
    """Отжиг по каждому d: trace_d{d}.csv и общий anneal_metadata.json."""
    _require_non_lazy(config, "anneal")
    h_spec = _require_hamiltonian(config)
    hamiltonian = hamiltonian_from_spec(h_spec)
    es = build_eigensystem(hamiltonian)
    kick = build_kick(es, config.kick.kind, config.kick.site)
    delta = classical_gap(build_chain(es, kick, config.beta))
    epsilon = config.schedule.epsilon if config.schedule else None

    runs = []
    schedule = None
    for d in _anneal_lengths(config, build_schedule(hamiltonian, config.beta, 1).h2_bound):
        schedule = build_schedule(hamiltonian, config.beta, d, epsilon)
        trace = run_annealing(
            es,
            kick,
            schedule,
            mode=config.mode,
            seed=config.seed,
            policy=config.policy,
            post_select=config.post_select,
            pea_config=config.pea,
            max_retries=config.max_retries,
            allow_large=config.allow_large,
        )
        name = f"trace_d{d}.csv"
        repo.write_csv(
            name,
            TRACE_HEADER,
            [
                (
                    s.step,
                    s.beta_j,
                    s.overlap_sq,
                    s.outcome,
                    s.cum_success,
                    s.fidelity_to_exact,
                    s.delta_min_j,
                    s.cw_budget_j,
                )
                for s in trace.steps
            ],
        )
        budget = controlled_w_budget(trace, delta, schedule.target_error)
        runs.append(
            SAnnealRun(
                d=d,
                final_fidelity=trace.final_fidelity,
                final_trace_distance=trace.final_trace_distance,
                thermal_fidelity=trace.thermal_fidelity,
                cumulative_success=trace.cumulative_success,
                zeno_error=trace.zeno_error,
                retries=trace.retries,
                controlled_w_count=trace.controlled_w_count,
                budget_quantum=budget.quantum,
                budget_classical=budget.classical,
                trace_file=name,
                merged_outcomes=[
                    SMergedOutcomes(step=s.step, groups=s.merged) for s in trace.steps if s.merged
                ],
            )
        )

    metadata = SAnnealMetadata(
        hamiltonian=hamiltonian.label,
        beta=config.beta,
        mode=config.mode,
        policy=config.policy,
        post_select=config.post_select,
        seed=config.seed,
        epsilon=schedule.target_error,
        h2_bound=schedule.h2_bound,
        runs=runs,
    )
    repo.write_json("anneal_metadata.json", metadata)


def sweep_instances(config: ExperimentConfig) -> List[InstanceSpec]:
    """Явные экземпляры плюс сгенерированные блоком generate (детерминированно по seed)."""
    instances = list(config.instances)
    generate = config.generate
    if generate is None:
        return instances
    for idx in range(generate.count):
        n = generate.n_values[idx % len(generate.n_values)]
        seed = generate.seed + idx
        rng = np.random.default_rng(seed)
        h_spec = HamiltonianSpec(
            model=generate.model,
            n=n,
            J=float(rng.uniform(0.5, 1.5)),
            h=float(rng.uniform(0.2, 1.5)) if generate.model == "tfim" else 0.0,
            seed=seed,
        )
        instances.append(
            InstanceSpec(
                name=f"{generate.model}-n{n}-s{seed}",
                hamiltonian=h_spec,
                kick=generate.kick,
                betas=generate.betas,
            )
        )
    return instances


def _error_cell(error: Exception) -> str:
    return f"{type(error).__name__}: {str(error)}"


def sweep_row(name: str, h_spec: HamiltonianSpec, k_spec: KickSpec, beta: float) -> tuple:
    """
    Строка свода для одного (экземпляр, β); ошибка записывается в столбец errors.

    Функция верхнего уровня, чтобы передаваться в процессы пула.
    """
    try:
        es, kick = build_instance(h_spec, k_spec)
        chain = build_chain(es, kick, beta)
        delta = classical_gap(chain)
        walk = build_walk_operator(es, kick, beta, with_spectrum=False)
        gap = verify_gap_inequality(walk, chain)
        ratio = gap.delta_min / gap.two_sqrt_delta
        return (name, beta, delta, gap.delta_min, ratio, gap.passed, "")
    except Exception as e:
        logger.error(f"Экземпляр {name}, β={beta}: {type(e).__name__}: {str(e)}")
        return (name, beta, None, None, None, None, _error_cell(e))


def cmd_sweep(config: ExperimentConfig, repo: ResultRepository) -> None:
    """Свод Δ_min / (2√δ) по экземплярам и температурам в sweep.csv."""
    _require_non_lazy(config, "sweep")
    tasks = []
    for idx, instance in enumerate(sweep_instances(config)):
        name = instance.name or f"instance-{idx:03d}"
        tasks.extend((name, instance.hamiltonian, instance.kick, beta) for beta in instance.betas)
    logger.info(f"Свод по {len(tasks)} задачам, процессов: {config.workers}")

    with get_worker_pool(config.workers) as pool:
        if pool is None:
            rows = [sweep_row(*task) for task in tasks]
        else:
            rows = [f.result() for f in [pool.submit(sweep_row, *task) for task in tasks]]

    rows.sort(key=lambda row: (row[0], row[1]))
    repo.write_csv("sweep.csv", SWEEP_HEADER, rows)


def cmd_leakage(config: ExperimentConfig, repo: ResultRepository) -> None:
    """Утечка η по окнам Δ = 2^{−a}: leakage_a{a}.csv и leakage_summary.json."""
    h_spec = _require_hamiltonian(config)
    es, kick = build_instance(h_spec, config.kick)
    windows = []
    for a in config.windows:
        pea_config = config.pea.model_copy(update={"a": a})
        report = leakage_analysis(es, kick, pea_config)
        name = f"leakage_a{a}.csv"
        repo.write_csv(
            name,
            LEAKAGE_HEADER,
            [
                (i, float(report.normalized_energies[i]), float(report.eta[i]), float(report.omega[i]))
                for i in range(es.dim)
            ],
        )
        windows.append(
            SLeakageWindow(
                a=a,
                window=report.window,
                max_eta=report.max_eta,
                mean_eta=report.mean_eta,
                flagged=report.flagged,
                file=name,
            )
        )
    summary = SLeakageSummary(
        hamiltonian=es.label,
        kick=kick.kind,
        threshold=config.pea.threshold,
        config={
            "repeats": config.pea.repeats,
            "evolution_time": config.pea.evolution_time,
            "margin": config.pea.margin,
        },
        windows=windows,
    )
    repo.write_json("leakage_summary.json", summary)


COMMANDS: Dict[str, Callable[[ExperimentConfig, ResultRepository], None]] = {
    "chain": cmd_chain,
    "walk": cmd_walk,
    "anneal": cmd_anneal,
    "sweep": cmd_sweep,
    "leakage": cmd_leakage,
}


def exit_code_for(error: Exception) -> int:
    """Код завершения по типу исключения."""
    if isinstance(error, AnnealAborted):
        return EXIT_ABORTED
    structural = (DisconnectedChain, BlockMismatch, InvariantViolation, NormLoss, LinAlgError)
    if isinstance(error, structural):
        return EXIT_STRUCTURAL
    return EXIT_CONFIG


def run_command(name: str, config_path: Union[str, Path], overrides: Optional[dict] = None) -> int:
    """
    Запуск подкоманды с отображением исключений в коды завершения.

    0 - успех, 1 - ошибка конфигурации, размера или ввода-вывода, 2 - структурная
    или численная ошибка (несвязная цепь, несоответствие блоков, сбой LAPACK), 3 - прерванный отжиг.
    """
    try:
        config = load_config(config_path, overrides)
        repo = ResultRepository(config.output_dir)
        COMMANDS[name](config, repo)
    except AnnealAborted as e:
        logger.error(f"Отжиг прерван на шаге {e.step}: {str(e)}")
        return EXIT_ABORTED
    except (Q2MAError, ValueError, LinAlgError, OSError) as e:
        logger.error(f"{name}: {type(e).__name__}: {str(e)}")
        return exit_code_for(e)
    logger.info(f"Команда {name} выполнена")
    return EXIT_OK
