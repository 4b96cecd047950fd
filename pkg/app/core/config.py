from pydantic import BaseModel, ConfigDict
from pydantic_settings import BaseSettings, SettingsConfigDict


class Tolerances(BaseModel):
    """Единая запись числовых допусков проекта."""

    hermitian: float = 1e-12
    eigen_residual: float = 1e-9
    phase_cutoff: float = 1e-8
    degeneracy: float = 1e-9
    unitary: float = 1e-9
    normalization: float = 1e-10
    stochastic: float = 1e-10
    detailed_balance: float = 1e-10
    kick_symmetry: float = 1e-12
    pairing: float = 1e-10
    fixed_point: float = 1e-8
    block_match: float = 1e-6
    leakage: float = 1e-6
    disconnected: float = 1e-12

    model_config = ConfigDict(extra="forbid", frozen=True)


class Settings(BaseSettings):
    """Класс настроек для работы проекта."""

    TOL: Tolerances = Tolerances()
    LOG_LEVEL: str = "INFO"
    MAX_DIM: int = 4096
    WALK_MAX_QUBITS: int = 4
    MAX_WORKERS: int = 4

    model_config = SettingsConfigDict(
        env_prefix="Q2MA_", env_file=(".env", ".test.env"), extra="ignore"
    )


settings = Settings()


def get_tolerances() -> Tolerances:
    """
    Возвращает действующую запись допусков.

    Переопределяется переменной окружения Q2MA_TOL (JSON-объект с полями Tolerances).

    :return: Текущие допуски
    :rtype: Tolerances
    """
    return settings.TOL
