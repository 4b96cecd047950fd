import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.models.base import Base


class PEAConfig(BaseModel):
    """
    Параметры модели оценки фазы.

    Attributes:
        a: Показатель окна Δ = 2^{−a}
        repeats: Число повторений оценки фазы k
        evolution_time: Время эволюции t оператора U = e^{−iHt}⊗e^{+iHt}
        margin: Отступ нормировки спектра
        threshold: Порог, выше которого утечка η помечается в отчёте
    """

    a: int = Field(default=6, ge=1)
    repeats: int = Field(default=3, ge=1)
    evolution_time: float = 2 * math.pi
    margin: float = Field(default=0.1, gt=0, lt=0.5)
    threshold: float = Field(default=0.1, gt=0)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @property
    def window(self) -> float:
        return 2.0 ** (-self.a)


class LeakageReport(Base):
    window: float
    normalized_energies: np.ndarray
    eta: np.ndarray
    omega: np.ndarray
    resolution_error: np.ndarray
    max_eta: float
    mean_eta: float
    threshold: float
    flagged: bool
