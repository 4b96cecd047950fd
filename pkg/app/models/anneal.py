from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.models.base import Base


class AnnealSchedule(BaseModel):
    """Линейное расписание β_j = (j/d)·β, j = 0..d."""

    beta_final: float = Field(ge=0)
    d: int = Field(ge=1)
    h2_bound: float = Field(ge=0)
    epsilon: Optional[float] = None

    model_config = ConfigDict(frozen=True)

    @property
    def delta_beta(self) -> float:
        return self.beta_final / self.d

    @property
    def betas(self) -> np.ndarray:
        return np.arange(self.d + 1) * self.beta_final / self.d

    @property
    def target_error(self) -> float:
        """Целевая ошибка ε; по умолчанию оценка β²⟨H²⟩₀/d."""
        if self.epsilon is not None:
            return self.epsilon
        return min(1.0, self.beta_final**2 * self.h2_bound / self.d)


class AnnealStep(BaseModel):
    step: int
    beta_j: float
    overlap_sq: float
    outcome: int
    cum_success: float
    fidelity_to_exact: float
    delta_min_j: float
    cw_budget_j: int
    attempts: int = 1
    merged: List[List[int]] = []


class AnnealTrace(Base):
    schedule: AnnealSchedule
    mode: str = "exact"
    policy: str = "retry-step"
    seed: int = 0
    post_select: bool = False
    steps: List[AnnealStep] = []
    final_state: Optional[np.ndarray] = None
    final_fidelity: float = 1.0
    final_trace_distance: float = 0.0
    thermal_fidelity: float = 1.0
    cumulative_success: float = 1.0
    retries: int = 0
    controlled_w_count: int = 0

    @property
    def zeno_error(self) -> float:
        """Ошибка 1 − Π_j p0_j - неточность безусловного выходного состояния."""
        return 1.0 - self.cumulative_success


class BudgetReport(BaseModel):
    quantum: float
    classical: float
    ratio: float
