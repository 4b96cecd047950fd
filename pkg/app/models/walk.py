from typing import List, Optional

import numpy as np

from app.models.base import Base


class WalkSpace(Base):
    """
    Пространство блуждания: регистр 1 (N) ⊗ регистр 2 (N) ⊗ регистр толчка (L) ⊗ анцилла (2).

    При L = 1 совпадает с раскладкой регистр 1 ⊗ регистр 2 ⊗ анцилла.
    """

    n: int
    kick_dim: int = 1

    @property
    def register_dim(self) -> int:
        return 2**self.n

    @property
    def dims(self) -> List[int]:
        return [self.register_dim, self.register_dim, self.kick_dim, 2]

    @property
    def total_dim(self) -> int:
        return 2 * self.kick_dim * 4**self.n


class WalkOperator(Base):
    """
    Квантованное блуждание W = (2Λ₂ − I)(2Λ₁ − I) и его спектральные данные.

    restricted[j, i] = ⟨j|U_X†U_Y|i⟩ в спаренном базисе; thetas - углы cos θ_k = λ_k
    по убыванию λ_k; eigenphases - фазы всего W, если они вычислялись.
    """

    space: WalkSpace
    u_x: np.ndarray
    u_y: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    w: np.ndarray
    basis: np.ndarray
    restricted: np.ndarray
    restricted_eigenvalues: np.ndarray
    restricted_eigenvectors: np.ndarray
    thetas: np.ndarray
    delta_min: float
    cets: np.ndarray
    fixed_point_residual: float
    eigenphases: Optional[np.ndarray] = None


class GapReport(Base):
    delta_min: float
    two_sqrt_delta: float
    passed: bool
    all_nonnegative: bool
