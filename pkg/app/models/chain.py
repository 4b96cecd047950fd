import numpy as np

from app.models.base import Base


class MetropolisChain(Base):
    """
    Классическая цепь Метрополиса над собственными состояниями.

    transition[i, j] - вероятность перехода i → j; eigenvalues - по убыванию.
    """

    beta: float
    energies: np.ndarray
    pi: np.ndarray
    transition: np.ndarray
    eigenvalues: np.ndarray
    detailed_balance_residual: float
    lazy: bool = False

    @property
    def has_negative_eigenvalues(self) -> bool:
        return bool(np.any(self.eigenvalues <= 0))
