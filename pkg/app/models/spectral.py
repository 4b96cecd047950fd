import numpy as np

from app.models.base import Base


class EigenSystem(Base):
    """
    Собственные пары гамильтониана и их обращённые во времени партнёры.

    Attributes:
        hamiltonian: Матрица H в вычислительном базисе
        energies: Энергии E_i по возрастанию
        vectors: Столбцы |φ_i⟩
        conj_vectors: Столбцы |φ̃_i⟩ = |φ_i⟩*
    """

    n: int
    hamiltonian: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    conj_vectors: np.ndarray
    label: str = ""

    @property
    def dim(self) -> int:
        return 2**self.n

    def phi(self, i: int) -> np.ndarray:
        return self.vectors[:, i]

    def phi_tilde(self, i: int) -> np.ndarray:
        return self.conj_vectors[:, i]


class KickModel(Base):
    """
    Оператор «толчка» K (или семейство K_λ) и амплитуды α_{kĩ} = ⟨φ_k|K|φ̃_i⟩.

    operators[λ] и amplitudes[λ] индексируются номером толчка; transition_table[i, j]
    - усреднённая по λ вероятность предложить переход i → j, |α_{jĩ}|².
    """

    kind: str
    operators: np.ndarray
    amplitudes: np.ndarray
    transition_table: np.ndarray

    @property
    def register_dim(self) -> int:
        return self.operators.shape[0]
