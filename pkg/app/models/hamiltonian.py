import numpy as np

from app.models.base import Base


class Hamiltonian(Base):
    """Гамильтониан n кубитов в вычислительном базисе."""

    n: int
    matrix: np.ndarray
    coupling_scale: float = 1.0
    label: str = ""

    @property
    def dim(self) -> int:
        return 2**self.n


class NormalizedSpectrum(Base):
    """
    Аффинное отображение физических энергий в открытый интервал (0, 1).

    mapped(E) = E·scale + offset; при вырожденном спектре scale = 0, offset = 0.5.
    """

    offset: float
    scale: float
    margin: float
    energies: np.ndarray

    def apply(self, energies: np.ndarray | float) -> np.ndarray:
        return np.asarray(energies, dtype=float) * self.scale + self.offset

    @property
    def mapped(self) -> np.ndarray:
        return self.apply(self.energies)
