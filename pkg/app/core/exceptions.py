class Q2MAError(Exception):
    """Базовое исключение проекта."""


class NonHermitianInput(Q2MAError):
    """Матрица не эрмитова в пределах допуска."""


class DimensionMismatch(Q2MAError):
    """Размерности операндов не согласованы."""


class SizeOutOfRange(Q2MAError):
    """Размер задачи выходит за допустимые пределы."""


class AsymmetricKick(Q2MAError):
    """Оператор «толчка» не симметричен в вычислительном базисе."""


class DisconnectedChain(Q2MAError):
    """Цепь Маркова приводима: старшее собственное число вырождено."""


class InvariantViolation(Q2MAError):
    """Нарушено внутреннее тождество, проверяемое численно."""


class BlockMismatch(Q2MAError):
    """Для собственного числа цепи не найдена пара фаз оператора W."""

    def __init__(self, eigenvalue: float, distance: float):
        self.eigenvalue = eigenvalue
        self.distance = distance
        super().__init__(
            f"Нет пары собственных фаз W для λ={eigenvalue:.12g} "
            f"(минимальное расстояние {distance:.3e})"
        )


class NormLoss(Q2MAError):
    """Состояние имеет компоненту вне измеряемого подпространства."""

    def __init__(self, magnitude: float):
        self.magnitude = magnitude
        super().__init__(f"Утечка нормы из измеряемого подпространства: {magnitude:.3e}")


class AnnealAborted(Q2MAError):
    """Отжиг прерван ненулевым исходом измерения."""

    def __init__(self, step: int, outcome: int):
        self.step = step
        self.outcome = outcome
        super().__init__(f"Отжиг прерван на шаге {step}: исход измерения {outcome}")


class NegativeEigenvalueWarning(UserWarning):
    """Матрица перехода имеет неположительные собственные числа."""


class ConfigError(Q2MAError):
    """Файл конфигурации не читается или не проходит проверку схемы."""
