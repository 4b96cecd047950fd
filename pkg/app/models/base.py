import numpy as np
from pydantic import BaseModel, ConfigDict


class Base(BaseModel):
    """
    Базовая неизменяемая модель для численных записей.

    Поля-массивы numpy допускаются как произвольные типы.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def __repr__(self) -> str:
        """Строковое представление объекта для удобства отладки."""
        parts = []
        for name, value in self.__dict__.items():
            if isinstance(value, np.ndarray):
                parts.append(f"{name}=<{value.dtype} {value.shape}>")
            elif isinstance(value, (int, float, str, bool)):
                parts.append(f"{name}={value!r}")
        return f"<{self.__class__.__name__}({', '.join(parts)})>"
