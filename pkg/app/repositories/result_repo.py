import csv
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TextIO

from loguru import logger
from pydantic import BaseModel


def _format(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return value


class ResultRepository:
    """
    Репозиторий файлов результатов эксперимента.

    Каждый файл пишется во временный файл того же каталога и затем
    атомарно переименовывается, поэтому частично записанных файлов не бывает.

    Attributes:
        out_dir (Path): Каталог результатов
    """

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)

    def _write(self, name: str, dump: Callable[[TextIO], None]) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        target = self.out_dir / name
        fd, tmp_path = tempfile.mkstemp(dir=self.out_dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                dump(f)
            os.replace(tmp_path, target)
        except OSError as e:
            logger.error(f"Ошибка записи {target}: {str(e)}")
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
        logger.info(f"Записан файл {target}")
        return target

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """
        Запись таблицы в CSV.

        Args:
            name: Имя файла в каталоге результатов
            header: Названия столбцов
            rows: Строки значений; float пишутся через repr, bool - как true/false

        Returns:
            Path: Путь к записанному файлу

        Raises:
            ValueError: Длина строки не совпадает с заголовком (файл не создаётся)
        """
        rows = list(rows)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"Строка {row!r} не соответствует заголовку {list(header)}")

        def dump(f: TextIO) -> None:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_format(value) for value in row] for row in rows)

        return self._write(name, dump)

    def write_json(self, name: str, document: BaseModel | dict) -> Path:
        """Запись сводки в JSON (pydantic-модель или словарь)."""
        if isinstance(document, BaseModel):
            text = document.model_dump_json(indent=2)
        else:
            text = json.dumps(document, indent=2, sort_keys=True)
        return self._write(name, lambda f: f.write(text + "\n"))
