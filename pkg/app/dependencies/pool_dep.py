from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from typing import Generator, Optional

from loguru import logger

from app.core.config import settings


@contextmanager
def get_worker_pool(max_workers: int) -> Generator[Optional[ProcessPoolExecutor], None, None]:
    """Пул процессов для независимых экземпляров; None при последовательном запуске."""
    workers = min(max_workers, settings.MAX_WORKERS)
    if workers <= 1:
        yield None
        return
    pool = ProcessPoolExecutor(max_workers=workers)
    logger.info(f"Запущен пул из {workers} процессов")
    try:
        yield pool
    except Exception:
        pool.shutdown(wait=False, cancel_futures=True)
        raise
    else:
        pool.shutdown(wait=True)
