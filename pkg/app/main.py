import argparse
import sys
from typing import Optional, Sequence

from loguru import logger

from app.cli.commands import COMMANDS, run_command
from app.core.config import settings


def configure_logging(level: str) -> None:
    """Единственный приёмник логов - stderr с уровнем из настроек."""
    logger.remove()
    logger.add(sys.stderr, level=level)


def create_parser() -> argparse.ArgumentParser:
    """
    Создание парсера командной строки.

    Returns:
        Парсер с подкомандами chain | walk | anneal | sweep | leakage
    """
    parser = argparse.ArgumentParser(
        prog="q2ma",
        description="Квантовый алгоритм Метрополиса: численные эксперименты",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_commands(subparsers)
    return parser


def register_commands(subparsers: argparse._SubParsersAction) -> None:
    """Регистрация подкоманд с общими флагами."""
    descriptions = {
        "chain": "Матрица Метрополиса и её спектральная щель",
        "walk": "Квантованное блуждание и проверка Δ_min ≥ 2√δ",
        "anneal": "Квантовый имитационный отжиг",
        "sweep": "Свод щелей по набору экземпляров",
        "leakage": "Утечка в модели оценки фазы",
    }
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=descriptions[name])
        sub.add_argument("--config", required=True, help="JSON-файл эксперимента")
        sub.add_argument("--out", default=None, help="Каталог результатов")
        sub.add_argument("--seed", type=int, default=None)
        sub.add_argument("--mode", choices=["exact", "pea"], default=None)
        sub.add_argument("--lazy-chain", action="store_true", default=None)
        sub.add_argument("--allow-large", action="store_true", default=None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging(settings.LOG_LEVEL)
    args = create_parser().parse_args(argv)
    overrides = {
        "output_dir": args.out,
        "seed": args.seed,
        "mode": args.mode,
        "lazy_chain": args.lazy_chain,
        "allow_large": args.allow_large,
    }
    logger.info(f"Команда {args.command}, конфигурация {args.config}")
    return run_command(args.command, args.config, overrides)


if __name__ == "__main__":
    sys.exit(main())
