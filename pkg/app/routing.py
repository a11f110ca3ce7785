"""Роутеры и диспетчер подкоманд CLI.

Каждый модуль app.handlers.* держит свой `router = Router()` и регистрирует
подкоманды декоратором; app.main собирает роутеры в Dispatcher, который
строит argparse-парсер и вызывает нужный хендлер.
"""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from app.errors import UsageError
from app.services.report_service import RunReport

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, RunReport], None]
ArgSpec = Tuple[Tuple[str, ...], Dict[str, Any]]


def arg(*flags: str, **kwargs: Any) -> ArgSpec:
    return flags, kwargs


class WorkbenchArgumentParser(argparse.ArgumentParser):
    """argparse без sys.exit на ошибках: неверный ввод превращается в UsageError."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


@dataclass
class Command:
    name: str
    handler: Handler
    help: str = ""
    arguments: Tuple[ArgSpec, ...] = ()


@dataclass
class Router:
    name: str = ""
    commands: Dict[str, Command] = field(default_factory=dict)

    def command(self, name: str, help: str = "", args: Sequence[ArgSpec] = ()) -> Callable[[Handler], Handler]:
        def decorator(fn: Handler) -> Handler:
            if name in self.commands:
                raise ValueError(f"подкоманда {name!r} уже зарегистрирована в {self.name!r}")
            self.commands[name] = Command(name, fn, help or (fn.__doc__ or "").strip(), tuple(args))
            return fn

        return decorator


# Флаги, общие для всех подкоманд
COMMON_ARGS: Tuple[ArgSpec, ...] = (
    arg("--tol", type=float, default=None, help="порог в битах (по умолчанию из конфигурации)"),
    arg("--seed", type=int, default=None, help="seed случайных потоков"),
    arg("--out", default=None, help="каталог для CSV/JSON артефактов"),
)


class Dispatcher:
    def __init__(self) -> None:
        self.sub_routers: List[Router] = []
        self._commands: Dict[str, Command] = {}

    def include_router(self, router: Router) -> None:
        for name, cmd in router.commands.items():
            if name in self._commands:
                raise ValueError(f"подкоманда {name!r} зарегистрирована дважды")
            self._commands[name] = cmd
        self.sub_routers.append(router)

    @property
    def command_names(self) -> List[str]:
        return sorted(self._commands)

    def build_parser(self) -> WorkbenchArgumentParser:
        parser = WorkbenchArgumentParser(prog="workbench", description="Sufficiency Workbench")
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=WorkbenchArgumentParser)
        for name in self.command_names:
            cmd = self._commands[name]
            sub = subparsers.add_parser(name, help=cmd.help, description=cmd.help)
            for flags, kwargs in COMMON_ARGS + cmd.arguments:
                sub.add_argument(*flags, **kwargs)
        return parser

    def parse(self, argv: Sequence[str]) -> argparse.Namespace:
        args = self.build_parser().parse_args(list(argv))
        if not args.command:
            raise UsageError(f"не указана подкоманда; доступны: {', '.join(self.command_names)}")
        return args

    def dispatch(self, args: argparse.Namespace, report: Optional[RunReport] = None) -> RunReport:
        cmd = self._commands[args.command]
        report = report or RunReport(command=cmd.name)
        report.inputs = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
        logger.info("[CLI] %s", cmd.name)
        cmd.handler(args, report)
        return report
