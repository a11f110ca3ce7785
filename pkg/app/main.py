"""Точка входа CLI Sufficiency Workbench.

Отчёт запуска (JSON) пишется в stdout, логи — в stderr, CSV — в каталог --out.
Коды выхода: 0 — все проверки прошли, 1 — проверка не прошла,
2 — ошибка использования, 3 — ошибка модели или входных данных.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import sentry_sdk

from app.config import LOG_LEVEL, SENTRY_DSN
from app.errors import EXIT_CHECK_FAILED, EXIT_MODEL_ERROR, EXIT_USAGE, ErrorCode, UsageError, WorkbenchError
from app.handlers.coding import router as coding_router
from app.handlers.discrete import router as discrete_router
from app.handlers.selftest import router as selftest_router
from app.handlers.simulation import router as simulation_router
from app.routing import Dispatcher
from app.services.report_service import RunReport, write_json

logger = logging.getLogger(__name__)

# Невыполненное предусловие теоремы считается проваленной проверкой, а не плохим входом
CHECK_FAILURE_CODES = {ErrorCode.PRECONDITION_FAILED}


def build_dispatcher() -> Dispatcher:
    dp = Dispatcher()
    dp.include_router(discrete_router)  # достаточность, HCI
    dp.include_router(coding_router)  # область скоростей, R(D)
    dp.include_router(simulation_router)  # непрерывные примеры
    dp.include_router(selftest_router)
    return dp


def run(argv: Sequence[str], dp: Optional[Dispatcher] = None) -> RunReport:
    """Разбирает argv, выполняет подкоманду и возвращает отчёт (исключения превращаются в код выхода)."""
    dp = dp or build_dispatcher()
    argv = list(argv)
    report = RunReport(command=argv[0] if argv else "")
    try:
        args = dp.parse(argv)
        dp.dispatch(args, report)
        if args.out:
            path = write_json(Path(args.out) / "report.json", report.to_record())
            report.artifacts.append(str(path))
    except UsageError as e:
        logger.warning("[CLI] USAGE: %s", e)
        report.error = {"code": "USAGE", "message": str(e)}
        report.forced_exit = EXIT_USAGE
    except WorkbenchError as e:
        logger.warning("[CLI] %s: %s", e.code.value, e.message)
        report.error = e.to_record()
        report.forced_exit = EXIT_CHECK_FAILED if e.code in CHECK_FAILURE_CODES else EXIT_MODEL_ERROR
    except Exception as e:
        logger.exception("[CLI] необработанная ошибка в %s", report.command)
        sentry_sdk.capture_exception(e)
        report.error = {"code": "INTERNAL", "message": repr(e)}
        report.forced_exit = EXIT_MODEL_ERROR
    return report


def main(argv: Optional[List[str]] = None) -> int:
    # --- Инициализация Sentry (если указан DSN) ---
    if SENTRY_DSN:
        sentry_sdk.init(
            dsn=SENTRY_DSN,
            traces_sample_rate=0.0,  # только ошибки, без трейсинга
        )

    # --- Логи в stderr: stdout занят отчётом ---
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )

    report = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(report.to_json() + "\n")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
