"""Подкоманда selftest — встроенный набор FAM-BIN / FAM-DEP."""

import argparse

from app.jobs.selftest import run_suite
from app.routing import Router
from app.services.report_service import RunReport, emit_csv

router = Router(name="selftest")


@router.command("selftest", help="встроенные проверки на FAM-BIN и FAM-DEP")
def cmd_selftest(args: argparse.Namespace, report: RunReport) -> None:
    results = run_suite()
    for r in results:
        report.add_verdict(r.name, r.passed, **r.evidence)
    emit_csv(report, args.out, "selftest.csv",
             [{"check": r.name, "pass": r.passed} for r in results], ["check", "pass"])
