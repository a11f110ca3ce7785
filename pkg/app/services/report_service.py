"""Отчёт одного запуска CLI: вердикты, артефакты, код выхода.

Тело отчёта детерминировано: ключи JSON отсортированы, меток времени нет.
CSV пишется с запятой, строкой заголовка и переводами строк LF.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np

from app.errors import EXIT_CHECK_FAILED, EXIT_OK

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """numpy-скаляры, кортежи и нечисловые float → JSON-совместимые значения."""
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if hasattr(value, "to_record"):
        return _plain(value.to_record())
    return value


@dataclass
class Verdict:
    name: str
    passed: bool
    evidence: Dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> Dict[str, Any]:
        return {"name": self.name, "pass": self.passed, "evidence": _plain(self.evidence)}


@dataclass
class RunReport:
    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[Verdict] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    result: Dict[str, Any] = field(default_factory=dict)
    error: Optional[Dict[str, Any]] = None
    forced_exit: Optional[int] = None

    def add_verdict(self, name: str, passed: bool, **evidence: Any) -> Verdict:
        v = Verdict(name, bool(passed), evidence)
        self.verdicts.append(v)
        if not v.passed:
            logger.info("[REPORT] проверка %s не прошла", name)
        return v

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def exit_code(self) -> int:
        if self.forced_exit is not None:
            return self.forced_exit
        return EXIT_OK if self.passed else EXIT_CHECK_FAILED

    def to_record(self) -> Dict[str, Any]:
        record = {
            "command": self.command,
            "inputs": _plain(self.inputs),
            "verdicts": [v.to_record() for v in self.verdicts],
            "artifacts": list(self.artifacts),
            "result": _plain(self.result),
            "exit_code": self.exit_code,
        }
        if self.error is not None:
            record["error"] = _plain(self.error)
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, ensure_ascii=False, indent=2)


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, rows: Iterable[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> Path:
    """CSV с заголовком; колонки по умолчанию берутся из первой строки."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter=",", lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(c, "")) for c in columns])
    logger.info("[REPORT] записан %s (%d строк)", path, len(rows))
    return path


def write_json(path: Path, record: Mapping[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(_plain(record), sort_keys=True, ensure_ascii=False, indent=2))
        f.write("\n")
    return path


def emit_csv(report: RunReport, out_dir: Optional[str], name: str, rows: Iterable[Mapping[str, Any]],
             columns: Optional[Sequence[str]] = None) -> None:
    """Пишет артефакт, только если задан каталог --out."""
    if not out_dir:
        return
    path = write_csv(Path(out_dir) / name, rows, columns)
    report.artifacts.append(str(path))
