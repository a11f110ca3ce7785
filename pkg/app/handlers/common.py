"""Общие помощники хендлеров: загрузка моделей по пути или встроенному имени, разбор статистик и сеток."""

from __future__ import annotations

import argparse
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.errors import ErrorCode, UsageError, WorkbenchError
from app.services.families import (
    BUILTIN_FAMILIES,
    BUILTIN_HCI,
    BUILTIN_SOURCES,
    count_statistic,
    extreme_statistic,
    parity_statistic,
)
from app.services.hci_service import HciModel
from app.services.model_core import Alphabet, ParamFamily, product_alphabet
from app.services.model_loader import (
    StatisticSpec,
    family_of,
    hci_of,
    load_model_file,
    load_statistics,
    source_of,
    statistic_from_spec,
)
from app.services.rate_region import sufficient_statistic_of_y
from app.services.source_model import SourceModel
from app.services.statistics_service import Statistic, constant, from_function, identity
from app.services.sufficiency_service import minimal_sufficient

logger = logging.getLogger(__name__)

AXIS_MARK = "@"
GROUP_SEPARATOR = "|"
AXIS_LIST_SEPARATOR = ","


@dataclass
class LoadedModel:
    """Модель из файла или из реестра встроенных: семейство, HCI и/или источник."""

    name: str
    family: Optional[ParamFamily] = None
    hci: Optional[HciModel] = None
    source: Optional[SourceModel] = None
    named_statistics: Dict[str, StatisticSpec] = field(default_factory=dict)

    def require_family(self) -> ParamFamily:
        if self.family is None:
            raise WorkbenchError(ErrorCode.MODEL_FILE, f"{self.name}: нужна параметрическая модель (theta, prior, cond)")
        return self.family

    def require_hci(self) -> HciModel:
        if self.hci is None:
            raise WorkbenchError(ErrorCode.MODEL_FILE, f"{self.name}: нужна модель с блоком hci")
        return self.hci

    def require_source(self) -> SourceModel:
        if self.source is None:
            raise WorkbenchError(ErrorCode.MODEL_FILE, f"{self.name}: нужна модель источника (axes, probs)")
        return self.source

    def alphabets(self) -> Dict[str, Alphabet]:
        out: Dict[str, Alphabet] = {}
        if self.family is not None:
            out.update({a.name: a for a in self.family.obs_axes})
            if len(self.family.obs_axes) > 1:
                joint_axis = product_alphabet(self.family.obs_axes)
                out[joint_axis.name] = joint_axis
        if self.hci is not None:
            out[self.hci.w.name] = self.hci.w
        if self.source is not None:
            out.update({a.name: a for a in self.source.dist.axes})
        return out


def load_model(ref: Optional[str]) -> LoadedModel:
    if not ref:
        raise UsageError("нужен флаг --model")
    path = Path(ref)
    if path.exists():
        mf = load_model_file(path)
        model = LoadedModel(name=path.name, named_statistics=dict(mf.statistics))
        if mf.is_family:
            model.family = family_of(mf)
            if mf.hci is not None:
                model.hci = hci_of(mf)
        if mf.probs is not None:
            model.source = source_of(mf)
        return model
    if ref in BUILTIN_HCI:
        hci = BUILTIN_HCI[ref]()
        return LoadedModel(name=ref, family=hci.family, hci=hci)
    if ref in BUILTIN_FAMILIES:
        return LoadedModel(name=ref, family=BUILTIN_FAMILIES[ref]())
    if ref in BUILTIN_SOURCES:
        return LoadedModel(name=ref, source=BUILTIN_SOURCES[ref]())
    raise WorkbenchError(ErrorCode.MODEL_FILE, f"файл модели не найден и нет встроенной модели {ref!r}")


def _builtin_statistic(model: LoadedModel, keyword: str, domain: Alphabet) -> Statistic:
    if keyword == "identity":
        return identity(domain)
    if keyword == "constant":
        return constant(domain)
    if keyword == "count":
        return count_statistic(domain)
    if keyword == "parity":
        return parity_statistic(domain)
    if keyword in ("first", "second"):
        k = 0 if keyword == "first" else 1
        return from_function(domain, lambda s: s[k])
    if keyword in ("max", "min"):
        return extreme_statistic(model.require_family(), domain.name, keyword == "max")
    if keyword == "minimal":
        if model.family is not None and domain.name in model.family.obs_names:
            return minimal_sufficient(model.family, domain.name)
        if model.source is not None and domain.name == model.source.y:
            return sufficient_statistic_of_y(model.source)
    raise UsageError(f"неизвестная встроенная статистика {keyword!r} для оси {domain.name!r}")


def resolve_statistic(model: LoadedModel, ref: str, default_axis: Optional[str]) -> List[Statistic]:
    """Статистика по ссылке: путь к файлу, имя из файла модели или 'ключевое_слово[@ось]'."""
    alphabets = model.alphabets()
    path = Path(ref)
    if path.exists():
        return list(load_statistics(path, alphabets).values())
    if ref in model.named_statistics:
        return [statistic_from_spec(model.named_statistics[ref], alphabets)]
    keyword, _, axis = ref.partition(AXIS_MARK)
    axis = axis or default_axis
    if not axis or axis not in alphabets:
        raise UsageError(f"для статистики {ref!r} не определена ось (есть: {sorted(alphabets)})")
    return [_builtin_statistic(model, keyword, alphabets[axis])]


def statistics_from_args(
    model: LoadedModel, args: argparse.Namespace, count: int, defaults: Sequence[Optional[str]]
) -> List[Statistic]:
    """Ровно count статистик из --statistic (повторяемого); недостающие берутся из defaults."""
    refs = list(args.statistic or [])
    stats: List[Statistic] = []
    for i, ref in enumerate(refs):
        default_axis = defaults[i] if i < len(defaults) else None
        stats.extend(resolve_statistic(model, ref, default_axis))
    if len(stats) != count:
        raise UsageError(f"нужно {count} статистик(и) в --statistic, получено {len(stats)}")
    return stats


def axis_list(value: Optional[str]) -> Optional[List[str]]:
    if not value:
        return None
    return [v.strip() for v in value.split(AXIS_LIST_SEPARATOR) if v.strip()]


def parse_chain(value: Optional[str]) -> List[List[str]]:
    """'A|B|C' с группами осей через запятую: 'theta|W|X,Y'; пустая B ('A||C') проверяет A ⊥ C."""
    if not value:
        raise UsageError("нужен флаг --chain вида 'A|B|C'")
    groups = [axis_list(g) or [] for g in value.split(GROUP_SEPARATOR)]
    if len(groups) != 3 or not groups[0] or not groups[2]:
        raise UsageError(f"--chain должен содержать три группы осей с непустыми крайними, получено {value!r}")
    return groups


def parse_dgrid(value: str) -> List[float]:
    """'a:b:steps' → steps точек от a до b включительно."""
    try:
        a, b, steps = value.split(":")
        grid = np.linspace(float(a), float(b), int(steps))
    except ValueError:
        raise UsageError(f"--dgrid должен иметь вид 'a:b:steps', получено {value!r}") from None
    if grid.size < 1:
        raise UsageError("--dgrid: число точек должно быть >= 1")
    return [float(d) for d in grid]


def parse_floats(value: str, flag: str) -> List[float]:
    try:
        return [float(v) for v in value.split(AXIS_LIST_SEPARATOR) if v.strip()]
    except ValueError:
        raise UsageError(f"{flag}: ожидался список чисел через запятую, получено {value!r}") from None


def read_thresholds(value: Optional[str]) -> Optional[List[float]]:
    """Пороги LR: JSON-список в файле, по одному числу в строке, или список через запятую."""
    if not value:
        return None
    path = Path(value)
    if not path.exists():
        return parse_floats(value, "--thresholds")
    text = path.read_text(encoding="utf-8").strip()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [line for line in text.splitlines() if line.strip()]
    try:
        return [float(v) for v in data]
    except (TypeError, ValueError):
        raise WorkbenchError(ErrorCode.MODEL_FILE, f"{value}: некорректный файл порогов") from None
