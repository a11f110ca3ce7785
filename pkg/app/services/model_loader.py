"""Загрузка JSON-файлов моделей и статистик со схемной валидацией и кэшем."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from cachetools import LRUCache
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.config import MODEL_CACHE_SIZE
from app.errors import ErrorCode, WorkbenchError
from app.services.hci_service import HciModel, build_hci
from app.services.model_core import Alphabet, ParamFamily, build_family
from app.services.source_model import SourceModel, source_from_spec
from app.services.statistics_service import Statistic, canonicalize

logger = logging.getLogger(__name__)

Nested = Union[float, List[Any]]


def _symbols(values: List[Any]) -> List[str]:
    return [str(v) for v in values]


class AxisSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    symbols: List[str]

    @field_validator("symbols", mode="before")
    @classmethod
    def _coerce(cls, v: Any) -> List[str]:
        return _symbols(list(v))

    def alphabet(self) -> Alphabet:
        return Alphabet(self.name, tuple(self.symbols))


class StatisticSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    axis: str
    map: Dict[str, Any]

    @field_validator("map", mode="before")
    @classmethod
    def _keys(cls, v: Any) -> Dict[str, Any]:
        return {str(k): val for k, val in dict(v).items()}


class HciSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    w: AxisSpec
    p_w_given_theta: Nested
    p_obs_given_w: Nested


class ModelFile(BaseModel):
    """Семейство {theta, prior, axes, cond} либо источник {axes, probs}."""

    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    theta: Optional[Union[AxisSpec, List[str]]] = None
    prior: Optional[List[float]] = None
    axes: List[AxisSpec]
    cond: Optional[Nested] = None
    probs: Optional[Nested] = None
    roles: Optional[Dict[str, str]] = None
    distortion: Optional[List[List[float]]] = None
    reproduction: Optional[AxisSpec] = None
    statistics: Dict[str, StatisticSpec] = Field(default_factory=dict)
    hci: Optional[HciSpec] = None

    @field_validator("theta", mode="before")
    @classmethod
    def _theta(cls, v: Any) -> Any:
        if isinstance(v, list):
            return _symbols(v)
        return v

    @property
    def is_family(self) -> bool:
        return self.cond is not None


_cache: LRUCache = LRUCache(maxsize=MODEL_CACHE_SIZE)


def _read_json(path: Path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise WorkbenchError(ErrorCode.MODEL_FILE, f"файл не найден: {path}") from None
    except (OSError, json.JSONDecodeError) as e:
        raise WorkbenchError(ErrorCode.MODEL_FILE, f"не удалось прочитать {path}: {e}") from None


def parse_model(data: Any, origin: str = "<dict>") -> ModelFile:
    try:
        return ModelFile.model_validate(data)
    except ValidationError as e:
        raise WorkbenchError(
            ErrorCode.MODEL_FILE,
            f"{origin}: файл не соответствует схеме ({e.error_count()} ошибок)",
            {"errors": [err["msg"] for err in e.errors()]},
        ) from None


def load_model_file(path: Union[str, Path]) -> ModelFile:
    """Читает и валидирует файл модели; результат кэшируется по (путь, mtime)."""
    p = Path(path).resolve()
    try:
        key: Tuple[str, float] = (str(p), os.path.getmtime(p))
    except OSError:
        raise WorkbenchError(ErrorCode.MODEL_FILE, f"файл не найден: {path}") from None
    if key in _cache:
        return _cache[key]
    model = parse_model(_read_json(p), str(path))
    _cache[key] = model
    logger.info("[MODEL] загружена модель %s (%s)", p.name, "семейство" if model.is_family else "источник")
    return model


def family_of(model: ModelFile) -> ParamFamily:
    if not model.is_family or model.theta is None or model.prior is None:
        raise WorkbenchError(ErrorCode.MODEL_FILE, "в файле нет семейства: нужны theta, prior и cond")
    theta: Any = model.theta.alphabet() if isinstance(model.theta, AxisSpec) else model.theta
    return build_family({
        "theta": theta,
        "prior": model.prior,
        "axes": [a.alphabet() for a in model.axes],
        "cond": model.cond,
    })


def hci_of(model: ModelFile) -> HciModel:
    if model.hci is None:
        raise WorkbenchError(ErrorCode.MODEL_FILE, "в файле нет блока hci")
    return build_hci(family_of(model), model.hci.w.alphabet(), model.hci.p_w_given_theta, model.hci.p_obs_given_w)


def source_of(model: ModelFile) -> SourceModel:
    if model.probs is None:
        raise WorkbenchError(ErrorCode.MODEL_FILE, "в файле нет совместного закона probs")
    return source_from_spec({
        "axes": [a.alphabet() for a in model.axes],
        "probs": model.probs,
        "roles": model.roles,
        "distortion": model.distortion,
        "reproduction": model.reproduction.alphabet() if model.reproduction else None,
    })


def axis_alphabets(model: ModelFile) -> Dict[str, Alphabet]:
    out = {a.name: a.alphabet() for a in model.axes}
    if model.hci is not None:
        out[model.hci.w.name] = model.hci.w.alphabet()
    return out


def statistic_from_spec(spec: StatisticSpec, alphabets: Dict[str, Alphabet]) -> Statistic:
    if spec.axis not in alphabets:
        raise WorkbenchError(
            ErrorCode.DOMAIN_MISMATCH,
            f"статистика задана на неизвестной оси {spec.axis!r}",
            {"axis": spec.axis},
        )
    return canonicalize(alphabets[spec.axis], spec.map)


def load_statistics(path: Union[str, Path], alphabets: Dict[str, Alphabet]) -> Dict[str, Statistic]:
    """Файл статистик: одна запись {axis, map} или словарь именованных записей."""
    data = _read_json(Path(path))
    try:
        if isinstance(data, dict) and "axis" in data and "map" in data:
            specs = {Path(path).stem: StatisticSpec.model_validate(data)}
        else:
            specs = {str(k): StatisticSpec.model_validate(v) for k, v in dict(data).items()}
    except (ValidationError, TypeError, ValueError) as e:
        raise WorkbenchError(ErrorCode.MODEL_FILE, f"{path}: некорректный файл статистики ({e})") from None
    return {name: statistic_from_spec(s, alphabets) for name, s in specs.items()}


def clear_cache() -> None:
    _cache.clear()
