"""Статистики как канонические разбиения алфавита выборки."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from cachetools import LRUCache, cached

from app.errors import ErrorCode, WorkbenchError
from app.services.model_core import (
    PRODUCT_SEPARATOR,
    Alphabet,
    JointDistribution,
    extend_with_channel,
    merge_axes,
    product_alphabet,
)

logger = logging.getLogger(__name__)

CLASS_SEPARATOR = ","
PARTITION_SEPARATOR = "|"

# Перечисление разбиений для небольших алфавитов переиспользуется в переборах
_PARTITION_CACHE_MAX_N = 9


def _canonical(raw: Sequence[Any]) -> Tuple[int, ...]:
    seen: Dict[Any, int] = {}
    out = []
    for value in raw:
        if value not in seen:
            seen[value] = len(seen)
        out.append(seen[value])
    return tuple(out)


@dataclass(frozen=True)
class Statistic:
    """Тотальное отображение алфавита в классы 0..k-1, занумерованные по первому появлению."""

    domain: Alphabet
    labels: Tuple[int, ...]
    num_classes: int = field(init=False)

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        if len(labels) != self.domain.size:
            raise WorkbenchError(
                ErrorCode.MISSING_SYMBOL,
                f"статистика задаёт {len(labels)} меток для {self.domain.size} символов {self.domain.name!r}",
            )
        canonical = _canonical(labels)
        object.__setattr__(self, "labels", canonical)
        object.__setattr__(self, "num_classes", (max(canonical) + 1) if canonical else 0)

    def class_of(self, symbol: Any) -> int:
        return self.labels[self.domain.index(symbol)]

    def classes(self) -> List[List[str]]:
        out: List[List[str]] = [[] for _ in range(self.num_classes)]
        for s, k in zip(self.domain.symbols, self.labels):
            out[k].append(s)
        return out

    def class_symbols(self) -> Tuple[str, ...]:
        return tuple(CLASS_SEPARATOR.join(members) for members in self.classes())

    def partition_label(self) -> str:
        """Запись разбиения вида '00|01,10|11'."""
        return PARTITION_SEPARATOR.join(self.class_symbols())

    def as_alphabet(self, name: str) -> Alphabet:
        return Alphabet(name, self.class_symbols())

    def indicator(self) -> np.ndarray:
        """Матрица |domain| × num_classes с единицей в классе каждого символа."""
        m = np.zeros((self.domain.size, self.num_classes))
        m[np.arange(self.domain.size), list(self.labels)] = 1.0
        return m

    def to_record(self) -> Dict[str, Any]:
        return {
            "axis": self.domain.name,
            "num_classes": self.num_classes,
            "partition": self.partition_label(),
            "map": {s: k for s, k in zip(self.domain.symbols, self.labels)},
        }


# -----------------------------
#     ПОСТРОЕНИЕ
# -----------------------------


def canonicalize(domain: Alphabet, raw_map: Mapping[Any, Any]) -> Statistic:
    """Переводит произвольное отображение символ→метка в канонический вид."""
    raw = {str(k): v for k, v in raw_map.items()}
    missing = [s for s in domain.symbols if s not in raw]
    if missing:
        raise WorkbenchError(
            ErrorCode.MISSING_SYMBOL,
            f"отображение не задано для символов {missing} оси {domain.name!r}",
            {"axis": domain.name, "symbols": missing},
        )
    extra = sorted(set(raw) - set(domain.symbols))
    if extra:
        raise WorkbenchError(
            ErrorCode.DOMAIN_MISMATCH,
            f"символы {extra} не принадлежат оси {domain.name!r}",
        )
    return Statistic(domain, tuple(raw[s] for s in domain.symbols))


def from_labels(domain: Alphabet, labels: Sequence[Any]) -> Statistic:
    return Statistic(domain, tuple(labels))


def from_function(domain: Alphabet, fn: Callable[[str], Any]) -> Statistic:
    return Statistic(domain, tuple(fn(s) for s in domain.symbols))


def identity(domain: Alphabet) -> Statistic:
    return Statistic(domain, tuple(range(domain.size)))


def constant(domain: Alphabet) -> Statistic:
    return Statistic(domain, (0,) * domain.size)


def product(tx: Statistic, ty: Statistic) -> Statistic:
    """Пара статистик на произведении алфавитов; классы — упорядоченные пары."""
    if tx.domain.name == ty.domain.name:
        raise WorkbenchError(
            ErrorCode.SAME_DOMAIN,
            f"обе статистики определены на оси {tx.domain.name!r}",
        )
    domain = product_alphabet([tx.domain, ty.domain])
    pairs = [(a, b) for a in tx.labels for b in ty.labels]
    return Statistic(domain, tuple(pairs))


def is_coarsening(t: Statistic, u: Statistic) -> bool:
    """True, если t — функция от u (разбиение u измельчает разбиение t)."""
    if t.domain != u.domain:
        raise WorkbenchError(
            ErrorCode.DOMAIN_MISMATCH,
            f"статистики на разных алфавитах: {t.domain.name!r} и {u.domain.name!r}",
        )
    image: Dict[int, int] = {}
    for lt, lu in zip(t.labels, u.labels):
        if image.setdefault(lu, lt) != lt:
            return False
    return True


# -----------------------------
#     ДЕЙСТВИЕ НА РАСПРЕДЕЛЕНИЯ
# -----------------------------


def _check_axis(dist: JointDistribution, axis: str, t: Statistic) -> int:
    k = dist.axis_index(axis)
    if dist.axes[k].symbols != t.domain.symbols:
        raise WorkbenchError(
            ErrorCode.DOMAIN_MISMATCH,
            f"статистика на {t.domain.name!r} не подходит к оси {axis!r}",
            {"axis": axis, "statistic_axis": t.domain.name},
        )
    return k


def push_forward(
    dist: JointDistribution, axis: str, t: Statistic, name: Optional[str] = None
) -> JointDistribution:
    """Заменяет ось её образом под статистикой: вероятности внутри класса суммируются."""
    k = _check_axis(dist, axis, t)
    moved = np.moveaxis(dist.probs, k, -1) @ t.indicator()
    probs = np.moveaxis(moved, -1, k)
    axes = list(dist.axes)
    axes[k] = t.as_alphabet(name or axis)
    return JointDistribution(tuple(axes), probs)


def attach(dist: JointDistribution, axis: str, t: Statistic, name: Optional[str] = None) -> JointDistribution:
    """Добавляет ось T(axis), детерминированно заданную статистикой."""
    _check_axis(dist, axis, t)
    new_name = name or f"T({axis})"
    return extend_with_channel(dist, axis, t.indicator(), [t.as_alphabet(new_name)])


def resolve_domain(dist: JointDistribution, domain: Alphabet) -> Tuple[JointDistribution, str]:
    """Находит в распределении ось (или склейку осей 'X:Y'), совпадающую с domain."""
    if domain.name in dist.names:
        if dist.axis(domain.name).symbols != domain.symbols:
            raise WorkbenchError(
                ErrorCode.DOMAIN_MISMATCH,
                f"символы оси {domain.name!r} не совпадают со статистикой",
            )
        return dist, domain.name
    parts = domain.name.split(PRODUCT_SEPARATOR)
    if len(parts) > 1 and all(p in dist.names for p in parts):
        merged = merge_axes(dist, parts, domain.name)
        if merged.axis(domain.name).symbols == domain.symbols:
            return merged, domain.name
    raise WorkbenchError(
        ErrorCode.DOMAIN_MISMATCH,
        f"ось {domain.name!r} не найдена среди {list(dist.names)}",
        {"axis": domain.name},
    )


# -----------------------------
#     ПЕРЕБОР РАЗБИЕНИЙ
# -----------------------------


def restricted_growth_strings(n: int, max_blocks: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Все разбиения n-элементного множества как строки ограниченного роста."""
    if n <= 0:
        return
    limit = n if max_blocks is None else max(1, min(n, max_blocks))
    labels = [0] * n

    def rec(i: int, blocks: int) -> Iterator[Tuple[int, ...]]:
        if i == n:
            yield tuple(labels)
            return
        for k in range(min(blocks + 1, limit)):
            labels[i] = k
            yield from rec(i + 1, max(blocks, k + 1))

    yield from rec(1, 1)


@cached(LRUCache(maxsize=64))
def _cached_partitions(n: int, max_blocks: Optional[int]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(restricted_growth_strings(n, max_blocks))


def enumerate_partitions(domain: Alphabet, max_blocks: Optional[int] = None) -> Iterator[Statistic]:
    """Все статистики на domain (с точностью до переименования классов)."""
    if domain.size <= _PARTITION_CACHE_MAX_N:
        source: Any = _cached_partitions(domain.size, max_blocks)
    else:
        source = restricted_growth_strings(domain.size, max_blocks)
    for labels in source:
        yield Statistic(domain, labels)
