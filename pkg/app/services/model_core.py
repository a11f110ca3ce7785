"""Вероятностное ядро: алфавиты, совместные распределения, параметрические семейства.

Все значения неизменяемы после создания (массивы numpy помечаются read-only),
все операции — чистые функции. Информационные меры считаются в битах.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np

from app.config import (
    MAX_TENSOR_CELLS,
    NORMALIZATION_TOLERANCE,
    SUM_TOLERANCE,
    ZERO_CELL_EPS,
)
from app.errors import ErrorCode, WorkbenchError

logger = logging.getLogger(__name__)

AxisSet = Union[str, Sequence[str]]

THETA_AXIS = "theta"
PRODUCT_SEPARATOR = ":"


def _frozen(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.flags.writeable = False
    return arr


def _check_cells(shape: Sequence[int]) -> None:
    cells = int(np.prod([int(s) for s in shape], dtype=np.int64)) if len(shape) else 1
    if cells > MAX_TENSOR_CELLS:
        raise WorkbenchError(
            ErrorCode.TOO_LARGE,
            f"тензор из {cells} ячеек превышает лимит {MAX_TENSOR_CELLS}",
            {"cells": cells},
        )


def _normalized(arr: np.ndarray, what: str) -> np.ndarray:
    """Проверяет знак и нормировку; дрейф <= NORMALIZATION_TOLERANCE молча убирает."""
    if np.any(~np.isfinite(arr)):
        raise WorkbenchError(ErrorCode.NEGATIVE_PROB, f"{what}: нечисловые значения")
    if np.any(arr < 0):
        raise WorkbenchError(
            ErrorCode.NEGATIVE_PROB,
            f"{what}: отрицательная вероятность {float(arr.min())!r}",
        )
    total = float(arr.sum())
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise WorkbenchError(
            ErrorCode.NORMALIZATION,
            f"{what}: сумма {total!r} отличается от 1 больше чем на {NORMALIZATION_TOLERANCE}",
            {"sum": total},
        )
    if total != 1.0:
        arr = arr / total
    return arr


# -----------------------------
#     ТИПЫ
# -----------------------------


@dataclass(frozen=True)
class Alphabet:
    """Конечный алфавит: имя и упорядоченный список различных символов."""

    name: str
    symbols: Tuple[str, ...]

    def __post_init__(self) -> None:
        symbols = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if not self.name:
            raise WorkbenchError(ErrorCode.SHAPE_MISMATCH, "у алфавита нет имени")
        if not symbols:
            raise WorkbenchError(ErrorCode.SHAPE_MISMATCH, f"алфавит {self.name!r} пуст")
        if len(set(symbols)) != len(symbols):
            dups = sorted(s for s, n in Counter(symbols).items() if n > 1)
            raise WorkbenchError(
                ErrorCode.DUPLICATE_SYMBOL,
                f"алфавит {self.name!r}: повторяющиеся символы {dups}",
                {"axis": self.name, "symbols": dups},
            )

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: Any) -> int:
        try:
            return self.symbols.index(str(symbol))
        except ValueError:
            raise WorkbenchError(
                ErrorCode.MISSING_SYMBOL,
                f"символ {symbol!r} отсутствует в алфавите {self.name!r}",
            ) from None

    def renamed(self, name: str) -> "Alphabet":
        return Alphabet(name, self.symbols)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Плотный тензор вероятностей, одна ось на алфавит."""

    axes: Tuple[Alphabet, ...]
    probs: np.ndarray

    def __post_init__(self) -> None:
        axes = tuple(self.axes)
        object.__setattr__(self, "axes", axes)
        if not axes:
            raise WorkbenchError(ErrorCode.EMPTY_AXIS_SET, "распределение без осей")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise WorkbenchError(ErrorCode.AXIS_OVERLAP, f"повторяющиеся имена осей {names}")
        probs = np.asarray(self.probs, dtype=float)
        expected = tuple(a.size for a in axes)
        if probs.shape != expected:
            raise WorkbenchError(
                ErrorCode.SHAPE_MISMATCH,
                f"форма тензора {probs.shape} не совпадает с размерами осей {expected}",
            )
        _check_cells(expected)
        object.__setattr__(self, "probs", _frozen(_normalized(probs, "совместное распределение")))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    def axis(self, name: str) -> Alphabet:
        return self.axes[self.axis_index(name)]

    def axis_index(self, name: str) -> int:
        for i, a in enumerate(self.axes):
            if a.name == name:
                return i
        raise WorkbenchError(
            ErrorCode.UNKNOWN_AXIS,
            f"ось {name!r} не найдена среди {list(self.names)}",
            {"axis": name},
        )

    def tensor(self, names: AxisSet) -> np.ndarray:
        """Маргинальный тензор на осях names в заданном порядке."""
        keep = resolve_axes(self, names)
        idx = [self.axis_index(n) for n in keep]
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        summed = self.probs.sum(axis=drop) if drop else np.array(self.probs)
        remaining = [i for i in range(len(self.axes)) if i in idx]
        order = [remaining.index(i) for i in idx]
        return np.transpose(summed, order)


@dataclass(frozen=True, eq=False)
class ParamFamily:
    """Априорное распределение θ и условная таблица p(obs | θ)."""

    theta: Alphabet
    prior: np.ndarray
    obs_axes: Tuple[Alphabet, ...]
    cond: np.ndarray

    def __post_init__(self) -> None:
        obs_axes = tuple(self.obs_axes)
        object.__setattr__(self, "obs_axes", obs_axes)
        if not obs_axes:
            raise WorkbenchError(ErrorCode.EMPTY_AXIS_SET, "у семейства нет осей наблюдений")
        names = [self.theta.name] + [a.name for a in obs_axes]
        if len(set(names)) != len(names):
            raise WorkbenchError(ErrorCode.AXIS_OVERLAP, f"повторяющиеся имена осей {names}")

        prior = np.asarray(self.prior, dtype=float)
        if prior.shape != (self.theta.size,):
            raise WorkbenchError(
                ErrorCode.SHAPE_MISMATCH,
                f"prior длины {prior.shape} для {self.theta.size} значений θ",
            )
        prior = _normalized(prior, "prior")

        cond = np.asarray(self.cond, dtype=float)
        expected = (self.theta.size,) + tuple(a.size for a in obs_axes)
        if cond.shape != expected:
            raise WorkbenchError(
                ErrorCode.SHAPE_MISMATCH,
                f"форма cond {cond.shape} не совпадает с ожидаемой {expected}",
            )
        _check_cells(expected)
        slices = [
            _normalized(cond[k], f"cond[{self.theta.name}={s}]")
            for k, s in enumerate(self.theta.symbols)
        ]
        object.__setattr__(self, "prior", _frozen(prior))
        object.__setattr__(self, "cond", _frozen(np.stack(slices)))

    @property
    def obs_names(self) -> Tuple[str, ...]:
        return tuple(a.name for a in self.obs_axes)

    def obs_axis(self, name: str) -> Alphabet:
        for a in self.obs_axes:
            if a.name == name:
                return a
        raise WorkbenchError(
            ErrorCode.UNKNOWN_AXIS,
            f"ось наблюдений {name!r} не найдена среди {list(self.obs_names)}",
        )


# -----------------------------
#     ПОСТРОЕНИЕ
# -----------------------------


def as_alphabet(item: Any, default_name: str = "") -> Alphabet:
    if isinstance(item, Alphabet):
        return item
    if isinstance(item, Mapping):
        return Alphabet(str(item.get("name") or default_name), tuple(item.get("symbols") or ()))
    return Alphabet(default_name, tuple(item))


def _as_array(values: Any, what: str) -> np.ndarray:
    try:
        return np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise WorkbenchError(ErrorCode.SHAPE_MISMATCH, f"{what}: рваный или нечисловой массив ({e})") from None


def build_family(spec: Mapping[str, Any]) -> ParamFamily:
    """Собирает и валидирует ParamFamily из описания модели.

    Ожидаемые ключи: theta (символы или Alphabet), prior, axes (список
    {name, symbols}), cond (вложенные массивы: сначала θ, затем оси по порядку).
    Необязательный theta_name задаёт имя оси параметра.
    """
    theta = as_alphabet(spec["theta"], str(spec.get("theta_name") or THETA_AXIS))
    axes = tuple(as_alphabet(a, f"obs{i}") for i, a in enumerate(spec["axes"]))
    family = ParamFamily(
        theta=theta,
        prior=_as_array(spec["prior"], "prior"),
        obs_axes=axes,
        cond=_as_array(spec["cond"], "cond"),
    )
    logger.debug(
        "[MODEL] семейство: |θ|=%d, оси %s",
        theta.size,
        ", ".join(f"{a.name}({a.size})" for a in axes),
    )
    return family


def make_joint(axes: Sequence[Any], probs: Any) -> JointDistribution:
    """Удобный конструктор совместного распределения из описаний осей."""
    alphabets = tuple(as_alphabet(a, f"axis{i}") for i, a in enumerate(axes))
    return JointDistribution(alphabets, _as_array(probs, "probs"))


def joint(family: ParamFamily) -> JointDistribution:
    """p(θ, obs) = prior(θ) · p(obs | θ)."""
    shape = (family.theta.size,) + (1,) * len(family.obs_axes)
    probs = family.prior.reshape(shape) * family.cond
    return JointDistribution((family.theta,) + family.obs_axes, probs)


def product_alphabet(alphabets: Sequence[Alphabet], name: str = "") -> Alphabet:
    """Декартово произведение алфавитов (первый — старший разряд)."""
    alphabets = list(alphabets)
    _check_cells([a.size for a in alphabets])
    symbols = [""]
    for k, a in enumerate(alphabets):
        sep = PRODUCT_SEPARATOR if k else ""
        symbols = [s + sep + t for s in symbols for t in a.symbols]
    return Alphabet(name or PRODUCT_SEPARATOR.join(a.name for a in alphabets), tuple(symbols))


def resolve_axes(dist: JointDistribution, axes: AxisSet) -> List[str]:
    if axes is None:
        return []
    names = [axes] if isinstance(axes, str) else list(axes)
    for n in names:
        dist.axis_index(n)
    return names


def marginal(dist: JointDistribution, keep: AxisSet) -> JointDistribution:
    """Суммирует по осям, не вошедшим в keep; порядок осей сохраняется."""
    names = resolve_axes(dist, keep)
    if not names:
        raise WorkbenchError(ErrorCode.EMPTY_AXIS_SET, "пустой набор осей для маргинализации")
    ordered = [a.name for a in dist.axes if a.name in names]
    return JointDistribution(tuple(dist.axis(n) for n in ordered), dist.tensor(ordered))


def condition(dist: JointDistribution, axis: str, value: Any) -> JointDistribution:
    """Перенормированный срез p(остальные | axis=value)."""
    k = dist.axis_index(axis)
    if len(dist.axes) < 2:
        raise WorkbenchError(ErrorCode.EMPTY_AXIS_SET, "после условия не останется осей")
    i = dist.axes[k].index(value)
    piece = np.take(dist.probs, i, axis=k)
    mass = float(piece.sum())
    if mass <= ZERO_CELL_EPS:
        raise WorkbenchError(
            ErrorCode.ZERO_EVENT,
            f"P({axis}={value}) = 0, условие не определено",
            {"axis": axis, "value": str(value)},
        )
    rest = dist.axes[:k] + dist.axes[k + 1:]
    return JointDistribution(rest, piece / mass)


def merge_axes(dist: JointDistribution, names: Sequence[str], name: str = "") -> JointDistribution:
    """Склеивает несколько осей в одну ось-произведение на месте первой из них."""
    names = resolve_axes(dist, names)
    if len(names) == 1 and not name:
        return dist
    merged = product_alphabet([dist.axis(n) for n in names], name)
    others = [a.name for a in dist.axes if a.name not in names]
    first = min(dist.axis_index(n) for n in names)
    position = sum(1 for a in dist.axes[:first] if a.name not in names)
    order = others[:position] + names + others[position:]
    t = dist.tensor(order)
    shape = (
        [dist.axis(n).size for n in others[:position]]
        + [merged.size]
        + [dist.axis(n).size for n in others[position:]]
    )
    axes = [dist.axis(n) for n in others[:position]] + [merged] + [dist.axis(n) for n in others[position:]]
    return JointDistribution(tuple(axes), t.reshape(shape))


def extend_with_channel(
    dist: JointDistribution,
    source: str,
    channel: Any,
    new_axes: Sequence[Alphabet],
) -> JointDistribution:
    """Добавляет оси new_axes, порождённые каналом p(new | source).

    channel имеет форму (|source|, *размеры new_axes), строки стохастические.
    """
    k = dist.axis_index(source)
    new_axes = tuple(new_axes)
    ch = _as_array(channel, "channel")
    expected = (dist.axes[k].size,) + tuple(a.size for a in new_axes)
    if ch.shape != expected:
        raise WorkbenchError(
            ErrorCode.SHAPE_MISMATCH,
            f"канал формы {ch.shape}, ожидалось {expected}",
        )
    rows = ch.reshape(ch.shape[0], -1)
    if np.any(rows < 0) or np.any(np.abs(rows.sum(axis=1) - 1.0) > NORMALIZATION_TOLERANCE):
        raise WorkbenchError(ErrorCode.NORMALIZATION, "канал не является стохастическим по строкам")
    _check_cells(dist.probs.shape + expected[1:])
    base = np.moveaxis(dist.probs, k, -1)
    combined = base[..., None] * rows.reshape((1,) * (base.ndim - 1) + rows.shape)
    probs = combined.reshape(base.shape + expected[1:])
    back = np.moveaxis(probs, base.ndim - 1, k)
    return JointDistribution(dist.axes + new_axes, back)


# -----------------------------
#     ИНФОРМАЦИОННЫЕ МЕРЫ
# -----------------------------


def _plogp(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > ZERO_CELL_EPS]
    return float(-(p * np.log2(p)).sum())


def entropy(dist: JointDistribution, axes: AxisSet = None) -> float:
    """Энтропия Шеннона маргинала на axes (все оси, если None), в битах."""
    names = resolve_axes(dist, axes) if axes is not None else list(dist.names)
    if not names:
        return 0.0
    return _plogp(dist.tensor(names))


def entropy_of(p: Any) -> float:
    """Энтропия произвольного вектора вероятностей, в битах."""
    return _plogp(np.asarray(p, dtype=float))


def _groups(dist: JointDistribution, a: AxisSet, b: AxisSet, c: AxisSet) -> Tuple[List[str], List[str], List[str]]:
    A, B, C = resolve_axes(dist, a), resolve_axes(dist, b), resolve_axes(dist, c)
    if not A or not B:
        raise WorkbenchError(ErrorCode.EMPTY_AXIS_SET, "наборы A и B не должны быть пустыми")
    for x, y in ((A, B), (A, C), (B, C)):
        common = set(x) & set(y)
        if common or len(set(x)) != len(x):
            raise WorkbenchError(
                ErrorCode.AXIS_OVERLAP,
                f"наборы осей пересекаются: {sorted(common) or x}",
            )
    return A, B, C


def _group_tensor(dist: JointDistribution, groups: Sequence[Sequence[str]]) -> np.ndarray:
    names = [n for g in groups for n in g]
    t = dist.tensor(names)
    shape = [int(np.prod([dist.axis(n).size for n in g])) if g else 1 for g in groups]
    return t.reshape(shape)


def cmi_terms(
    dist: JointDistribution, a: AxisSet, b: AxisSet, c: AxisSet = ()
) -> Tuple[np.ndarray, Tuple[List[str], List[str], List[str]]]:
    """Поячеечные слагаемые I(A;B|C): p(abc)·log2(p(abc)p(c) / (p(ac)p(bc)))."""
    groups = _groups(dist, a, b, c)
    p = _group_tensor(dist, groups)
    p_c = p.sum(axis=(0, 1))
    p_ac = p.sum(axis=1)
    p_bc = p.sum(axis=0)
    mask = p > ZERO_CELL_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = p * p_c[None, None, :] / (p_ac[:, None, :] * p_bc[None, :, :])
        terms = np.where(mask, p * np.log2(np.where(mask, ratio, 1.0)), 0.0)
    return terms, groups


def conditional_mutual_information(
    dist: JointDistribution, a: AxisSet, b: AxisSet, c: AxisSet = ()
) -> float:
    """I(A;B|C) в битах прямым суммированием по совместному тензору.

    Пустой C даёт взаимную информацию. Отрицательный шум округления
    отсекается в 0.
    """
    terms, _ = cmi_terms(dist, a, b, c)
    value = float(terms.sum())
    if value < -SUM_TOLERANCE:
        logger.debug("[MODEL] отрицательная CMI %.3e обрезана до 0", value)
    return max(value, 0.0)


def mutual_information(dist: JointDistribution, a: AxisSet, b: AxisSet) -> float:
    return conditional_mutual_information(dist, a, b, ())


def cell_symbols(dist: JointDistribution, names: Sequence[str], flat_index: int) -> Dict[str, str]:
    """Раскладывает плоский индекс группы осей обратно в символы."""
    if not names:
        return {}
    sizes = [dist.axis(n).size for n in names]
    idx = np.unravel_index(int(flat_index), sizes)
    return {n: dist.axis(n).symbols[int(i)] for n, i in zip(names, idx)}
