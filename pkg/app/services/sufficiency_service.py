"""Проверки достаточности: марковские цепи через CMI, минимальные статистики, факторизация.

Марковская цепь A − B − C считается выполненной, если I(A;C|B) не превышает
порога MARKOV_THRESHOLD_BITS. Операции на отношениях правдоподобия
(minimal_sufficient, minimal_conditional_sufficient) prior не используют —
это режим неслучайного θ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.config import MARKOV_THRESHOLD_BITS, RATIO_RTOL, ZERO_CELL_EPS
from app.errors import ErrorCode, WorkbenchError
from app.services.model_core import (
    Alphabet,
    AxisSet,
    JointDistribution,
    ParamFamily,
    cell_symbols,
    cmi_terms,
    joint,
    marginal,
    product_alphabet,
    resolve_axes,
)
from app.services.statistics_service import (
    Statistic,
    attach,
    enumerate_partitions,
    from_labels,
    is_coarsening,
    product,
    resolve_domain,
)

logger = logging.getLogger(__name__)

# Перебор всех разбиений разумен только на маленьких алфавитах (Bell(8) = 4140)
MAX_ENUMERATION_SIZE = 8


@dataclass(frozen=True)
class MarkovVerdict:
    """Результат проверки цепи A − B − C: cmi = I(A;C|B)."""

    chain: str
    cmi_bits: float
    threshold_bits: float
    holds: bool
    witness: Optional[Dict[str, str]] = None

    def to_record(self) -> Dict[str, Any]:
        return {
            "chain": self.chain,
            "cmi_bits": self.cmi_bits,
            "threshold_bits": self.threshold_bits,
            "holds": self.holds,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class RatioVerdict:
    """Проверка пропорциональности векторов по θ внутри блоков разбиения."""

    holds: bool
    max_deviation: float
    tolerance: float
    witness: Optional[Dict[str, str]] = None

    def to_record(self) -> Dict[str, Any]:
        return {
            "holds": self.holds,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class SufficiencyReport:
    """Посылки и вывод одной теоремы, проверенные численно."""

    check: str
    premises: Tuple[Tuple[str, MarkovVerdict], ...]
    conclusion: MarkovVerdict
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def premises_hold(self) -> bool:
        return all(v.holds for _, v in self.premises)

    @property
    def consistent(self) -> bool:
        """Вывод обязан выполняться, если выполнены все посылки."""
        return self.conclusion.holds or not self.premises_hold

    def premise(self, name: str) -> MarkovVerdict:
        for n, v in self.premises:
            if n == name:
                return v
        raise KeyError(name)

    def to_record(self) -> Dict[str, Any]:
        record = {
            "check": self.check,
            "premises": [dict(name=n, **v.to_record()) for n, v in self.premises],
            "conclusion": self.conclusion.to_record(),
            "cmi_bits": self.conclusion.cmi_bits,
            "threshold_bits": self.conclusion.threshold_bits,
            "witness": self.conclusion.witness,
            "premises_hold": self.premises_hold,
            "consistent": self.consistent,
        }
        for key, value in self.extra.items():
            record[key] = value.to_record() if hasattr(value, "to_record") else value
        return record


def _threshold(value: Optional[float]) -> float:
    threshold = MARKOV_THRESHOLD_BITS if value is None else float(value)
    if not threshold > 0:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"порог должен быть положительным, получено {value!r}")
    return threshold


def _label(names: Sequence[str]) -> str:
    if not names:
        return "∅"
    return names[0] if len(names) == 1 else "(" + ",".join(names) + ")"


# -----------------------------
#     МАРКОВСКИЕ ЦЕПИ
# -----------------------------


def check_markov(
    dist: JointDistribution,
    a: AxisSet,
    b: AxisSet,
    c: AxisSet,
    threshold: Optional[float] = None,
) -> MarkovVerdict:
    """Проверяет цепь A − B − C: I(A;C|B) <= threshold."""
    threshold = _threshold(threshold)
    terms, (A, C, B) = cmi_terms(dist, a, c, b)
    cmi = max(float(terms.sum()), 0.0)
    holds = cmi <= threshold
    witness = None
    if not holds:
        ia, ic, ib = np.unravel_index(int(np.argmax(terms)), terms.shape)
        witness = {}
        witness.update(cell_symbols(dist, A, ia))
        witness.update(cell_symbols(dist, B, ib))
        witness.update(cell_symbols(dist, C, ic))
    chain = f"{_label(A)} - {_label(B)} - {_label(C)}"
    verdict = MarkovVerdict(chain, cmi, threshold, holds, witness)
    if not holds:
        logger.info("[SUFF] цепь %s нарушена: I=%.3e бит > %.1e", chain, cmi, threshold)
    return verdict


def statistic_verdict(
    dist: JointDistribution,
    target: AxisSet,
    t: Statistic,
    given: AxisSet = (),
    threshold: Optional[float] = None,
) -> MarkovVerdict:
    """Цепь target − (T(X), given) − X, где X — область определения статистики t."""
    work, axis = resolve_domain(dist, t.domain)
    target_names = resolve_axes(work, target)
    given_names = resolve_axes(work, given)
    work = marginal(work, target_names + [axis] + given_names)
    t_name = f"T({axis})"
    while t_name in work.names:
        t_name += "'"
    work = attach(work, axis, t, t_name)
    return check_markov(work, target_names, [t_name] + given_names, axis, threshold)


def is_sufficient(family: ParamFamily, t: Statistic, threshold: Optional[float] = None) -> MarkovVerdict:
    """θ − T(obs) − obs. Для статистики на одной оси — локальная достаточность на её маргинале."""
    return statistic_verdict(joint(family), family.theta.name, t, (), threshold)


def is_conditionally_sufficient(
    family: ParamFamily,
    t: Statistic,
    y_axis: AxisSet,
    threshold: Optional[float] = None,
) -> MarkovVerdict:
    """θ − (T(X), Y) − X: закон X при известных T(X) и Y не зависит от θ."""
    if len(family.obs_axes) < 2:
        raise WorkbenchError(
            ErrorCode.DOMAIN_MISMATCH,
            "условная достаточность требует хотя бы двух осей наблюдений",
        )
    y_names = [y_axis] if isinstance(y_axis, str) else list(y_axis)
    x_parts = set(t.domain.name.split(":"))
    if not y_names or x_parts & set(y_names):
        raise WorkbenchError(
            ErrorCode.DOMAIN_MISMATCH,
            f"ось условия {y_names} совпадает с областью статистики {t.domain.name!r}",
        )
    return statistic_verdict(joint(family), family.theta.name, t, y_names, threshold)


def global_sufficiency(
    family: ParamFamily, tx: Statistic, ty: Statistic, threshold: Optional[float] = None
) -> MarkovVerdict:
    """θ − (Tx(X), Ty(Y)) − (X, Y)."""
    return is_sufficient(family, product(tx, ty), threshold)


# -----------------------------
#     РАЗБИЕНИЯ ПО ОТНОШЕНИЮ ПРАВДОПОДОБИЯ
# -----------------------------


def _proportional(v: np.ndarray, w: np.ndarray, rtol: float) -> bool:
    """v ∝ w: одинаковые носители и единая константа на общем носителе."""
    sv = v > ZERO_CELL_EPS
    sw = w > ZERO_CELL_EPS
    if not np.array_equal(sv, sw):
        return False
    if not sv.any():
        return True
    return bool(np.allclose(v[sv] / v[sv].sum(), w[sw] / w[sw].sum(), rtol=rtol, atol=0.0))


def _with_null_class(labels: List[int]) -> List[int]:
    """Точки нулевой вероятности (-1) собираются в один класс после остальных."""
    null = max(labels) + 1 if labels else 0
    return [null if k < 0 else k for k in labels]


def ratio_labels(vectors: np.ndarray, rtol: float = RATIO_RTOL) -> List[int]:
    """Группирует строки по пропорциональности; нулевые строки получают -1."""
    reps: List[np.ndarray] = []
    labels: List[int] = []
    for v in np.asarray(vectors, dtype=float):
        if not np.any(v > ZERO_CELL_EPS):
            labels.append(-1)
            continue
        for k, rep in enumerate(reps):
            if _proportional(v, rep, rtol):
                labels.append(k)
                break
        else:
            reps.append(v)
            labels.append(len(reps) - 1)
    return labels


def ratio_partition(domain: Alphabet, vectors: np.ndarray, rtol: float = RATIO_RTOL) -> Statistic:
    return from_labels(domain, _with_null_class(ratio_labels(vectors, rtol)))


def _obs_tensor(family: ParamFamily, groups: Sequence[Sequence[str]]) -> Tuple[np.ndarray, List[Alphabet]]:
    """p(g1, g2, ... | θ) с θ последней осью; каждая группа осей склеена в одну."""
    names = [n for g in groups for n in g]
    for n in names:
        family.obs_axis(n)
    idx = [1 + family.obs_names.index(n) for n in names]
    drop = tuple(i for i in range(1, 1 + len(family.obs_axes)) if i not in idx)
    t = family.cond.sum(axis=drop) if drop else np.array(family.cond)
    remaining = [0] + [i for i in range(1, 1 + len(family.obs_axes)) if i in idx]
    order = [remaining.index(i) for i in idx] + [0]
    t = np.transpose(t, order)
    alphabets = []
    for g in groups:
        axes = [family.obs_axis(n) for n in g]
        alphabets.append(axes[0] if len(axes) == 1 else product_alphabet(axes))
    return t.reshape([a.size for a in alphabets] + [family.theta.size]), alphabets


def _names(axes: Optional[AxisSet], family: ParamFamily) -> List[str]:
    if axes is None:
        return list(family.obs_names)
    return [axes] if isinstance(axes, str) else list(axes)


def minimal_sufficient(family: ParamFamily, axes: Optional[AxisSet] = None, rtol: float = RATIO_RTOL) -> Statistic:
    """Минимальная достаточная статистика: x ~ x̂, если p(x|θ) = c·p(x̂|θ) при всех θ."""
    names = _names(axes, family)
    t, (domain,) = _obs_tensor(family, [names])
    stat = ratio_partition(domain, t, rtol)
    logger.info(
        "[SUFF] минимальная достаточная на %s: %d классов из %d",
        domain.name, stat.num_classes, domain.size,
    )
    return stat


def minimal_conditional_sufficient(
    family: ParamFamily,
    x_axis: AxisSet,
    y_axis: AxisSet,
    rtol: float = RATIO_RTOL,
) -> Statistic:
    """Минимальная условно достаточная статистика X при известном Y.

    x ~ x̂, если для каждого y, где обе точки имеют ненулевую массу хотя бы при
    одном θ, векторы p(x,y|·) и p(x̂,y|·) пропорциональны с одинаковым носителем.
    Точки с нулевой массой при всех (y, θ) образуют отдельный нулевой класс.
    """
    x_names, y_names = _names(x_axis, family), _names(y_axis, family)
    if set(x_names) & set(y_names):
        raise WorkbenchError(ErrorCode.DOMAIN_MISMATCH, "оси X и Y пересекаются")
    t, (x_domain, _) = _obs_tensor(family, [x_names, y_names])
    alive = t.max(axis=2) > ZERO_CELL_EPS  # [x, y]

    def compatible(i: int, j: int) -> bool:
        for y in np.flatnonzero(alive[i] & alive[j]):
            if not _proportional(t[i, y], t[j, y], rtol):
                return False
        return True

    classes: List[List[int]] = []
    labels: List[int] = []
    non_transitive = False
    for i in range(x_domain.size):
        if not alive[i].any():
            labels.append(-1)
            continue
        for k, members in enumerate(classes):
            hits = [compatible(i, j) for j in members]
            if all(hits):
                members.append(i)
                labels.append(k)
                break
            if any(hits):
                non_transitive = True
        else:
            classes.append([i])
            labels.append(len(classes) - 1)
    if non_transitive:
        logger.warning(
            "[SUFF] отношение пропорциональности на %s не транзитивно: минимальная статистика может быть не единственной",
            x_domain.name,
        )
    stat = from_labels(x_domain, _with_null_class(labels))
    logger.info(
        "[SUFF] минимальная условно достаточная %s | %s: %d классов",
        x_domain.name, ",".join(y_names), stat.num_classes,
    )
    return stat


def verify_minimality(
    family: ParamFamily,
    stat: Statistic,
    candidates: Sequence[Statistic],
    threshold: Optional[float] = None,
) -> List[Dict[str, Any]]:
    """Для каждого кандидата: достаточен ли он и измельчает ли он stat."""
    rows = []
    for cand in candidates:
        verdict = is_sufficient(family, cand, threshold)
        refines = is_coarsening(stat, cand)
        rows.append({
            "candidate": cand.partition_label(),
            "sufficient": verdict.holds,
            "cmi_bits": verdict.cmi_bits,
            "refines_minimal": refines,
            "ok": (not verdict.holds) or refines,
        })
    return rows


# -----------------------------
#     ФАКТОРИЗАЦИЯ p(x|y,θ) = g(Tx|Ty,θ)·h(x,y)
# -----------------------------


def obs_names_of(family: ParamFamily, t: Statistic) -> List[str]:
    if t.domain.name in family.obs_names:
        return [t.domain.name]
    parts = t.domain.name.split(":")
    if all(p in family.obs_names for p in parts):
        return parts
    raise WorkbenchError(ErrorCode.DOMAIN_MISMATCH, f"ось {t.domain.name!r} не найдена в семействе")


def factorization_verdict(
    family: ParamFamily, tx: Statistic, ty: Statistic, rtol: float = RATIO_RTOL
) -> RatioVerdict:
    """Внутри каждого блока (Tx-класс, Ty-класс) все векторы p(x|y,·) пропорциональны."""
    x_names, y_names = obs_names_of(family, tx), obs_names_of(family, ty)
    t, (x_dom, y_dom) = _obs_tensor(family, [x_names, y_names])
    if x_dom.symbols != tx.domain.symbols or y_dom.symbols != ty.domain.symbols:
        raise WorkbenchError(ErrorCode.DOMAIN_MISMATCH, "статистики не совпадают с осями семейства")
    p_y = t.sum(axis=0)  # [y, θ]
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(p_y[None, :, :] > ZERO_CELL_EPS, t / p_y[None, :, :], 0.0)

    reps: Dict[Tuple[int, int], Tuple[int, int]] = {}
    worst = 0.0
    witness = None
    for x in range(x_dom.size):
        for y in range(y_dom.size):
            v = c[x, y]
            if not np.any(v > ZERO_CELL_EPS):
                continue
            block = (tx.labels[x], ty.labels[y])
            if block not in reps:
                reps[block] = (x, y)
                continue
            rx, ry = reps[block]
            w = c[rx, ry]
            if _proportional(v, w, rtol):
                continue
            sv, sw = v > ZERO_CELL_EPS, w > ZERO_CELL_EPS
            if np.array_equal(sv, sw):
                dev = float(np.max(np.abs(v / v.sum() - w / w.sum())))
            else:
                dev = 1.0
            if dev > worst:
                worst = dev
                witness = {
                    x_dom.name: x_dom.symbols[x], y_dom.name: y_dom.symbols[y],
                    f"{x_dom.name}'": x_dom.symbols[rx], f"{y_dom.name}'": y_dom.symbols[ry],
                }
    return RatioVerdict(witness is None, worst, rtol, witness)


def theorem2_check(
    family: ParamFamily,
    tx: Statistic,
    ty: Statistic,
    threshold: Optional[float] = None,
) -> SufficiencyReport:
    """Глобальная достаточность (Tx, Ty) при локально достаточной Ty двумя способами.

    (a) цепь θ − (Tx,Ty) − (X,Y) через CMI; (b) факторизация p(x|y,θ).
    """
    local = is_sufficient(family, ty, threshold)
    if not local.holds:
        raise WorkbenchError(
            ErrorCode.PRECONDITION_FAILED,
            f"Ty не является локально достаточной для θ: I={local.cmi_bits:.3e} бит",
            {"cmi_bits": local.cmi_bits, "chain": local.chain},
        )
    direct = global_sufficiency(family, tx, ty, threshold)
    factor = factorization_verdict(family, tx, ty)
    agree = direct.holds == factor.holds
    if not agree:
        logger.warning(
            "[SUFF] CMI-вердикт (%s) и факторизация (%s) расходятся: I=%.3e",
            direct.holds, factor.holds, direct.cmi_bits,
        )
    return SufficiencyReport(
        check="theorem2",
        premises=(("local_ty", local),),
        conclusion=direct,
        extra={"factorization": factor, "agree": agree},
    )


def completing_statistics(
    family: ParamFamily,
    ty: Statistic,
    x_axis: AxisSet,
    threshold: Optional[float] = None,
) -> List[Statistic]:
    """Все Tx (перебором разбиений), при которых пара (Tx, Ty) глобально достаточна."""
    x_names = _names(x_axis, family)
    _, (x_domain,) = _obs_tensor(family, [x_names])
    if x_domain.size > MAX_ENUMERATION_SIZE:
        raise WorkbenchError(
            ErrorCode.INVALID_CONFIG,
            f"перебор разбиений алфавита из {x_domain.size} символов слишком велик",
        )
    found = [tx for tx in enumerate_partitions(x_domain) if global_sufficiency(family, tx, ty, threshold).holds]
    logger.info("[SUFF] дополняющих Tx для Ty на %s: %d", ty.domain.name, len(found))
    return found
