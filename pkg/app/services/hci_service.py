"""Модель иерархической условной независимости: θ → W → (X, Y)."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from app.config import COMPOSITION_TOLERANCE, SUM_TOLERANCE
from app.errors import ErrorCode, WorkbenchError
from app.services.model_core import (
    Alphabet,
    AxisSet,
    JointDistribution,
    ParamFamily,
    extend_with_channel,
)
from app.services.statistics_service import Statistic, attach, product
from app.services.sufficiency_service import (
    MarkovVerdict,
    SufficiencyReport,
    check_markov,
    obs_names_of,
    statistic_verdict,
)

logger = logging.getLogger(__name__)

TW_AXIS = "T(W)"


def _stochastic(channel: Any, shape: Tuple[int, ...], what: str) -> np.ndarray:
    ch = np.asarray(channel, dtype=float)
    if ch.shape != shape:
        raise WorkbenchError(ErrorCode.SHAPE_MISMATCH, f"{what}: форма {ch.shape}, ожидалось {shape}")
    rows = ch.reshape(shape[0], -1)
    if np.any(rows < 0):
        raise WorkbenchError(ErrorCode.NEGATIVE_PROB, f"{what}: отрицательные вероятности")
    drift = float(np.max(np.abs(rows.sum(axis=1) - 1.0)))
    if drift > SUM_TOLERANCE:
        raise WorkbenchError(
            ErrorCode.NORMALIZATION,
            f"{what}: строки канала суммируются в 1 лишь с точностью {drift:.2e}",
        )
    ch = ch.copy()
    ch.setflags(write=False)
    return ch


@dataclass(frozen=True, eq=False)
class HciModel:
    """Семейство вместе со скрытой переменной W и двумя каналами."""

    family: ParamFamily
    w: Alphabet
    p_w_given_theta: np.ndarray
    p_obs_given_w: np.ndarray

    def __post_init__(self) -> None:
        if self.w.name == self.family.theta.name or self.w.name in self.family.obs_names:
            raise WorkbenchError(ErrorCode.AXIS_OVERLAP, f"имя оси W {self.w.name!r} уже занято")
        object.__setattr__(
            self, "p_w_given_theta",
            _stochastic(self.p_w_given_theta, (self.family.theta.size, self.w.size), "p(w|θ)"),
        )
        obs_shape = tuple(a.size for a in self.family.obs_axes)
        object.__setattr__(
            self, "p_obs_given_w",
            _stochastic(self.p_obs_given_w, (self.w.size,) + obs_shape, "p(obs|w)"),
        )

    def composed_cond(self) -> np.ndarray:
        """Σ_w p(w|θ)·p(obs|w)."""
        return np.tensordot(self.p_w_given_theta, self.p_obs_given_w, axes=(1, 0))

    def composition_error(self) -> float:
        return float(np.max(np.abs(self.composed_cond() - self.family.cond)))


def check_composition(h: HciModel) -> None:
    err = h.composition_error()
    if err > COMPOSITION_TOLERANCE:
        raise WorkbenchError(
            ErrorCode.COMPOSITION_MISMATCH,
            f"каналы через {h.w.name!r} не воспроизводят p(obs|θ): отклонение {err:.2e}",
            {"max_abs_error": err},
        )


def build_hci(family: ParamFamily, w: Alphabet, p_w_given_theta: Any, p_obs_given_w: Any) -> HciModel:
    """HciModel поверх готового семейства; композиция каналов проверяется."""
    h = HciModel(family, w, p_w_given_theta, p_obs_given_w)
    check_composition(h)
    return h


def hci_from_channels(
    theta: Alphabet,
    prior: Any,
    w: Alphabet,
    p_w_given_theta: Any,
    obs_axes: Sequence[Alphabet],
    p_obs_given_w: Any,
) -> HciModel:
    """Строит семейство как композицию каналов θ → W → obs."""
    pw = np.asarray(p_w_given_theta, dtype=float)
    po = np.asarray(p_obs_given_w, dtype=float)
    cond = np.tensordot(pw, po, axes=(1, 0))
    family = ParamFamily(theta, np.asarray(prior, dtype=float), tuple(obs_axes), cond)
    return build_hci(family, w, pw, po)


def hci_joint(h: HciModel) -> JointDistribution:
    """p(θ, w, obs) = prior(θ)·p(w|θ)·p(obs|w)."""
    base = JointDistribution((h.family.theta,), h.family.prior)
    with_w = extend_with_channel(base, h.family.theta.name, h.p_w_given_theta, [h.w])
    return extend_with_channel(with_w, h.w.name, h.p_obs_given_w, h.family.obs_axes)


def _split(h: HciModel, x_axes: Optional[AxisSet], y_axes: Optional[AxisSet]) -> Tuple[List[str], List[str]]:
    names = list(h.family.obs_names)
    if len(names) < 2:
        raise WorkbenchError(ErrorCode.DOMAIN_MISMATCH, "для X − W − Y нужны хотя бы две оси наблюдений")
    xs = [x_axes] if isinstance(x_axes, str) else list(x_axes or names[:1])
    ys = [y_axes] if isinstance(y_axes, str) else list(y_axes or [n for n in names if n not in xs])
    return xs, ys


def verify_hci(
    h: HciModel,
    x_axes: Optional[AxisSet] = None,
    y_axes: Optional[AxisSet] = None,
    threshold: Optional[float] = None,
) -> Tuple[MarkovVerdict, MarkovVerdict]:
    """Цепи θ − W − (X,Y) и X − W − Y на совместном p(θ,w,x,y).

    По умолчанию X — первая ось наблюдений, Y — остальные.
    """
    check_composition(h)
    xs, ys = _split(h, x_axes, y_axes)
    d = hci_joint(h)
    first = check_markov(d, h.family.theta.name, h.w.name, list(h.family.obs_names), threshold)
    second = check_markov(d, xs, h.w.name, ys, threshold)
    logger.info(
        "[HCI] %s: θ−W−obs %s (%.2e), X−W−Y %s (%.2e)",
        h.w.name, first.holds, first.cmi_bits, second.holds, second.cmi_bits,
    )
    return first, second


def lemma1_check(h: HciModel, t: Statistic, threshold: Optional[float] = None) -> SufficiencyReport:
    """Статистика, достаточная для W, достаточна и для θ.

    Посылки θ − W − obs и W − T(obs) − obs; вывод θ − T(obs) − obs.
    """
    check_composition(h)
    covered = obs_names_of(h.family, t)
    if sorted(covered) != sorted(h.family.obs_names):
        raise WorkbenchError(
            ErrorCode.DOMAIN_MISMATCH,
            f"статистика должна быть задана на всех наблюдениях, а не на {t.domain.name!r}",
        )
    d = hci_joint(h)
    chain = check_markov(d, h.family.theta.name, h.w.name, list(h.family.obs_names), threshold)
    for_w = statistic_verdict(d, h.w.name, t, (), threshold)
    conclusion = statistic_verdict(d, h.family.theta.name, t, (), threshold)
    bound_ok = (not chain.holds) or conclusion.cmi_bits <= for_w.cmi_bits + COMPOSITION_TOLERANCE
    return SufficiencyReport(
        check="lemma1",
        premises=(("theta_w_obs", chain), ("w_t_obs", for_w)),
        conclusion=conclusion,
        extra={"bound_ok": bound_ok},
    )


def theorem1_check(
    h: HciModel,
    tw: Statistic,
    tx: Statistic,
    ty: Statistic,
    threshold: Optional[float] = None,
) -> SufficiencyReport:
    """Локальная достаточность (Tx, Ty) для T(W) плюс независимость при T(W) дают глобальную.

    Посылки: θ − T(W) − W, X − T(W) − Y, T(W) − Tx(X) − X, T(W) − Ty(Y) − Y.
    Промежуточный вывод: T(W) − (Tx,Ty) − (X,Y). Итог: θ − (Tx,Ty) − (X,Y).
    """
    check_composition(h)
    if tw.domain.symbols != h.w.symbols:
        raise WorkbenchError(ErrorCode.DOMAIN_MISMATCH, f"T(W) задана не на алфавите {h.w.name!r}")
    xs, ys = obs_names_of(h.family, tx), obs_names_of(h.family, ty)
    if set(xs) & set(ys):
        raise WorkbenchError(ErrorCode.AXIS_OVERLAP, "области Tx и Ty пересекаются")

    theta = h.family.theta.name
    d = attach(hci_joint(h), h.w.name, tw, TW_AXIS)
    pair = product(tx, ty)
    premises = (
        ("theta_tw_w", check_markov(d, theta, TW_AXIS, h.w.name, threshold)),
        ("x_tw_y", check_markov(d, xs, TW_AXIS, ys, threshold)),
        ("local_x", statistic_verdict(d, TW_AXIS, tx, (), threshold)),
        ("local_y", statistic_verdict(d, TW_AXIS, ty, (), threshold)),
    )
    intermediate = statistic_verdict(d, TW_AXIS, pair, (), threshold)
    conclusion = statistic_verdict(d, theta, pair, (), threshold)
    report = SufficiencyReport(
        check="theorem1",
        premises=premises,
        conclusion=conclusion,
        extra={"global_for_tw": intermediate},
    )
    if not report.consistent:
        logger.warning("[HCI] посылки выполнены, но вывод нарушен: I=%.3e бит", conclusion.cmi_bits)
    return report
