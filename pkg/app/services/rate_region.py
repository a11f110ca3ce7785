"""Область скоростей кодирования с помощником: R1 >= H(X|U), R2 >= I(Y;U), X − Y − U.

Граница ищется двумя путями: перебор детерминированных отображений Y → U
(ловит угловые точки точно) и случайные старты итераций информационного
бутылочного горлышка по сетке λ (заполняют выпуклую часть).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from tqdm import tqdm

from app.config import (
    DEFAULT_SEED,
    FRONTIER_LAMBDA_STEP,
    FRONTIER_MAX_BETA,
    FRONTIER_MAX_ITER,
    FRONTIER_MAX_PARTITIONS,
    FRONTIER_SEARCH_TOL,
    FRONTIER_TOL,
    MARKOV_THRESHOLD_BITS,
    SHOW_PROGRESS,
    ZERO_CELL_EPS,
)
from app.errors import ErrorCode, WorkbenchError
from app.services.model_core import entropy_of
from app.services.source_model import SourceModel
from app.services.statistics_service import Statistic, attach, enumerate_partitions
from app.services.sufficiency_service import MarkovVerdict, check_markov, ratio_partition

logger = logging.getLogger(__name__)

PARETO_EPS = 1e-12
LIFT_TOLERANCE = 1e-9
_BISECTION_STEPS = 60

Point = Tuple[float, float]


@dataclass(frozen=True, eq=False)
class RateFrontier:
    """Парето-минимальные пары (r1, r2) и каналы q(u|y), на которых они достигаются."""

    points: Tuple[Point, ...]
    channels: Tuple[np.ndarray, ...]
    u_card: int
    origins: Tuple[str, ...] = ()
    stats: Dict[str, Any] = field(default_factory=dict)

    def rows(self) -> List[Dict[str, Any]]:
        return [{"r1_bits": r1, "r2_bits": r2} for r1, r2 in self.points]

    def to_record(self) -> Dict[str, Any]:
        return {"u_card": self.u_card, "num_points": len(self.points), **self.stats}


# -----------------------------
#     СКОРОСТИ ДЛЯ КАНАЛА
# -----------------------------


def _plogp_sum(p: np.ndarray, axes: Tuple[int, ...]) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > ZERO_CELL_EPS, -p * np.log2(np.where(p > ZERO_CELL_EPS, p, 1.0)), 0.0)
    return terms.sum(axis=axes)


def batch_rates(p_xy: np.ndarray, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(H(X|U), I(Y;U)) для пачки каналов q формы (B, |Y|, |U|)."""
    p_y = p_xy.sum(axis=0)
    p_xu = np.einsum("xy,byu->bxu", p_xy, q)
    p_u = p_xu.sum(axis=1)
    p_yu = p_y[None, :, None] * q
    h_u = _plogp_sum(p_u, (1,))
    r1 = _plogp_sum(p_xu, (1, 2)) - h_u
    r2 = entropy_of(p_y) + h_u - _plogp_sum(p_yu, (1, 2))
    return np.maximum(r1, 0.0), np.maximum(r2, 0.0)


def channel_rates(p_xy: np.ndarray, q: np.ndarray) -> Point:
    r1, r2 = batch_rates(np.asarray(p_xy, dtype=float), np.asarray(q, dtype=float)[None])
    return float(r1[0]), float(r2[0])


def deterministic_channel(t: Statistic, u_card: int) -> np.ndarray:
    q = np.zeros((t.domain.size, u_card))
    q[np.arange(t.domain.size), list(t.labels)] = 1.0
    return q


# -----------------------------
#     ИТЕРАЦИИ БУТЫЛОЧНОГО ГОРЛЫШКА
# -----------------------------


def _beta(lam: float) -> float:
    if lam >= 1.0:
        return FRONTIER_MAX_BETA
    return min(lam / (1.0 - lam), FRONTIER_MAX_BETA)


def ib_descent(p_xy: np.ndarray, q0: np.ndarray, beta: float, max_iter: int, tol: float) -> Tuple[np.ndarray, int]:
    """Минимизирует I(Y;U) + β·H(X|U) по q(u|y) для пачки стартов (B, |Y|, |U|).

    q(u|y) ∝ q(u)·exp(−β·KL(p(x|y) || p(x|u))), обновление в лог-области.
    """
    p_y = p_xy.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_x_given_y = np.where(p_y[None, :] > 0, p_xy / p_y[None, :], 0.0).T  # [y, x]
        neg_h = np.where(p_x_given_y > 0, p_x_given_y * np.log(np.where(p_x_given_y > 0, p_x_given_y, 1.0)), 0.0).sum(axis=1)
    q = q0
    it = 0
    for it in range(1, max_iter + 1):
        p_u = np.einsum("y,byu->bu", p_y, q)
        p_xu = np.einsum("xy,byu->bxu", p_xy, q)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_p_x_given_u = np.log(np.maximum(p_xu / np.where(p_u > 0, p_u, 1.0)[:, None, :], 1e-300))
            log_p_u = np.log(p_u)
        cross = np.einsum("yx,bxu->byu", p_x_given_y, log_p_x_given_u)
        kl = neg_h[None, :, None] - cross
        log_q = log_p_u[:, None, :] - beta * kl
        log_q -= logsumexp(log_q, axis=2, keepdims=True)
        new_q = np.exp(log_q)
        delta = float(np.max(np.abs(new_q - q)))
        q = new_q
        if delta < tol:
            break
    return q, it


def pareto_filter(points: Sequence[Point]) -> List[int]:
    """Индексы парето-минимальных точек: r1 по возрастанию, r2 строго убывает."""
    order = sorted(range(len(points)), key=lambda i: (points[i][0], points[i][1]))
    keep: List[int] = []
    best = np.inf
    for i in order:
        if points[i][1] < best - PARETO_EPS:
            keep.append(i)
            best = points[i][1]
    return keep


def ak_frontier(
    model: SourceModel,
    u_card: int,
    budget: int,
    seed: Optional[int] = None,
    lambda_step: Optional[float] = None,
) -> RateFrontier:
    """Граница области (R1, R2) при |U| <= u_card и budget случайных стартах на каждое λ."""
    p_xy = model.p_xy()
    ny = p_xy.shape[1]
    if u_card < 1:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"u_card должно быть >= 1, получено {u_card}")
    if u_card > ny + 2:
        raise WorkbenchError(
            ErrorCode.CARD_TOO_LARGE,
            f"|U|={u_card} больше |Y|+2={ny + 2}",
            {"u_card": u_card, "limit": ny + 2},
        )
    if budget < 0:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"budget должен быть >= 0, получено {budget}")
    step = FRONTIER_LAMBDA_STEP if lambda_step is None else lambda_step
    if not 0 < step <= 1:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"шаг λ должен лежать в (0, 1], получено {step}")
    seed = DEFAULT_SEED if seed is None else seed

    channels: List[np.ndarray] = []
    origins: List[str] = []
    for k, t in enumerate(enumerate_partitions(model.y_axis, u_card)):
        if k >= FRONTIER_MAX_PARTITIONS:
            logger.warning("[FRONTIER] перебор отображений Y→U обрезан на %d", FRONTIER_MAX_PARTITIONS)
            break
        channels.append(deterministic_channel(t, u_card))
        origins.append("deterministic")
    num_det = len(channels)

    lambdas = np.round(np.arange(0.0, 1.0 + step / 2, step), 10)
    iterations = 0
    if budget > 0 and u_card > 1:
        for k, lam in enumerate(tqdm(lambdas, desc="frontier λ", disable=not SHOW_PROGRESS)):
            rng = np.random.default_rng([seed, k])
            q0 = rng.dirichlet(np.ones(u_card), size=(budget, ny))
            q, it = ib_descent(p_xy, q0, _beta(float(lam)), FRONTIER_MAX_ITER, FRONTIER_TOL)
            iterations += it
            channels.extend(q)
            origins.extend(["descent"] * budget)

    r1, r2 = batch_rates(p_xy, np.stack(channels))
    points = [(float(a), float(b)) for a, b in zip(r1, r2)]
    keep = pareto_filter(points)
    frontier = RateFrontier(
        points=tuple(points[i] for i in keep),
        channels=tuple(channels[i] for i in keep),
        u_card=u_card,
        origins=tuple(origins[i] for i in keep),
        stats={
            "deterministic_maps": num_det,
            "restarts": budget,
            "lambdas": len(lambdas),
            "iterations": iterations,
            "candidates": len(points),
        },
    )
    logger.info(
        "[FRONTIER] |U|=%d: %d кандидатов, %d точек на границе",
        u_card, len(points), len(frontier.points),
    )
    return frontier


# -----------------------------
#     УГЛОВАЯ ТОЧКА
# -----------------------------


def sufficient_statistic_of_y(model: SourceModel) -> Statistic:
    """Минимальная достаточная статистика Y для X: классы y с одинаковым p(x|y)."""
    return ratio_partition(model.y_axis, model.p_xy().T)


def corner_point(model: SourceModel) -> float:
    """H(Φ(Y)) в битах — наименьшая R2 при R1 = H(X|Y)."""
    phi = sufficient_statistic_of_y(model)
    p_y = model.p_xy().sum(axis=0)
    value = entropy_of(p_y @ phi.indicator())
    logger.info("[FRONTIER] угловая точка: H(Φ)=%.6f бит, Φ=%s", value, phi.partition_label())
    return value


# -----------------------------
#     СРАВНЕНИЕ ГРАНИЦ ДО И ПОСЛЕ РЕДУКЦИИ Y
# -----------------------------


def lower_hull(points: Sequence[Point]) -> List[Point]:
    """Нижняя выпуклая оболочка парето-множества (r2 убывает по r1)."""
    pts = sorted(set(points))
    hull: List[Point] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    # оставляем убывающую часть: правее минимума r2 граница горизонтальна
    k = int(np.argmin([y for _, y in hull]))
    return hull[: k + 1]


def _envelope(hull: Sequence[Point], r1: float) -> float:
    xs = [x for x, _ in hull]
    ys = [y for _, y in hull]
    if r1 < xs[0]:
        return np.inf
    return float(np.interp(r1, xs, ys))


def region_gap(point: Point, hull: Sequence[Point]) -> float:
    """Наименьшее ε >= 0, при котором point + ε·(1,1) лежит в выпуклой области над hull."""
    r1, r2 = point
    lo = max(0.0, hull[0][0] - r1)
    excess = r2 + lo - _envelope(hull, r1 + lo)
    if excess >= 0:
        return lo
    hi = lo - excess
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if r2 + mid >= _envelope(hull, r1 + mid):
            hi = mid
        else:
            lo = mid
    return hi


def hull_gap(points: Sequence[Point], other: Sequence[Point]) -> float:
    """Наибольшее отставание точек points от области, порождённой other."""
    if not points:
        return 0.0
    hull = lower_hull(other)
    return max(region_gap(p, hull) for p in points)


@dataclass(frozen=True)
class FrontierGapReport:
    precondition: MarkovVerdict
    gap_full_vs_reduced: float
    gap_reduced_vs_full: float
    lifted_gap: float
    tolerance: float
    full_points: int
    reduced_points: int

    @property
    def max_gap(self) -> float:
        return max(self.gap_full_vs_reduced, self.gap_reduced_vs_full)

    @property
    def holds(self) -> bool:
        return self.max_gap <= self.tolerance and self.lifted_gap <= LIFT_TOLERANCE

    def to_record(self) -> Dict[str, Any]:
        return {
            "check": "theorem6",
            "precondition": self.precondition.to_record(),
            "gap_full_vs_reduced_bits": self.gap_full_vs_reduced,
            "gap_reduced_vs_full_bits": self.gap_reduced_vs_full,
            "max_gap_bits": self.max_gap,
            "lifted_gap_bits": self.lifted_gap,
            "tolerance_bits": self.tolerance,
            "full_points": self.full_points,
            "reduced_points": self.reduced_points,
            "holds": self.holds,
        }


def y_statistic_verdict(model: SourceModel, t: Statistic, threshold: Optional[float] = None) -> MarkovVerdict:
    """X − T(Y) − Y."""
    d = attach(model.dist, model.y, t, f"T({model.y})")
    return check_markov(d, model.x, f"T({model.y})", model.y, MARKOV_THRESHOLD_BITS if threshold is None else threshold)


def theorem6_compare(
    model: SourceModel,
    t: Statistic,
    u_card: int,
    budget: int,
    seed: Optional[int] = None,
    tolerance: Optional[float] = None,
    threshold: Optional[float] = None,
) -> Tuple[FrontierGapReport, RateFrontier, RateFrontier]:
    """Границы для (X, Y) и (X, T(Y)) совпадают, если T достаточна для X."""
    verdict = y_statistic_verdict(model, t, threshold)
    if not verdict.holds:
        raise WorkbenchError(
            ErrorCode.PRECONDITION_FAILED,
            f"T не является достаточной статистикой Y для X: I={verdict.cmi_bits:.3e} бит",
            {"cmi_bits": verdict.cmi_bits},
        )
    reduced = model.reduce_y(t)
    full = ak_frontier(model, u_card, budget, seed)
    short = ak_frontier(reduced, min(u_card, reduced.y_axis.size + 2), budget, seed)

    # поднятие канала q'(u|t) до q(u|y) = q'(u|T(y)) не меняет скоростей
    lifted = 0.0
    p_xy = model.p_xy()
    labels = list(t.labels)
    for (r1, r2), q_short in zip(short.points, short.channels):
        a, b = channel_rates(p_xy, q_short[labels])
        lifted = max(lifted, abs(a - r1), abs(b - r2))

    report = FrontierGapReport(
        precondition=verdict,
        gap_full_vs_reduced=hull_gap(full.points, short.points),
        gap_reduced_vs_full=hull_gap(short.points, full.points),
        lifted_gap=lifted,
        tolerance=FRONTIER_SEARCH_TOL if tolerance is None else tolerance,
        full_points=len(full.points),
        reduced_points=len(short.points),
    )
    logger.info(
        "[FRONTIER] разрыв границ: %.2e / %.2e бит, поднятие %.1e",
        report.gap_full_vs_reduced, report.gap_reduced_vs_full, lifted,
    )
    return report, full, short
