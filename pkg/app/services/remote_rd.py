"""Удалённая функция скорость-искажение со сторонней информацией у декодера.

Кодер видит X, декодер — Y, восстанавливать нужно Z. Для каждого y источник
сводится к X с модифицированным искажением d̄_y(x, ẑ) = E[d(Z, ẑ) | X=x, Y=y],
затем решается задача Блахута–Аримото при общем наклоне s; наклон подбирается
бисекцией под ограничение на среднее искажение.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from app.config import (
    MARKOV_THRESHOLD_BITS,
    RD_BISECTION_STEPS,
    RD_CONVEXITY_TOL,
    RD_GAP_TOL,
    RD_MAX_ITER,
    RD_MAX_SLOPE,
    RD_TOL,
    RD_WORKERS,
    ZERO_CELL_EPS,
)
from app.errors import ErrorCode, WorkbenchError
from app.services.source_model import SourceModel
from app.services.statistics_service import Statistic, attach
from app.services.sufficiency_service import MarkovVerdict, check_markov

logger = logging.getLogger(__name__)

LOG2 = np.log(2.0)
# Точка считается попавшей в ограничение, если достигнутое искажение не выше D + этот допуск
DISTORTION_SLACK = 1e-9


@dataclass(frozen=True)
class RDPoint:
    distortion: float
    rate_bits: float
    slope: float
    iterations: int
    converged: bool
    achieved_distortion: float

    def row(self) -> Dict[str, Any]:
        return {"D": self.distortion, "R_bits": self.rate_bits, "converged": self.converged}


@dataclass(frozen=True)
class RDCurve:
    points: Tuple[RDPoint, ...]
    d_min: float
    d_max: float
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return all(p.converged for p in self.points)

    def rate_at(self, distortion: float) -> float:
        for p in self.points:
            if abs(p.distortion - distortion) <= 1e-12:
                return p.rate_bits
        raise KeyError(distortion)

    def rows(self) -> List[Dict[str, Any]]:
        return [p.row() for p in self.points]

    def to_record(self) -> Dict[str, Any]:
        return {
            "d_min": self.d_min,
            "d_max": self.d_max,
            "num_points": len(self.points),
            "converged": self.converged,
            "non_converged": [p.distortion for p in self.points if not p.converged],
        }


@dataclass(frozen=True, eq=False)
class _Problem:
    """Представление задачи по y с ненулевой вероятностью."""

    p_y: np.ndarray            # [y]
    log_p_x_given_y: np.ndarray  # [y, x]
    p_x_given_y: np.ndarray    # [y, x]
    dbar: np.ndarray           # [y, x, ẑ]
    d_min: float
    d_max: float


def modified_distortion(model: SourceModel) -> Tuple[np.ndarray, np.ndarray]:
    """(p(x,y), d̄[x, y, ẑ]) с d̄ = Σ_z p(z|x,y)·d(z, ẑ)."""
    p = model.p_xyz()
    p_xy = p.sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        p_z = np.where(p_xy[:, :, None] > ZERO_CELL_EPS, p / p_xy[:, :, None], 0.0)
    return p_xy, np.einsum("xyz,zw->xyw", p_z, model.distortion)


def distortion_range(model: SourceModel) -> Tuple[float, float]:
    prob = _problem(model)
    return prob.d_min, prob.d_max


def _problem(model: SourceModel) -> _Problem:
    p_xy, dbar = modified_distortion(model)
    p_y = p_xy.sum(axis=0)
    alive = p_y > ZERO_CELL_EPS
    p_y = p_y[alive]
    p_x_given_y = (p_xy[:, alive] / p_y[None, :]).T
    dbar_y = np.transpose(dbar[:, alive, :], (1, 0, 2))
    with np.errstate(divide="ignore"):
        log_p = np.log(p_x_given_y)
    d_min = float(np.sum(p_y[:, None] * p_x_given_y * dbar_y.min(axis=2)))
    d_max = float(np.sum(p_y * np.einsum("yx,yxw->yw", p_x_given_y, dbar_y).min(axis=1)))
    return _Problem(p_y, log_p, p_x_given_y, dbar_y, d_min, d_max)


def _blahut_arimoto(prob: _Problem, slope: float, log_q: np.ndarray, tol: float) -> Tuple[float, float, np.ndarray, int, bool]:
    """BA при наклоне s сразу для всех y; возвращает (R бит, D, log q, итерации, сошёлся)."""
    scaled = -slope * prob.dbar
    rate_prev = np.inf
    rate = distortion = 0.0
    converged = False
    it = 0
    for it in range(1, RD_MAX_ITER + 1):
        log_Q = scaled + log_q[:, None, :]
        log_Q -= logsumexp(log_Q, axis=2, keepdims=True)
        log_q = logsumexp(prob.log_p_x_given_y[:, :, None] + log_Q, axis=1)
        Q = np.exp(log_Q)
        weighted = prob.p_x_given_y[:, :, None] * Q
        rate_y = np.sum(weighted * (log_Q - log_q[:, None, :]), axis=(1, 2)) / LOG2
        rate = max(float(prob.p_y @ rate_y), 0.0)
        distortion = float(prob.p_y @ np.sum(weighted * prob.dbar, axis=(1, 2)))
        if abs(rate - rate_prev) < tol:
            converged = True
            break
        rate_prev = rate
    return rate, distortion, log_q, it, converged


def _solve_point(prob: _Problem, target: float, tol: float) -> RDPoint:
    if target >= prob.d_max - DISTORTION_SLACK:
        return RDPoint(target, 0.0, 0.0, 0, True, prob.d_max)

    uniform = np.full(prob.dbar.shape[::2], -np.log(prob.dbar.shape[2]))
    lo, hi = 0.0, RD_MAX_SLOPE
    rate, dist, log_q, iters, conv = _blahut_arimoto(prob, hi, uniform, tol)
    total = iters
    if dist > target + DISTORTION_SLACK:
        logger.warning(
            "[RD] D=%.4f недостижимо при s<=%.0f (получено %.6f)", target, RD_MAX_SLOPE, dist,
        )
        return RDPoint(target, rate, hi, total, False, dist)

    best = (rate, dist, hi, conv)
    # ближайшее решение с искажением выше цели; при s=0 это (D_max, 0)
    above = (0.0, prob.d_max)
    warm = log_q
    for _ in range(RD_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        rate, dist, warm, iters, conv = _blahut_arimoto(prob, mid, warm, tol)
        total += iters
        if dist <= target + DISTORTION_SLACK:
            hi = mid
            best = (rate, dist, mid, conv)
        else:
            lo = mid
            above = (rate, dist)
        if hi - lo <= 1e-12 * max(hi, 1.0):
            break
    rate, dist, slope, conv = best
    if not conv:
        logger.warning("[RD] NO_CONVERGENCE при D=%.4f: достигнут лимит %d итераций", target, RD_MAX_ITER)
    if dist < target - DISTORTION_SLACK and above[1] > dist:
        # наклон упёрся в линейный участок R(D): смешиваем два крайних решения по времени
        rate_above, dist_above = above
        rate = rate + (rate_above - rate) * (target - dist) / (dist_above - dist)
        dist = target
    return RDPoint(target, rate, slope, total, conv, dist)


def conditional_remote_rd(
    model: SourceModel,
    d_grid: Sequence[float],
    tol: Optional[float] = None,
    workers: Optional[int] = None,
    monotone: bool = True,
) -> RDCurve:
    """R(D) = min I(X;U|Y) при E d(Z, Ẑ) <= D на сетке d_grid.

    monotone=False отдаёт точки решателя без накопленного минимума.
    """
    if model.z is None:
        raise WorkbenchError(ErrorCode.UNKNOWN_AXIS, "для удалённой задачи нужна ось Z")
    prob = _problem(model)
    grid = sorted(float(d) for d in d_grid)
    if not grid:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, "пустая сетка искажений")
    if grid[0] < prob.d_min - DISTORTION_SLACK:
        raise WorkbenchError(
            ErrorCode.DISTORTION_OUT_OF_RANGE,
            f"D={grid[0]} меньше D_min={prob.d_min:.6f}",
            {"d_min": prob.d_min, "d_max": prob.d_max},
        )

    tol = RD_TOL if tol is None else tol
    workers = RD_WORKERS if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(lambda d: _solve_point(prob, d, tol), grid))
    else:
        raw = [_solve_point(prob, d, tol) for d in grid]

    # R(D) не возрастает: численный шум сглаживаем накопленным минимумом
    points: List[RDPoint] = []
    running = np.inf
    for p in raw:
        running = min(running, p.rate_bits) if monotone else p.rate_bits
        points.append(RDPoint(p.distortion, running, p.slope, p.iterations, p.converged, p.achieved_distortion))

    curve = RDCurve(tuple(points), prob.d_min, prob.d_max, {"grid_points": len(points)})
    logger.info(
        "[RD] кривая на %d точках, D∈[%.4f, %.4f], сошлось: %s",
        len(points), prob.d_min, prob.d_max, curve.converged,
    )
    return curve


def convexity_defect(points: Sequence[RDPoint]) -> float:
    """Наибольшее превышение точки над хордой соседей, в битах; 0 для выпуклой кривой."""
    worst = 0.0
    for a, b, c in zip(points, points[1:], points[2:]):
        if c.distortion - a.distortion <= 0:
            continue
        w = (b.distortion - a.distortion) / (c.distortion - a.distortion)
        worst = max(worst, b.rate_bits - (a.rate_bits + w * (c.rate_bits - a.rate_bits)))
    return worst


def is_convex(curve: RDCurve, tol: Optional[float] = None) -> bool:
    return convexity_defect(curve.points) <= (RD_CONVEXITY_TOL if tol is None else tol)


# -----------------------------
#     R(D) = R'(D) ПРИ УСЛОВНО ДОСТАТОЧНОЙ T(X)
# -----------------------------


@dataclass(frozen=True)
class CurveGapReport:
    precondition: MarkovVerdict
    max_gap: float
    tolerance: float
    converged: bool

    @property
    def holds(self) -> bool:
        return self.max_gap <= self.tolerance and self.converged

    def to_record(self) -> Dict[str, Any]:
        return {
            "check": "rd_equality",
            "precondition": self.precondition.to_record(),
            "max_gap_bits": self.max_gap,
            "tolerance_bits": self.tolerance,
            "converged": self.converged,
            "holds": self.holds,
        }


def remote_statistic_verdict(model: SourceModel, t: Statistic, threshold: Optional[float] = None) -> MarkovVerdict:
    """Z − (T(X), Y) − X."""
    name = f"T({model.x})"
    d = attach(model.dist, model.x, t, name)
    return check_markov(d, model.z or "", [name, model.y], model.x, MARKOV_THRESHOLD_BITS if threshold is None else threshold)


def rd_equality_check(
    model: SourceModel,
    t: Statistic,
    d_grid: Sequence[float],
    tol: Optional[float] = None,
    gap_tol: Optional[float] = None,
    threshold: Optional[float] = None,
) -> Tuple[CurveGapReport, RDCurve, RDCurve]:
    """Сравнивает R(D) для (X, Y, Z) и для (T(X), Y, Z) на общей сетке."""
    if model.z is None:
        raise WorkbenchError(ErrorCode.UNKNOWN_AXIS, "для удалённой задачи нужна ось Z")
    verdict = remote_statistic_verdict(model, t, threshold)
    if not verdict.holds:
        raise WorkbenchError(
            ErrorCode.PRECONDITION_FAILED,
            f"T(X) не является условно достаточной: I(Z;X|T,Y)={verdict.cmi_bits:.3e} бит",
            {"cmi_bits": verdict.cmi_bits},
        )
    full = conditional_remote_rd(model, d_grid, tol)
    reduced = conditional_remote_rd(model.reduce_x(t), d_grid, tol)
    gap = max(abs(a.rate_bits - b.rate_bits) for a, b in zip(full.points, reduced.points))
    report = CurveGapReport(
        precondition=verdict,
        max_gap=gap,
        tolerance=RD_GAP_TOL if gap_tol is None else gap_tol,
        converged=full.converged and reduced.converged,
    )
    logger.info("[RD] max |R(D) − R'(D)| = %.2e бит", gap)
    return report, full, reduced
