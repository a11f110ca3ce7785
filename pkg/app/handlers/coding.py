"""Подкоманды кодирования источников: граница области скоростей и удалённая R(D)."""

from __future__ import annotations

import argparse
import logging
from typing import List

import numpy as np

from app.config import FRONTIER_SEARCH_TOL, RD_CONVEXITY_TOL, RD_GAP_TOL
from app.handlers.common import load_model, parse_dgrid, statistics_from_args
from app.routing import Router, arg
from app.services.model_core import entropy
from app.services.rate_region import (
    RateFrontier,
    ak_frontier,
    channel_rates,
    corner_point,
    sufficient_statistic_of_y,
    theorem6_compare,
)
from app.services.remote_rd import (
    conditional_remote_rd,
    convexity_defect,
    distortion_range,
    rd_equality_check,
)
from app.services.report_service import RunReport, emit_csv

logger = logging.getLogger(__name__)

router = Router(name="coding")

# Допуск перерасчёта скоростей по сохранённому каналу
RECOMPUTE_TOL = 1e-9
# Точка границы считается попавшей в H(X|Y) по первой координате с этим допуском
CORNER_R1_TOL = 1e-6

MODEL = arg("--model", help="файл модели источника JSON или имя встроенной модели")
STATISTIC = arg("--statistic", action="append", help="файл статистики, имя из модели или 'first@X'")
UCARD = arg("--ucard", type=int, default=None, help="|U| (по умолчанию |Y|)")
BUDGET = arg("--budget", type=int, default=20, help="случайных стартов на каждое λ")
DGRID = arg("--dgrid", default=None, help="сетка искажений 'a:b:steps'")
GAP_TOL = arg("--gap-tol", type=float, default=None, help="допуск разрыва кривых/границ в битах")
SOLVER_TOL = arg("--solver-tol", type=float, default=None, help="порог сходимости Блахута–Аримото по скорости")

FRONTIER_COLUMNS = ["r1_bits", "r2_bits"]
CURVE_COLUMNS = ["D", "R_bits", "converged"]


def _recompute_gap(p_xy: np.ndarray, frontier: RateFrontier) -> float:
    worst = 0.0
    for (r1, r2), q in zip(frontier.points, frontier.channels):
        a, b = channel_rates(p_xy, q)
        worst = max(worst, abs(a - r1), abs(b - r2))
    return worst


def _default_grid(model, steps: int = 11) -> List[float]:
    d_min, d_max = distortion_range(model)
    return [float(d) for d in np.linspace(d_min, d_max, steps)]


@router.command("ak-frontier", help="граница (R1, R2) области кодирования с помощником", args=(MODEL, UCARD, BUDGET))
def cmd_ak_frontier(args: argparse.Namespace, report: RunReport) -> None:
    source = load_model(args.model).require_source()
    u_card = args.ucard or source.y_axis.size
    frontier = ak_frontier(source, u_card, args.budget, args.seed)
    report.result["frontier"] = frontier.to_record()
    report.result["points"] = frontier.rows()
    gap = _recompute_gap(source.p_xy(), frontier)
    tol = RECOMPUTE_TOL if args.tol is None else args.tol
    report.add_verdict("achievable", gap <= tol and bool(frontier.points),
                       recompute_gap_bits=gap, tolerance=tol)
    emit_csv(report, args.out, "frontier.csv", frontier.rows(), FRONTIER_COLUMNS)


@router.command(
    "corner-point",
    help="H(Φ) для минимальной достаточной статистики Φ(Y); с --budget > 0 ещё и поиск по границе",
    args=(MODEL, UCARD, arg("--budget", type=int, default=0, help="стартов на λ для сверки с границей")),
)
def cmd_corner_point(args: argparse.Namespace, report: RunReport) -> None:
    source = load_model(args.model).require_source()
    phi = sufficient_statistic_of_y(source)
    value = corner_point(source)
    report.result["corner_point_bits"] = value
    report.result["phi"] = phi.to_record()
    if args.budget <= 0:
        return
    h_x_given_y = entropy(source.dist, [source.x, source.y]) - entropy(source.dist, source.y)
    frontier = ak_frontier(source, args.ucard or source.y_axis.size, args.budget, args.seed)
    near = [r2 for r1, r2 in frontier.points if abs(r1 - h_x_given_y) <= CORNER_R1_TOL]
    best = min(near) if near else float("inf")
    tol = FRONTIER_SEARCH_TOL if args.tol is None else args.tol
    report.add_verdict("frontier_reaches_corner", abs(best - value) <= tol,
                       h_x_given_y_bits=h_x_given_y, frontier_r2_bits=best, corner_bits=value, tolerance=tol)
    emit_csv(report, args.out, "frontier.csv", frontier.rows(), FRONTIER_COLUMNS)


@router.command(
    "theorem6",
    help="границы для (X, Y) и (X, T(Y)) совпадают при T, достаточной для X",
    args=(MODEL, STATISTIC, UCARD, BUDGET, GAP_TOL),
)
def cmd_theorem6(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    source = model.require_source()
    if args.statistic:
        (t,) = statistics_from_args(model, args, 1, [source.y])
    else:
        t = sufficient_statistic_of_y(source)
    gap_tol = FRONTIER_SEARCH_TOL if args.gap_tol is None else args.gap_tol
    result, full, short = theorem6_compare(source, t, args.ucard or source.y_axis.size, args.budget, args.seed, gap_tol, args.tol)
    report.result["statistic"] = t.to_record()
    report.result["theorem6"] = result.to_record()
    report.add_verdict("precondition", result.precondition.holds, **result.precondition.to_record())
    report.add_verdict("frontiers_match", result.holds, max_gap_bits=result.max_gap,
                       lifted_gap_bits=result.lifted_gap, tolerance=result.tolerance)
    emit_csv(report, args.out, "frontier_full.csv", full.rows(), FRONTIER_COLUMNS)
    emit_csv(report, args.out, "frontier_reduced.csv", short.rows(), FRONTIER_COLUMNS)


@router.command("rd-curve", help="удалённая R(D) со сторонней информацией (Блахут–Аримото)", args=(MODEL, DGRID, SOLVER_TOL))
def cmd_rd_curve(args: argparse.Namespace, report: RunReport) -> None:
    source = load_model(args.model).require_source()
    grid = parse_dgrid(args.dgrid) if args.dgrid else _default_grid(source)
    curve = conditional_remote_rd(source, grid, args.solver_tol)
    report.result["curve"] = curve.to_record()
    report.result["points"] = curve.rows()
    report.add_verdict("converged", curve.converged, non_converged=curve.to_record()["non_converged"])
    tol = RD_CONVEXITY_TOL if args.tol is None else args.tol
    defect = convexity_defect(curve.points)
    report.add_verdict("convex", defect <= tol, convexity_defect_bits=defect, tolerance=tol)
    emit_csv(report, args.out, "rd_curve.csv", curve.rows(), CURVE_COLUMNS)


@router.command(
    "rd-equality",
    help="R(D) для X и для условно достаточной T(X) совпадают",
    args=(MODEL, STATISTIC, DGRID, GAP_TOL, SOLVER_TOL),
)
def cmd_rd_equality(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    source = model.require_source()
    (t,) = statistics_from_args(model, args, 1, [source.x])
    grid = parse_dgrid(args.dgrid) if args.dgrid else _default_grid(source)
    gap_tol = RD_GAP_TOL if args.gap_tol is None else args.gap_tol
    result, full, reduced = rd_equality_check(source, t, grid, args.solver_tol, gap_tol, args.tol)
    report.result["statistic"] = t.to_record()
    report.result["rd_equality"] = result.to_record()
    report.add_verdict("precondition", result.precondition.holds, **result.precondition.to_record())
    report.add_verdict("curves_match", result.holds, max_gap_bits=result.max_gap,
                       tolerance=result.tolerance, converged=result.converged)
    emit_csv(report, args.out, "rd_full.csv", full.rows(), CURVE_COLUMNS)
    emit_csv(report, args.out, "rd_reduced.csv", reduced.rows(), CURVE_COLUMNS)
