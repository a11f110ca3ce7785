"""Подкоманды непрерывных примеров: гауссовская HCI-модель, QAM в замираниях, треугольник."""

from __future__ import annotations

import argparse
import logging

from app.handlers.common import parse_floats, read_thresholds
from app.routing import Router, arg
from app.services.families import (
    MAX_GRID,
    MAX_THETAS,
    MIN_GRID,
    MIN_THETAS,
    extreme_statistic,
    triangle_grid_family,
)
from app.services.gaussian_example import GaussianHciConfig, gaussian_mc_mse, posterior_agreement
from app.services.qam_example import DEFAULT_THRESHOLDS, QamConfig, qam_constellation, qam_roc_compare
from app.services.report_service import RunReport, emit_csv
from app.services.sufficiency_service import is_conditionally_sufficient, minimal_conditional_sufficient
from app.services.triangle_example import TriangleConfig, triangle_ratio_check

logger = logging.getLogger(__name__)

router = Router(name="simulation")

POSTERIOR_TOL = 1e-10
LR_REL_TOL = 1e-12

TRIALS = arg("--trials", type=int, default=10000, help="число испытаний Монте-Карло")


def _summary(report: RunReport, check: str, gap: float) -> None:
    report.result["summary"] = {"check": check, "max_abs_gap": gap, "pass": report.passed}


@router.command(
    "sim-gaussian",
    help="X_i = Z + U_i, Y_i = Z + V_i: апостериорные моменты и MSE по всем данным и по (Σx, Σy)",
    args=(
        arg("--n", type=int, default=3, help="наблюдений на узел"),
        arg("--rho", type=float, default=0.5, help="дисперсия общей компоненты Z"),
        arg("--prior-mean", type=float, default=0.0),
        arg("--prior-var", type=float, default=1.0),
        arg("--configs", type=int, default=1000, help="случайных конфигураций для сверки моментов"),
        TRIALS,
    ),
)
def cmd_sim_gaussian(args: argparse.Namespace, report: RunReport) -> None:
    cfg = GaussianHciConfig(n=args.n, rho=args.rho, prior_mean=args.prior_mean, prior_var=args.prior_var, seed=args.seed)
    tol = POSTERIOR_TOL if args.tol is None else args.tol
    agreement = posterior_agreement(args.configs, args.seed)
    mse = gaussian_mc_mse(cfg, args.trials)
    report.result["config"] = cfg.to_record()
    report.result["posterior_agreement"] = agreement.to_record()
    report.result["mse"] = mse.to_record()
    report.add_verdict("posterior_moments_agree", agreement.max_diff <= tol, max_diff=agreement.max_diff, tolerance=tol)
    report.add_verdict("mse_within_noise", mse.within_noise, gap=mse.gap, se_diff=mse.se_diff,
                       se_full=mse.se_full, se_reduced=mse.se_reduced)
    _summary(report, "sim-gaussian", agreement.max_diff)
    emit_csv(report, args.out, "gaussian_mse.csv", [
        {"estimator": "full", "mse": mse.mse_full, "se": mse.se_full},
        {"estimator": "reduced", "mse": mse.mse_reduced, "se": mse.se_reduced},
        {"estimator": "theory", "mse": mse.posterior_var, "se": 0.0},
    ], ["estimator", "mse", "se"])


@router.command(
    "sim-qam",
    help="обнаружение QAM в релеевских замираниях: LR по полным данным и по модулям",
    args=(
        arg("--k", type=int, default=4, help="число сенсоров"),
        arg("--m", type=int, default=4, help="точек созвездия"),
        arg("--sigma2", type=float, default=1.0, help="дисперсия шума"),
        arg("--fading-var", type=float, default=1.0, help="дисперсия коэффициентов замираний"),
        arg("--thresholds", default=None, help="файл порогов LR или список через запятую"),
        TRIALS,
    ),
)
def cmd_sim_qam(args: argparse.Namespace, report: RunReport) -> None:
    cfg = QamConfig(k=args.k, constellation=qam_constellation(args.m), noise_var=args.sigma2,
                    fading_var=args.fading_var, seed=args.seed)
    thresholds = read_thresholds(args.thresholds) or list(DEFAULT_THRESHOLDS)
    tol = LR_REL_TOL if args.tol is None else args.tol
    cmp = qam_roc_compare(cfg, args.trials, thresholds)
    report.result["config"] = cfg.to_record()
    report.result["roc"] = cmp.to_record()
    report.add_verdict("lr_full_equals_magnitudes", cmp.max_lr_rel_diff <= tol,
                       max_lr_rel_diff=cmp.max_lr_rel_diff, tolerance=tol)
    report.add_verdict("roc_identical", cmp.identical, auc_full=cmp.auc_full, auc_reduced=cmp.auc_reduced)
    _summary(report, "sim-qam", cmp.max_lr_rel_diff)
    emit_csv(report, args.out, "roc.csv", cmp.table(),
             ["threshold", "pd_full", "pfa_full", "pd_reduced", "pfa_reduced"])


@router.command(
    "example-triangle",
    help="треугольная плотность: классы постоянного отношения совпадают с max x и min y",
    args=(
        arg("--n", type=int, default=2, help="размерность x и y (и для проб, и для сеточных семейств)"),
        arg("--thetas", default="0,0.25,0.5", help="значения θ через запятую"),
        arg("--probes", type=int, default=200, help="число проб"),
    ),
)
def cmd_example_triangle(args: argparse.Namespace, report: RunReport) -> None:
    cfg = TriangleConfig(n=args.n, theta_values=tuple(parse_floats(args.thetas, "--thetas")), seed=args.seed)
    ratio = triangle_ratio_check(cfg, args.probes)
    report.result["config"] = cfg.to_record()
    report.result["ratio_check"] = ratio.to_record()
    report.add_verdict("ratio_classes_match_extremes", ratio.holds,
                       probes=ratio.probes, discarded=ratio.discarded, failures=len(ratio.failures))

    # Сеточные семейства: минимальная условно достаточная статистика = max(x) и min(y)
    grid_rows = []
    for role, grid, thetas, axis, given, use_max in (
        ("max", MAX_GRID, MAX_THETAS, "X", "Y", True),
        ("min", MIN_GRID, MIN_THETAS, "Y", "X", False),
    ):
        family = triangle_grid_family(args.n, grid, thetas)
        found = minimal_conditional_sufficient(family, axis, given)
        expected = extreme_statistic(family, axis, use_max)
        verdict = is_conditionally_sufficient(family, found, given, args.tol)
        report.add_verdict(f"grid_{role}_partition", found.labels == expected.labels,
                           found=found.partition_label(), expected=expected.partition_label())
        report.add_verdict(f"grid_{role}_conditionally_sufficient", verdict.holds, **verdict.to_record())
        grid_rows.extend({"role": role, "symbol": s, "class": k} for s, k in zip(found.domain.symbols, found.labels))
    emit_csv(report, args.out, "triangle_grid.csv", grid_rows, ["role", "symbol", "class"])
