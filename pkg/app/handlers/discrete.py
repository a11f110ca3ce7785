"""Подкоманды дискретных проверок достаточности и HCI."""

from __future__ import annotations

import argparse
import logging

from app.errors import UsageError
from app.handlers.common import (
    LoadedModel,
    axis_list,
    load_model,
    parse_chain,
    statistics_from_args,
)
from app.routing import Router, arg
from app.services.hci_service import hci_joint, lemma1_check, theorem1_check, verify_hci
from app.services.model_core import JointDistribution, joint
from app.services.report_service import RunReport, emit_csv
from app.services.statistics_service import enumerate_partitions
from app.services.sufficiency_service import (
    MAX_ENUMERATION_SIZE,
    check_markov,
    completing_statistics,
    is_conditionally_sufficient,
    is_sufficient,
    minimal_conditional_sufficient,
    minimal_sufficient,
    theorem2_check,
    verify_minimality,
)

logger = logging.getLogger(__name__)

router = Router(name="discrete")

MODEL = arg("--model", help="файл модели JSON или имя встроенной модели")
STATISTIC = arg("--statistic", action="append", help="файл статистики, имя из модели или 'count@X' (повторяемый)")
AXIS = arg("--axis", default=None, help="ось (или оси через запятую)")
GIVEN = arg("--given", default=None, help="ось условия Y (или оси через запятую)")


def _first_obs(model: LoadedModel) -> str:
    return model.require_family().obs_names[0]


def _second_obs(model: LoadedModel) -> str:
    names = model.require_family().obs_names
    if len(names) < 2:
        raise UsageError("у модели только одна ось наблюдений")
    return names[1]


def _markov_source(model: LoadedModel) -> JointDistribution:
    if model.hci is not None:
        return hci_joint(model.hci)
    if model.family is not None:
        return joint(model.family)
    return model.require_source().dist


def _partition_rows(stat):
    return [{"symbol": s, "class": k} for s, k in zip(stat.domain.symbols, stat.labels)]


@router.command("check-sufficiency", help="θ − T(X) − X для статистики из --statistic", args=(MODEL, STATISTIC, AXIS))
def cmd_check_sufficiency(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    default = args.axis or _first_obs(model)
    (t,) = statistics_from_args(model, args, 1, [default])
    verdict = is_sufficient(model.require_family(), t, args.tol)
    report.result["statistic"] = t.to_record()
    report.add_verdict("sufficient", verdict.holds, **verdict.to_record())


@router.command("check-conditional", help="θ − (T(X), Y) − X при известном Y", args=(MODEL, STATISTIC, AXIS, GIVEN))
def cmd_check_conditional(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    family = model.require_family()
    default = args.axis or _first_obs(model)
    (t,) = statistics_from_args(model, args, 1, [default])
    given = axis_list(args.given) or [n for n in family.obs_names if n != t.domain.name]
    verdict = is_conditionally_sufficient(family, t, given, args.tol)
    report.result["statistic"] = t.to_record()
    report.add_verdict("conditionally_sufficient", verdict.holds, **verdict.to_record())


@router.command("minimal-stat", help="минимальная достаточная статистика по отношениям правдоподобия", args=(MODEL, AXIS))
def cmd_minimal_stat(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    family = model.require_family()
    stat = minimal_sufficient(family, axis_list(args.axis))
    report.result["statistic"] = stat.to_record()
    report.result["partition"] = stat.partition_label()
    verdict = is_sufficient(family, stat, args.tol)
    report.add_verdict("sufficient", verdict.holds, **verdict.to_record())
    emit_csv(report, args.out, "minimal_stat.csv", _partition_rows(stat), ["symbol", "class"])

    if stat.domain.size > MAX_ENUMERATION_SIZE:
        logger.info("[CLI] алфавит %s слишком велик для перебора разбиений", stat.domain.name)
        return
    rows = verify_minimality(family, stat, list(enumerate_partitions(stat.domain)), args.tol)
    sufficient = [r for r in rows if r["sufficient"]]
    coarsest = [r for r in sufficient if r["candidate"].count("|") == stat.num_classes - 1]
    report.add_verdict(
        "coarsest_unique",
        all(r["ok"] for r in rows) and len(coarsest) == 1,
        partitions=len(rows),
        sufficient=len(sufficient),
        coarsest=[r["candidate"] for r in coarsest],
    )
    emit_csv(report, args.out, "minimality.csv", rows,
             ["candidate", "sufficient", "cmi_bits", "refines_minimal", "ok"])


@router.command(
    "minimal-conditional-stat",
    help="минимальная условно достаточная статистика X при известном Y",
    args=(MODEL, AXIS, GIVEN),
)
def cmd_minimal_conditional(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    family = model.require_family()
    x_axes = axis_list(args.axis) or [family.obs_names[0]]
    y_axes = axis_list(args.given) or [n for n in family.obs_names if n not in x_axes]
    stat = minimal_conditional_sufficient(family, x_axes, y_axes)
    report.result["statistic"] = stat.to_record()
    report.result["partition"] = stat.partition_label()
    verdict = is_conditionally_sufficient(family, stat, y_axes, args.tol)
    report.add_verdict("conditionally_sufficient", verdict.holds, **verdict.to_record())
    emit_csv(report, args.out, "minimal_conditional_stat.csv", _partition_rows(stat), ["symbol", "class"])


@router.command(
    "check-markov",
    help="цепь A − B − C по I(A;C|B); --chain 'A|B|C', оси группы через запятую",
    args=(MODEL, arg("--chain", default=None, help="например 'theta|W|X,Y'")),
)
def cmd_check_markov(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    a, b, c = parse_chain(args.chain)
    verdict = check_markov(_markov_source(model), a, b, c, args.tol)
    report.add_verdict("markov", verdict.holds, **verdict.to_record())


@router.command(
    "hci-verify",
    help="θ − W − (X,Y) и X − W − Y; с --statistic ещё и проверка статистики, достаточной для W",
    args=(MODEL, STATISTIC, AXIS, GIVEN),
)
def cmd_hci_verify(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    h = model.require_hci()
    first, second = verify_hci(h, axis_list(args.axis), axis_list(args.given), args.tol)
    report.add_verdict("theta_w_obs", first.holds, **first.to_record())
    report.add_verdict("x_w_y", second.holds, **second.to_record())
    if args.statistic:
        joint_axis = ":".join(h.family.obs_names)
        (t,) = statistics_from_args(model, args, 1, [joint_axis])
        lemma = lemma1_check(h, t, args.tol)
        report.result["lemma1"] = lemma.to_record()
        report.add_verdict("statistic_for_w_suffices_for_theta", lemma.consistent and lemma.extra["bound_ok"],
                           cmi_bits=lemma.conclusion.cmi_bits, premises_hold=lemma.premises_hold)


@router.command(
    "theorem1",
    help="локальная достаточность Tx, Ty для T(W) в HCI-модели даёт глобальную; --statistic T(W) Tx Ty",
    args=(MODEL, STATISTIC),
)
def cmd_theorem1(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    h = model.require_hci()
    tw, tx, ty = statistics_from_args(model, args, 3, [h.w.name, _first_obs(model), _second_obs(model)])
    result = theorem1_check(h, tw, tx, ty, args.tol)
    report.result["theorem1"] = result.to_record()
    report.add_verdict("premises", result.premises_hold,
                       **{name: v.cmi_bits for name, v in result.premises})
    report.add_verdict("global_sufficiency", result.conclusion.holds, **result.conclusion.to_record())
    report.add_verdict("consistent", result.consistent)


@router.command(
    "theorem2",
    help="глобальная достаточность (Tx, Ty) при локально достаточной Ty: CMI и факторизация",
    args=(MODEL, STATISTIC, arg("--complete", action="store_true", help="перечислить все Tx, дополняющие Ty")),
)
def cmd_theorem2(args: argparse.Namespace, report: RunReport) -> None:
    model = load_model(args.model)
    family = model.require_family()
    tx, ty = statistics_from_args(model, args, 2, [_first_obs(model), _second_obs(model)])
    result = theorem2_check(family, tx, ty, args.tol)
    report.result["theorem2"] = result.to_record()
    report.add_verdict("global_sufficiency", result.conclusion.holds, **result.conclusion.to_record())
    report.add_verdict("factorization_agrees", result.extra["agree"],
                       factorization=result.extra["factorization"].to_record())
    if args.complete:
        found = completing_statistics(family, ty, tx.domain.name, args.tol)
        report.result["completing"] = [s.partition_label() for s in found]
        emit_csv(report, args.out, "completing.csv",
                 [{"partition": s.partition_label(), "classes": s.num_classes} for s in found],
                 ["partition", "classes"])
