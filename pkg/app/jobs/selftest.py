"""Встроенный набор проверок на FAM-BIN / FAM-DEP и малых моделях источников.

Запуск: из корня проекта
  python -m app.jobs.selftest
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from app.services.families import (
    ab_pair_model,
    binary_remote_model,
    count_statistic,
    fam_bin,
    fam_dep_hci,
    parity_statistic,
)
from app.services.hci_service import theorem1_check, verify_hci
from app.services.model_core import entropy_of, joint, marginal
from app.services.rate_region import corner_point
from app.services.remote_rd import conditional_remote_rd
from app.services.statistics_service import enumerate_partitions, identity
from app.services.sufficiency_service import (
    is_sufficient,
    minimal_sufficient,
    theorem2_check,
    verify_minimality,
)

logger = logging.getLogger(__name__)

# Ожидаемые значения для FAM-BIN (p0=0.2, p1=0.8, n=2)
FAM_BIN_SLICE = (0.64, 0.16, 0.16, 0.04)
FAM_BIN_MARGINAL = (0.34, 0.16, 0.16, 0.34)
FAM_BIN_MINIMAL = "00|01,10|11"
PARITY_MIN_BITS = 0.05
PERTURBED_MIN_BITS = 1e-3
RD_ORACLE_TOL = 0.005


@dataclass
class CheckResult:
    name: str
    passed: bool
    evidence: Dict[str, Any] = field(default_factory=dict)


def _fam_bin_tables() -> Tuple[bool, Dict[str, Any]]:
    fam = fam_bin()
    x = marginal(joint(fam), "X").probs
    ok = np.allclose(fam.cond[0], FAM_BIN_SLICE, atol=1e-12) and np.allclose(x, FAM_BIN_MARGINAL, atol=1e-12)
    return ok, {"slice_theta0": fam.cond[0].tolist(), "marginal_x": x.tolist()}


def _fam_bin_count() -> Tuple[bool, Dict[str, Any]]:
    fam = fam_bin()
    v = is_sufficient(fam, count_statistic(fam.obs_axis("X")))
    return v.holds, {"cmi_bits": v.cmi_bits}


def _fam_bin_parity() -> Tuple[bool, Dict[str, Any]]:
    fam = fam_bin()
    v = is_sufficient(fam, parity_statistic(fam.obs_axis("X")))
    return (not v.holds) and v.cmi_bits > PARITY_MIN_BITS, {"cmi_bits": v.cmi_bits}


def _fam_bin_minimal() -> Tuple[bool, Dict[str, Any]]:
    fam = fam_bin()
    stat = minimal_sufficient(fam, "X")
    rows = verify_minimality(fam, stat, list(enumerate_partitions(stat.domain)))
    ok = stat.partition_label() == FAM_BIN_MINIMAL and all(r["ok"] for r in rows)
    return ok, {"partition": stat.partition_label(), "partitions_checked": len(rows)}


def _fam_dep_hci() -> Tuple[bool, Dict[str, Any]]:
    first, second = verify_hci(fam_dep_hci(samples=2))
    return first.holds and second.holds, {"theta_w_obs": first.cmi_bits, "x_w_y": second.cmi_bits}


def _fam_dep_theorem1() -> Tuple[bool, Dict[str, Any]]:
    h = fam_dep_hci(samples=2)
    x, y = h.family.obs_axes
    good = theorem1_check(h, identity(h.w), count_statistic(x), count_statistic(y))
    bad = theorem1_check(h, identity(h.w), parity_statistic(x), count_statistic(y))
    ok = good.premises_hold and good.conclusion.holds and bad.conclusion.cmi_bits > PERTURBED_MIN_BITS
    return ok, {"count_cmi_bits": good.conclusion.cmi_bits, "parity_cmi_bits": bad.conclusion.cmi_bits}


def _fam_dep_theorem2() -> Tuple[bool, Dict[str, Any]]:
    fam = fam_dep_hci(samples=2).family
    x, y = fam.obs_axes
    report = theorem2_check(fam, count_statistic(x), count_statistic(y))
    return report.conclusion.holds and report.extra["agree"], {"cmi_bits": report.conclusion.cmi_bits}


def _corner_point() -> Tuple[bool, Dict[str, Any]]:
    value = corner_point(ab_pair_model())
    return abs(value - 1.0) <= 1e-9, {"corner_bits": value}


def _binary_rd() -> Tuple[bool, Dict[str, Any]]:
    grid = [0.05, 0.1, 0.2]
    curve = conditional_remote_rd(binary_remote_model(), grid)
    gaps = [abs(curve.rate_at(d) - (1 - entropy_of([d, 1 - d]))) for d in grid]
    return max(gaps) <= RD_ORACLE_TOL and curve.converged, {"max_gap_bits": max(gaps)}


SUITE: List[Tuple[str, Callable[[], Tuple[bool, Dict[str, Any]]]]] = [
    ("fam_bin_tables", _fam_bin_tables),
    ("fam_bin_count_sufficient", _fam_bin_count),
    ("fam_bin_parity_not_sufficient", _fam_bin_parity),
    ("fam_bin_minimal_partition", _fam_bin_minimal),
    ("fam_dep_hci", _fam_dep_hci),
    ("fam_dep_theorem1", _fam_dep_theorem1),
    ("fam_dep_theorem2", _fam_dep_theorem2),
    ("ab_pair_corner_point", _corner_point),
    ("binary_remote_rd", _binary_rd),
]


def run_suite() -> List[CheckResult]:
    results = []
    for name, check in SUITE:
        passed, evidence = check()
        results.append(CheckResult(name, bool(passed), evidence))
        logger.info("[SELFTEST] %s: %s", name, "OK" if passed else "FAIL")
    return results


def main() -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
    results = run_suite()
    for r in results:
        print(f"[{'OK' if r.passed else 'FAIL'}] {r.name}")
    failed = sum(1 for r in results if not r.passed)
    print(f"{len(results) - failed}/{len(results)} проверок пройдено")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
