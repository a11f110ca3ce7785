"""Треугольный пример: плотность 2^n на {θ < y_i < x_i < θ + 1}.

При общем y отношение плотностей p(x,y|θ)/p(x̂,y|θ) постоянно по θ тогда и
только тогда, когда max x = max x̂; симметрично при общем x роль играет min y.
Проверка делается на пробах, сэмплированных внутри общего носителя.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.errors import ErrorCode, WorkbenchError
from app.services.rng import TRIANGLE_STREAM, resolve_seed, trial_generator

logger = logging.getLogger(__name__)

# Пробы ближе этого к границе носителя отбрасываются
EDGE_MARGIN = 1e-12
RATIO_TOL = 1e-12
_MAX_DRAWS = 50
_MAX_FAILURES_REPORTED = 5


@dataclass(frozen=True)
class TriangleConfig:
    n: int = 2
    theta_values: Tuple[float, ...] = (0.0, 0.25, 0.5)
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        thetas = tuple(float(t) for t in self.theta_values)
        object.__setattr__(self, "theta_values", thetas)
        if self.n < 1:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"n должно быть >= 1, получено {self.n}")
        if len(set(thetas)) != len(thetas):
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, "значения θ должны быть различны")

    @property
    def sorted_thetas(self) -> np.ndarray:
        return np.sort(np.asarray(self.theta_values))

    def to_record(self) -> Dict[str, Any]:
        return {"n": self.n, "theta_values": list(self.theta_values), "seed": resolve_seed(self.seed)}


def triangle_density(x: Any, y: Any, theta: float) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = np.all(theta < y) and np.all(y < x) and np.all(x < theta + 1)
    return float(2.0 ** x.size) if inside else 0.0


def ratio_is_constant(f1: np.ndarray, f2: np.ndarray) -> bool:
    """f1/f2 постоянно по θ: одинаковые носители и одно значение отношения на них."""
    s1, s2 = f1 > 0, f2 > 0
    if not np.array_equal(s1, s2):
        return False
    if not s1.any():
        return True
    ratios = f1[s1] / f2[s2]
    return bool(np.all(np.abs(ratios - ratios[0]) <= RATIO_TOL * abs(ratios[0])))


@dataclass
class ProbeTally:
    checked: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)

    def record(self, ok: bool, kind: str, probe: Dict[str, Any]) -> None:
        self.checked += 1
        if not ok and len(self.failures) < _MAX_FAILURES_REPORTED:
            self.failures.append({"kind": kind, **probe})

    @property
    def failed(self) -> int:
        return len(self.failures)


@dataclass(frozen=True)
class TriangleReport:
    probes: int
    discarded: int
    equal_max: int
    different_max: int
    equal_min: int
    different_min: int
    failures: Tuple[Dict[str, Any], ...]

    @property
    def holds(self) -> bool:
        return not self.failures

    def to_record(self) -> Dict[str, Any]:
        return {
            "check": "triangle_ratio",
            "probes": self.probes,
            "discarded": self.discarded,
            "equal_max_checked": self.equal_max,
            "different_max_checked": self.different_max,
            "equal_min_checked": self.equal_min,
            "different_min_checked": self.different_min,
            "failures": list(self.failures),
            "holds": self.holds,
        }


def _near_edge(value: float, edges: np.ndarray) -> bool:
    return bool(np.any(np.abs(edges - value) <= EDGE_MARGIN))


def _with_max(rng: np.random.Generator, lower: np.ndarray, top: float) -> np.ndarray:
    """Вектор с max = top и x_i > lower_i."""
    x = rng.uniform(lower, top)
    x[rng.integers(x.size)] = top
    return x


def _with_min(rng: np.random.Generator, bottom: float, upper: np.ndarray) -> np.ndarray:
    """Вектор с min = bottom и y_i < upper_i."""
    y = rng.uniform(bottom, upper)
    y[rng.integers(y.size)] = bottom
    return y


def _densities(thetas: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.array([triangle_density(x, y, t) for t in thetas])


def triangle_ratio_check(cfg: TriangleConfig, num_probes: int) -> TriangleReport:
    """Классы «отношение постоянно по θ» совпадают с классами max x (и min y при общем x)."""
    thetas = cfg.sorted_thetas
    if thetas.size < 2:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, "нужно хотя бы два значения θ")
    if num_probes < 1:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"число проб должно быть >= 1, получено {num_probes}")
    lo, hi = float(thetas[-1]), float(thetas[0] + 1)
    if not lo < hi:
        raise WorkbenchError(
            ErrorCode.EMPTY_COMMON_SUPPORT,
            f"общий носитель ({lo}, {hi}) пуст",
            {"theta_min": float(thetas[0]), "theta_max": float(thetas[-1])},
        )
    upper_edges = thetas + 1  # max x пересекает θ_j + 1
    lower_edges = thetas       # min y пересекает θ_j
    n = cfg.n
    seed = resolve_seed(cfg.seed)
    eq_max, diff_max, eq_min, diff_min = ProbeTally(), ProbeTally(), ProbeTally(), ProbeTally()
    discarded = 0

    for probe in range(num_probes):
        rng = trial_generator(seed, TRIANGLE_STREAM, probe)
        j = int(rng.integers(0, thetas.size - 1))

        # общий y внутри общего носителя, сравниваем x и x̂
        y = rng.uniform(lo, hi, size=n)
        m = float(rng.uniform(y.max(), upper_edges[-1]))
        m1 = float(rng.uniform(max(y.max(), upper_edges[j - 1] if j else y.max()), upper_edges[j]))
        m2 = float(rng.uniform(upper_edges[j], upper_edges[j + 1]))
        if any(_near_edge(v, upper_edges) for v in (m, m1, m2)):
            discarded += 1
        else:
            xa, xb = _with_max(rng, y, m), _with_max(rng, y, m)
            same = ratio_is_constant(_densities(thetas, xa, y), _densities(thetas, xb, y))
            eq_max.record(same, "equal_max", {"x": xa.tolist(), "x_hat": xb.tolist(), "y": y.tolist()})
            x1, x2 = _with_max(rng, y, m1), _with_max(rng, y, m2)
            diff = ratio_is_constant(_densities(thetas, x1, y), _densities(thetas, x2, y))
            diff_max.record(not diff, "different_max", {"x": x1.tolist(), "x_hat": x2.tolist(), "y": y.tolist()})

        # общий x внутри общего носителя, сравниваем y и ŷ
        x = rng.uniform(lo, hi, size=n)
        top = float(x.min())
        b = float(rng.uniform(lower_edges[0], top))
        b1 = float(rng.uniform(lower_edges[j], lower_edges[j + 1]))
        b2 = float(rng.uniform(lower_edges[j + 1], min(top, lower_edges[j + 2]) if j + 2 < thetas.size else top))
        if any(_near_edge(v, lower_edges) for v in (b, b1, b2)):
            discarded += 1
            continue
        ya, yb = _with_min(rng, b, x), _with_min(rng, b, x)
        same = ratio_is_constant(_densities(thetas, x, ya), _densities(thetas, x, yb))
        eq_min.record(same, "equal_min", {"x": x.tolist(), "y": ya.tolist(), "y_hat": yb.tolist()})
        y1, y2 = _with_min(rng, b1, x), _with_min(rng, b2, x)
        diff = ratio_is_constant(_densities(thetas, x, y1), _densities(thetas, x, y2))
        diff_min.record(not diff, "different_min", {"x": x.tolist(), "y": y1.tolist(), "y_hat": y2.tolist()})

    failures = tuple(eq_max.failures + diff_max.failures + eq_min.failures + diff_min.failures)
    report = TriangleReport(
        probes=num_probes,
        discarded=discarded,
        equal_max=eq_max.checked,
        different_max=diff_max.checked,
        equal_min=eq_min.checked,
        different_min=diff_min.checked,
        failures=failures,
    )
    if failures:
        logger.warning("[TRIANGLE] %d проб не согласуются с max x / min y", len(failures))
    else:
        logger.info("[TRIANGLE] %d проб согласуются с max x / min y (отброшено %d)", num_probes, discarded)
    return report
