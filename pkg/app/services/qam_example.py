"""Обнаружение QAM-сигнала в независимых релеевских замираниях на k сенсорах.

H1: x_i = h_i·S + N_i, H0: x_i = N_i, где h_i ~ CN(0, fading_var),
N_i ~ CN(0, σ²), S = r_m·e^{jφ_m} с вероятностью π_m. При фиксированном S
наблюдения независимы и x_i ~ CN(0, r_m²·fading_var + σ²), поэтому отношение
правдоподобия зависит только от |x_i|.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import mannwhitneyu, norm
from tqdm import tqdm

from app.config import SHOW_PROGRESS
from app.errors import ErrorCode, WorkbenchError
from app.services.rng import QAM_STREAM, resolve_seed, trial_generator

logger = logging.getLogger(__name__)

Symbol = Tuple[float, float, float]  # (радиус, фаза, вероятность)

DEFAULT_THRESHOLDS = tuple(float(t) for t in np.logspace(-2, 2, 9))


def qam_constellation(m: int = 4, radius: float = 1.0) -> Tuple[Symbol, ...]:
    """Равновероятные точки на одной окружности с фазами 2πk/M."""
    return tuple((radius, 2 * np.pi * k / m, 1.0 / m) for k in range(m))


@dataclass(frozen=True)
class QamConfig:
    k: int = 4
    constellation: Tuple[Symbol, ...] = field(default_factory=qam_constellation)
    noise_var: float = 1.0
    fading_var: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"k должно быть >= 1, получено {self.k}")
        points = tuple(tuple(float(v) for v in s) for s in self.constellation)
        if not points:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, "пустое созвездие")
        object.__setattr__(self, "constellation", points)
        probs = np.array([p for _, _, p in points])
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, "вероятности точек созвездия должны суммироваться в 1")
        if any(r < 0 for r, _, _ in points):
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, "радиусы должны быть неотрицательными")
        if not (self.noise_var > 0 and self.fading_var > 0):
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, "дисперсии шума и замираний должны быть > 0")

    @property
    def radii(self) -> np.ndarray:
        return np.array([r for r, _, _ in self.constellation])

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for _, _, p in self.constellation])

    def to_record(self) -> Dict[str, Any]:
        return {
            "k": self.k,
            "constellation": [list(s) for s in self.constellation],
            "noise_var": self.noise_var,
            "fading_var": self.fading_var,
            "seed": resolve_seed(self.seed),
        }


def _checked(values: Any, cfg: QamConfig, dtype: Any) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape[-1] != cfg.k:
        raise WorkbenchError(ErrorCode.LENGTH_MISMATCH, f"ожидалось {cfg.k} наблюдений, получено {arr.shape[-1]}")
    if not np.all(np.isfinite(arr)):
        raise WorkbenchError(ErrorCode.NONFINITE_INPUT, "наблюдения содержат inf или nan")
    return arr


def _log_lr_from_energy(cfg: QamConfig, energy: np.ndarray) -> np.ndarray:
    """ln LR по |x_i|² (последняя ось — сенсоры)."""
    sigma2 = cfg.noise_var
    v = cfg.radii ** 2 * cfg.fading_var + sigma2  # [m]
    per_m = cfg.k * np.log(sigma2 / v) - energy.sum(axis=-1)[..., None] * (1 / v - 1 / sigma2)
    with np.errstate(divide="ignore"):
        log_pi = np.log(cfg.probs)
    return logsumexp(per_m + log_pi, axis=-1)


def _log_cn_density(xs: np.ndarray, var: Any) -> np.ndarray:
    """ln Π_i CN(x_i; 0, var): вещественная и мнимая части независимы с дисперсией var/2."""
    scale = np.sqrt(np.asarray(var, dtype=float) / 2)
    return (norm.logpdf(xs.real, scale=scale) + norm.logpdf(xs.imag, scale=scale)).sum(axis=-1)


def qam_log_lr(cfg: QamConfig, x: Any) -> np.ndarray:
    """ln LR по полным комплексным наблюдениям, без перехода к модулям."""
    xs = _checked(x, cfg, complex)
    v = cfg.radii ** 2 * cfg.fading_var + cfg.noise_var
    per_m = _log_cn_density(xs[..., None, :], v[:, None])  # [..., m]
    with np.errstate(divide="ignore"):
        log_pi = np.log(cfg.probs)
    return logsumexp(per_m + log_pi, axis=-1) - _log_cn_density(xs, cfg.noise_var)


def qam_log_lr_from_magnitudes(cfg: QamConfig, magnitudes: Any) -> np.ndarray:
    mags = _checked(magnitudes, cfg, float)
    return _log_lr_from_energy(cfg, mags ** 2)


def qam_lr(cfg: QamConfig, x: Any) -> float:
    """p(x|H1) / p(x|H0) по комплексным наблюдениям."""
    return float(np.exp(qam_log_lr(cfg, x)))


def qam_lr_from_magnitudes(cfg: QamConfig, magnitudes: Any) -> float:
    return float(np.exp(qam_log_lr_from_magnitudes(cfg, magnitudes)))


def energy_statistic(x: Any) -> float:
    """Σ|x_i|² — статистика энергетического детектора."""
    return float(np.sum(np.abs(np.asarray(x, dtype=complex)) ** 2))


def _complex_normal(rng: np.random.Generator, var: float, size: int) -> np.ndarray:
    return np.sqrt(var / 2) * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def simulate_trial(cfg: QamConfig, trial: int) -> Tuple[np.ndarray, np.ndarray]:
    """Пара наблюдений (при H0, при H1) одного испытания."""
    rng = trial_generator(resolve_seed(cfg.seed), QAM_STREAM, trial)
    noise0 = _complex_normal(rng, cfg.noise_var, cfg.k)
    noise1 = _complex_normal(rng, cfg.noise_var, cfg.k)
    h = _complex_normal(rng, cfg.fading_var, cfg.k)
    m = rng.choice(len(cfg.constellation), p=cfg.probs)
    r, phase, _ = cfg.constellation[m]
    s = r * np.exp(1j * phase)
    return noise0, h * s + noise1


@dataclass(frozen=True)
class RocRow:
    threshold: float
    pd_full: float
    pfa_full: float
    pd_reduced: float
    pfa_reduced: float

    def row(self) -> Dict[str, Any]:
        return {
            "threshold": self.threshold,
            "pd_full": self.pd_full,
            "pfa_full": self.pfa_full,
            "pd_reduced": self.pd_reduced,
            "pfa_reduced": self.pfa_reduced,
        }


@dataclass(frozen=True)
class RocComparison:
    trials: int
    rows: Tuple[RocRow, ...]
    identical: bool
    max_lr_rel_diff: float
    auc_full: float
    auc_reduced: float
    auc_energy: float

    def table(self) -> List[Dict[str, Any]]:
        return [r.row() for r in self.rows]

    def to_record(self) -> Dict[str, Any]:
        return {
            "trials": self.trials,
            "thresholds": len(self.rows),
            "identical": self.identical,
            "max_lr_rel_diff": self.max_lr_rel_diff,
            "auc_full": self.auc_full,
            "auc_reduced": self.auc_reduced,
            "auc_energy": self.auc_energy,
        }


def auc(scores_h1: np.ndarray, scores_h0: np.ndarray) -> float:
    """Площадь под ROC через статистику Манна–Уитни."""
    u = mannwhitneyu(scores_h1, scores_h0, alternative="greater").statistic
    return float(u / (len(scores_h1) * len(scores_h0)))


def qam_roc_compare(cfg: QamConfig, trials: int, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> RocComparison:
    """ROC по LR от полных данных и по LR от модулей на одних и тех же испытаниях."""
    if trials < 1:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"trials должно быть >= 1, получено {trials}")
    taus = np.asarray(sorted(float(t) for t in thresholds))
    if taus.size == 0 or np.any(taus <= 0):
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, "пороги LR должны быть положительными")

    x0 = np.empty((trials, cfg.k), dtype=complex)
    x1 = np.empty((trials, cfg.k), dtype=complex)
    for t in tqdm(range(trials), desc="qam MC", disable=not SHOW_PROGRESS):
        x0[t], x1[t] = simulate_trial(cfg, t)

    full0, full1 = qam_log_lr(cfg, x0), qam_log_lr(cfg, x1)
    red0 = qam_log_lr_from_magnitudes(cfg, np.abs(x0))
    red1 = qam_log_lr_from_magnitudes(cfg, np.abs(x1))
    log_taus = np.log(taus)

    rows = []
    for tau, lt in zip(taus, log_taus):
        rows.append(RocRow(
            threshold=float(tau),
            pd_full=float(np.mean(full1 >= lt)),
            pfa_full=float(np.mean(full0 >= lt)),
            pd_reduced=float(np.mean(red1 >= lt)),
            pfa_reduced=float(np.mean(red0 >= lt)),
        ))
    identical = all(r.pd_full == r.pd_reduced and r.pfa_full == r.pfa_reduced for r in rows)
    all_full = np.concatenate([full0, full1])
    all_red = np.concatenate([red0, red1])
    rel = float(np.max(np.abs(np.expm1(all_full - all_red)))) if all_full.size else 0.0

    energy0 = np.sum(np.abs(x0) ** 2, axis=1)
    energy1 = np.sum(np.abs(x1) ** 2, axis=1)
    result = RocComparison(
        trials=trials,
        rows=tuple(rows),
        identical=identical,
        max_lr_rel_diff=rel,
        auc_full=auc(full1, full0),
        auc_reduced=auc(red1, red0),
        auc_energy=auc(energy1, energy0),
    )
    logger.info(
        "[QAM] k=%d σ²=%.3g: AUC full=%.4f reduced=%.4f energy=%.4f, таблицы совпадают: %s",
        cfg.k, cfg.noise_var, result.auc_full, result.auc_reduced, result.auc_energy, identical,
    )
    return result
