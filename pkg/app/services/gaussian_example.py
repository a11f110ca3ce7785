"""Гауссовский пример: X_i = Z + U_i, Y_i = Z + V_i, Z ~ N(θ, ρ), U_i, V_i ~ N(0, 1−ρ).

θ имеет гауссовский prior N(prior_mean, prior_var), поэтому апостериорные
моменты считаются в замкнутом виде: по всем 2n наблюдениям или только по
паре сумм (Σx, Σy). Совпадение двух ответов — это глобальная достаточность
пары сумм.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.linalg import solve
from tqdm import tqdm

from app.config import SHOW_PROGRESS
from app.errors import ErrorCode, WorkbenchError
from app.services.rng import GAUSSIAN_CONFIG_STREAM, GAUSSIAN_STREAM, resolve_seed, trial_generator

logger = logging.getLogger(__name__)

FULL = "full"
REDUCED = "reduced"


@dataclass(frozen=True)
class GaussianHciConfig:
    n: int = 3
    rho: float = 0.5
    prior_mean: float = 0.0
    prior_var: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"n должно быть >= 1, получено {self.n}")
        if not 0 < self.rho < 1:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"ρ должно лежать в (0, 1), получено {self.rho}")
        if not self.prior_var > 0:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"дисперсия prior должна быть > 0, получено {self.prior_var}")

    def to_record(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "rho": self.rho,
            "prior_mean": self.prior_mean,
            "prior_var": self.prior_var,
            "seed": resolve_seed(self.seed),
        }


def _full_moments(cfg: GaussianHciConfig) -> Tuple[np.ndarray, np.ndarray, float]:
    """(Σ_oo, Cov(θ, o), prior_var) для o = (x_1..x_n, y_1..y_n)."""
    m = 2 * cfg.n
    ones = np.ones((m, m))
    cov_oo = (cfg.prior_var + cfg.rho) * ones + (1 - cfg.rho) * np.eye(m)
    return cov_oo, np.full(m, cfg.prior_var), cfg.prior_var


def _reduced_moments(cfg: GaussianHciConfig) -> Tuple[np.ndarray, np.ndarray, float]:
    """То же для s = (Σx, Σy): Var(Σx|θ) = n²ρ + n(1−ρ), Cov(Σx, Σy|θ) = n²ρ."""
    n = cfg.n
    within = np.array([
        [n * n * cfg.rho + n * (1 - cfg.rho), n * n * cfg.rho],
        [n * n * cfg.rho, n * n * cfg.rho + n * (1 - cfg.rho)],
    ])
    cov_ss = within + cfg.prior_var * n * n * np.ones((2, 2))
    return cov_ss, np.full(2, cfg.prior_var * n), cfg.prior_var


def _gain(cfg: GaussianHciConfig, mode: str) -> Tuple[np.ndarray, float, float]:
    """Линейный коэффициент апостериорного среднего, масштаб среднего и апостериорная дисперсия."""
    if mode == FULL:
        cov, cross, var, scale = *_full_moments(cfg), 1.0
    elif mode == REDUCED:
        cov, cross, var, scale = *_reduced_moments(cfg), float(cfg.n)
    else:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"неизвестный режим {mode!r}")
    gain = solve(cov, cross, assume_a="pos")
    return gain, scale, float(var - cross @ gain)


def _observations(cfg: GaussianHciConfig, x: np.ndarray, y: np.ndarray, mode: str) -> np.ndarray:
    if mode == REDUCED:
        return np.stack([x.sum(axis=-1), y.sum(axis=-1)], axis=-1)
    return np.concatenate([x, y], axis=-1)


def gaussian_posterior(cfg: GaussianHciConfig, x_samples: Any, y_samples: Any, mode: str = FULL) -> Tuple[float, float]:
    """Апостериорные (среднее, дисперсия) θ по всем данным или по суммам."""
    x = np.asarray(x_samples, dtype=float).ravel()
    y = np.asarray(y_samples, dtype=float).ravel()
    if x.size != cfg.n or y.size != cfg.n:
        raise WorkbenchError(
            ErrorCode.LENGTH_MISMATCH,
            f"ожидалось по {cfg.n} наблюдений, получено {x.size} и {y.size}",
        )
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise WorkbenchError(ErrorCode.NONFINITE_INPUT, "наблюдения содержат inf или nan")
    gain, scale, var = _gain(cfg, mode)
    obs = _observations(cfg, x, y, mode)
    mean = cfg.prior_mean + float(gain @ (obs - scale * cfg.prior_mean))
    return mean, var


@dataclass(frozen=True)
class GaussianMseResult:
    trials: int
    mse_full: float
    mse_reduced: float
    se_full: float
    se_reduced: float
    se_diff: float
    posterior_var: float

    @property
    def gap(self) -> float:
        return abs(self.mse_full - self.mse_reduced)

    @property
    def within_noise(self) -> bool:
        """Разница не больше трёх стандартных ошибок (или численного нуля)."""
        return self.gap <= max(3 * max(self.se_full, self.se_reduced, self.se_diff), 1e-12)

    def to_record(self) -> Dict[str, Any]:
        return {
            "trials": self.trials,
            "mse_full": self.mse_full,
            "mse_reduced": self.mse_reduced,
            "se_full": self.se_full,
            "se_reduced": self.se_reduced,
            "se_diff": self.se_diff,
            "posterior_var": self.posterior_var,
            "gap": self.gap,
            "within_noise": self.within_noise,
        }


def simulate_trial(cfg: GaussianHciConfig, trial: int) -> Tuple[float, np.ndarray, np.ndarray]:
    """(θ, x, y) одного испытания."""
    rng = trial_generator(resolve_seed(cfg.seed), GAUSSIAN_STREAM, trial)
    draw = rng.standard_normal(2 + 2 * cfg.n)
    theta = cfg.prior_mean + np.sqrt(cfg.prior_var) * draw[0]
    z = theta + np.sqrt(cfg.rho) * draw[1]
    noise = np.sqrt(1 - cfg.rho) * draw[2:]
    return theta, z + noise[: cfg.n], z + noise[cfg.n:]


def gaussian_mc_mse(cfg: GaussianHciConfig, trials: int) -> GaussianMseResult:
    """Парный Монте-Карло: одни и те же испытания оцениваются по всем данным и по суммам."""
    if trials < 1:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"trials должно быть >= 1, получено {trials}")
    gain_f, scale_f, var_f = _gain(cfg, FULL)
    gain_r, scale_r, _ = _gain(cfg, REDUCED)

    thetas = np.empty(trials)
    xs = np.empty((trials, cfg.n))
    ys = np.empty((trials, cfg.n))
    for t in tqdm(range(trials), desc="gaussian MC", disable=not SHOW_PROGRESS):
        thetas[t], xs[t], ys[t] = simulate_trial(cfg, t)

    est_f = cfg.prior_mean + (_observations(cfg, xs, ys, FULL) - scale_f * cfg.prior_mean) @ gain_f
    est_r = cfg.prior_mean + (_observations(cfg, xs, ys, REDUCED) - scale_r * cfg.prior_mean) @ gain_r
    sq_f = (est_f - thetas) ** 2
    sq_r = (est_r - thetas) ** 2
    root = np.sqrt(trials)
    result = GaussianMseResult(
        trials=trials,
        mse_full=float(sq_f.mean()),
        mse_reduced=float(sq_r.mean()),
        se_full=float(sq_f.std(ddof=0) / root),
        se_reduced=float(sq_r.std(ddof=0) / root),
        se_diff=float((sq_f - sq_r).std(ddof=0) / root),
        posterior_var=var_f,
    )
    logger.info(
        "[GAUSS] n=%d ρ=%.3f: MSE full=%.6f reduced=%.6f (теория %.6f)",
        cfg.n, cfg.rho, result.mse_full, result.mse_reduced, var_f,
    )
    return result


@dataclass(frozen=True)
class PosteriorAgreement:
    configs: int
    max_mean_diff: float
    max_var_diff: float

    @property
    def max_diff(self) -> float:
        return max(self.max_mean_diff, self.max_var_diff)

    def to_record(self) -> Dict[str, Any]:
        return {
            "configs": self.configs,
            "max_mean_diff": self.max_mean_diff,
            "max_var_diff": self.max_var_diff,
        }


def posterior_agreement(configs: int, seed: Optional[int] = None, max_n: int = 6) -> PosteriorAgreement:
    """Случайные (n, ρ, prior, данные): апостериорные моменты по всем данным и по суммам."""
    if configs < 1:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"число конфигураций должно быть >= 1, получено {configs}")
    seed = resolve_seed(seed)
    worst_mean = worst_var = 0.0
    for k in range(configs):
        rng = trial_generator(seed, GAUSSIAN_CONFIG_STREAM, k)
        cfg = GaussianHciConfig(
            n=int(rng.integers(1, max_n + 1)),
            rho=float(rng.uniform(0.05, 0.95)),
            prior_mean=float(rng.normal()),
            prior_var=float(rng.uniform(0.2, 3.0)),
            seed=seed,
        )
        x = rng.normal(cfg.prior_mean, 2.0, size=cfg.n)
        y = rng.normal(cfg.prior_mean, 2.0, size=cfg.n)
        mean_f, var_f = gaussian_posterior(cfg, x, y, FULL)
        mean_r, var_r = gaussian_posterior(cfg, x, y, REDUCED)
        worst_mean = max(worst_mean, abs(mean_f - mean_r))
        worst_var = max(worst_var, abs(var_f - var_r))
    result = PosteriorAgreement(configs, worst_mean, worst_var)
    logger.info("[GAUSS] %d конфигураций: max |Δсреднее|=%.2e, max |Δдисперсия|=%.2e", configs, worst_mean, worst_var)
    return result
