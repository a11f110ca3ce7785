"""Конфигурация Sufficiency Workbench."""

import os
from dotenv import load_dotenv

# Загружаем переменные окружения из .env (локально) и из окружения (CI)
load_dotenv()


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError:
        return default


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(float(raw))
    except ValueError:
        return default


# --- Базовые настройки ---

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
SENTRY_DSN = os.getenv("SENTRY_DSN", "")
# Прогресс-бары tqdm в длинных симуляциях (по умолчанию выключены, чтобы не засорять stderr)
SHOW_PROGRESS = os.getenv("SHOW_PROGRESS", "false").lower() == "true"
OUTPUT_DIR = os.getenv("OUTPUT_DIR", "out")
DEFAULT_SEED = _int_env("DEFAULT_SEED", 20120901)

# --- Вероятностное ядро ---

# Допуск суммы тензора после валидации
SUM_TOLERANCE = _float_env("SUM_TOLERANCE", 1e-12)
# Дрейф нормировки во входных файлах: до порога молча перенормируем, выше порога ошибка
NORMALIZATION_TOLERANCE = _float_env("NORMALIZATION_TOLERANCE", 1e-9)
# Ячейки меньше этого значения считаются точными нулями в информационных суммах
ZERO_CELL_EPS = _float_env("ZERO_CELL_EPS", 1e-15)
MAX_TENSOR_CELLS = _int_env("MAX_TENSOR_CELLS", 10**7)

# --- Достаточность ---

# Марковская цепь считается выполненной, если CMI <= порога (бит)
MARKOV_THRESHOLD_BITS = _float_env("MARKOV_THRESHOLD_BITS", 1e-9)
# Относительный допуск при сравнении коэффициентов пропорциональности
RATIO_RTOL = _float_env("RATIO_RTOL", 1e-9)
# Композиция каналов HCI должна воспроизводить p(obs|θ) с этой точностью
COMPOSITION_TOLERANCE = _float_env("COMPOSITION_TOLERANCE", 1e-9)

# --- Область скоростей (Ahlswede–Körner / Wyner) ---

FRONTIER_LAMBDA_STEP = _float_env("FRONTIER_LAMBDA_STEP", 0.05)
FRONTIER_MAX_ITER = _int_env("FRONTIER_MAX_ITER", 400)
FRONTIER_TOL = _float_env("FRONTIER_TOL", 1e-10)
# λ=1 соответствует β=∞; на практике ограничиваем
FRONTIER_MAX_BETA = _float_env("FRONTIER_MAX_BETA", 1e3)
# Лимит перебора детерминированных отображений Y→U (разбиений алфавита Y)
FRONTIER_MAX_PARTITIONS = _int_env("FRONTIER_MAX_PARTITIONS", 200000)
FRONTIER_SEARCH_TOL = _float_env("FRONTIER_SEARCH_TOL", 0.02)

# --- Удалённая функция скорость-искажение ---

RD_MAX_ITER = _int_env("RD_MAX_ITER", 5000)
RD_TOL = _float_env("RD_TOL", 1e-10)
RD_MAX_SLOPE = _float_env("RD_MAX_SLOPE", 200.0)
RD_BISECTION_STEPS = _int_env("RD_BISECTION_STEPS", 80)
RD_GAP_TOL = _float_env("RD_GAP_TOL", 0.01)
# Допуск выпуклости кривой R(D) в битах
RD_CONVEXITY_TOL = _float_env("RD_CONVEXITY_TOL", 1e-3)
# Точки сетки D можно считать параллельно; 1 = последовательно
RD_WORKERS = _int_env("RD_WORKERS", 1)

# --- Загрузка моделей ---

MODEL_CACHE_SIZE = _int_env("MODEL_CACHE_SIZE", 32)
