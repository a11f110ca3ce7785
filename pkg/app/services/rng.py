"""Воспроизводимые случайные потоки для симуляций.

Каждое испытание получает свой генератор Philox: ключ = seed + (поток << 64),
счётчик = номер испытания << 192. Результат испытания зависит только от
(seed, поток, номер), поэтому порядок и параллельность вычисления не важны.
"""

import numpy as np

from app.config import DEFAULT_SEED

GAUSSIAN_STREAM = 1
QAM_STREAM = 2
TRIANGLE_STREAM = 3
GAUSSIAN_CONFIG_STREAM = 4

_U64 = (1 << 64) - 1


def stream_key(seed: int, stream: int) -> int:
    return (int(seed) & _U64) + (int(stream) << 64)


def trial_generator(seed: int, stream: int, trial: int) -> np.random.Generator:
    """Генератор испытания trial в потоке stream."""
    bit_gen = np.random.Philox(key=stream_key(seed, stream), counter=int(trial) << 192)
    return np.random.Generator(bit_gen)


def resolve_seed(seed):
    return DEFAULT_SEED if seed is None else int(seed)
