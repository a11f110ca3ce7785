"""Встроенные модели: биномиальное семейство, HCI-семейства, дискретный треугольник, модели источников."""

from __future__ import annotations

import itertools
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from app.errors import ErrorCode, WorkbenchError
from app.services.hci_service import HciModel, hci_from_channels
from app.services.model_core import Alphabet, ParamFamily, make_joint, product_alphabet
from app.services.source_model import SourceModel
from app.services.statistics_service import Statistic, from_function

logger = logging.getLogger(__name__)

BINARY = ("0", "1")
COORD_SEPARATOR = "/"

# Ячейки тензоров в этих семействах заданы точно; seed фиксирует «общее положение»
GENERIC_FAMILY_SEED = 7


def bit_strings(n: int) -> Tuple[str, ...]:
    return tuple("".join(bits) for bits in itertools.product(BINARY, repeat=n))


def _iid_bernoulli(q: float, n: int) -> np.ndarray:
    """Закон n независимых Bernoulli(q) на строках из bit_strings(n)."""
    return np.array([q ** s.count("1") * (1 - q) ** s.count("0") for s in bit_strings(n)])


def fam_bin(p0: float = 0.2, p1: float = 0.8, n: int = 2) -> ParamFamily:
    """θ ∈ {0,1} равновероятно, X = (X1..Xn) iid Bernoulli(p_θ) как одна ось."""
    return ParamFamily(
        theta=Alphabet("theta", BINARY),
        prior=np.array([0.5, 0.5]),
        obs_axes=(Alphabet("X", bit_strings(n)),),
        cond=np.stack([_iid_bernoulli(p0, n), _iid_bernoulli(p1, n)]),
    )


def count_statistic(domain: Alphabet) -> Statistic:
    """Число единиц в символе."""
    return from_function(domain, lambda s: s.count("1"))


def parity_statistic(domain: Alphabet) -> Statistic:
    return from_function(domain, lambda s: s.count("1") % 2)


def fam_dep_hci(
    samples: int = 1,
    flip: float = 0.1,
    q: Tuple[float, float] = (0.25, 0.75),
) -> HciModel:
    """W = θ, перевёрнутый с вероятностью flip; X и Y — по samples iid Bernoulli(q_W) в каждом узле."""
    theta = Alphabet("theta", BINARY)
    w = Alphabet("W", BINARY)
    p_w = np.array([[1 - flip, flip], [flip, 1 - flip]])
    node = np.stack([_iid_bernoulli(q[0], samples), _iid_bernoulli(q[1], samples)])
    p_obs = node[:, :, None] * node[:, None, :]
    axes = (Alphabet("X", bit_strings(samples)), Alphabet("Y", bit_strings(samples)))
    return hci_from_channels(theta, [0.5, 0.5], w, p_w, axes, p_obs)


def copy_w_hci(correlation: float = 0.8) -> HciModel:
    """W = θ, но X и Y зависимы при фиксированном W (X−W−Y нарушена)."""
    theta = Alphabet("theta", BINARY)
    w = Alphabet("W", BINARY)
    agree, disagree = correlation / 2, (1 - correlation) / 2
    p_obs = np.array([
        [[agree, disagree], [disagree, agree]],
        [[disagree, agree], [agree, disagree]],
    ])
    axes = (Alphabet("X", BINARY), Alphabet("Y", BINARY))
    return hci_from_channels(theta, [0.5, 0.5], w, np.eye(2), axes, p_obs)


def observed_w_hci(family: ParamFamily, w_name: str = "W") -> HciModel:
    """W = все наблюдения вместе: p(w|θ) = p(obs|θ), p(obs|w) — вырожденный."""
    w = product_alphabet(family.obs_axes, w_name)
    p_w = family.cond.reshape(family.theta.size, w.size)
    p_obs = np.eye(w.size).reshape((w.size,) + tuple(a.size for a in family.obs_axes))
    return hci_from_channels(family.theta, family.prior, w, p_w, family.obs_axes, p_obs)


def generic_family(
    theta_size: int = 3,
    x_size: int = 4,
    y_size: int = 2,
    seed: int = GENERIC_FAMILY_SEED,
) -> ParamFamily:
    """Случайное семейство общего положения: никакое нетривиальное Tx не дополняет Ty."""
    rng = np.random.default_rng(seed)
    cond = rng.dirichlet(np.ones(x_size * y_size), size=theta_size).reshape(theta_size, x_size, y_size)
    return ParamFamily(
        theta=Alphabet("theta", tuple(str(k) for k in range(theta_size))),
        prior=np.full(theta_size, 1.0 / theta_size),
        obs_axes=(
            Alphabet("X", tuple(f"x{k}" for k in range(x_size))),
            Alphabet("Y", tuple(f"y{k}" for k in range(y_size))),
        ),
        cond=cond,
    )


# -----------------------------
#     ДИСКРЕТНЫЙ ТРЕУГОЛЬНИК
# -----------------------------

# Сетки уже единицы: x − y < 1 выполняется всегда, поэтому носитель по θ
# зависит только от max(x) (первое семейство) или min(y) (второе).
MAX_GRID = tuple((k + 0.5) / 8 for k in range(6))
MAX_THETAS = tuple(j / 8 - 6 / 8 for j in range(5))
MIN_GRID = MAX_GRID
MIN_THETAS = tuple(j / 8 for j in range(5))


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def triangle_coordinates(symbol: str) -> Tuple[float, ...]:
    return tuple(float(s) for s in symbol.split(COORD_SEPARATOR))


def triangle_grid_family(
    n: int = 1,
    grid: Sequence[float] = MAX_GRID,
    theta_values: Sequence[float] = MAX_THETAS,
) -> ParamFamily:
    """Дискретизация плотности 2^n на {θ < y_i < x_i < θ + 1}: равномерно по ячейкам носителя."""
    if n < 1 or len(grid) < 2 or len(theta_values) < 1:
        raise WorkbenchError(ErrorCode.INVALID_CONFIG, "нужны n >= 1, сетка из >= 2 точек и хотя бы одно θ")
    grid = np.asarray(sorted(grid), dtype=float)
    points = list(itertools.product(range(len(grid)), repeat=n))
    symbols = tuple(COORD_SEPARATOR.join(_fmt(grid[i]) for i in p) for p in points)
    coords = grid[np.array(points)]  # [точка, i]

    slices = []
    for th in theta_values:
        x_ok = np.all(coords < th + 1, axis=1)
        y_ok = np.all(coords > th, axis=1)
        below = np.all(coords[None, :, :] < coords[:, None, :], axis=2)  # [x, y]: y_i < x_i
        support = below & x_ok[:, None] & y_ok[None, :]
        if not support.any():
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, f"при θ={th} на сетке нет ни одной ячейки носителя")
        slices.append(support / support.sum())

    family = ParamFamily(
        theta=Alphabet("theta", tuple(_fmt(t) for t in theta_values)),
        prior=np.full(len(theta_values), 1.0 / len(theta_values)),
        obs_axes=(Alphabet("X", symbols), Alphabet("Y", symbols)),
        cond=np.stack(slices),
    )
    logger.debug("[TRIANGLE] сеточное семейство: n=%d, %d точек, |θ|=%d", n, len(symbols), len(theta_values))
    return family


def null_points(family: ParamFamily, axis: str) -> Tuple[bool, ...]:
    """Символы оси, имеющие нулевую вероятность при всех θ."""
    k = 1 + family.obs_names.index(axis)
    others = tuple(i for i in range(family.cond.ndim) if i != k)
    return tuple(bool(v) for v in family.cond.max(axis=others) <= 0)


def extreme_statistic(family: ParamFamily, axis: str, use_max: bool) -> Statistic:
    """max(x) (или min(y)) на символах с ненулевой массой и отдельный нулевой класс."""
    domain = family.obs_axis(axis)
    null = null_points(family, axis)
    pick = max if use_max else min
    labels = ["null" if z else pick(triangle_coordinates(s)) for s, z in zip(domain.symbols, null)]
    return Statistic(domain, tuple(labels))


# -----------------------------
#     МОДЕЛИ ИСТОЧНИКОВ
# -----------------------------


def ab_pair_model() -> SourceModel:
    """Y = (A, B) — два честных бита, X = A."""
    y = Alphabet("Y", bit_strings(2))
    x = Alphabet("X", BINARY)
    probs = np.array([[0.25 if yy[0] == xx else 0.0 for yy in y.symbols] for xx in x.symbols])
    return SourceModel(make_joint([x, y], probs))


def ab_first_bit(model: Optional[SourceModel] = None) -> Statistic:
    y = (model or ab_pair_model()).y_axis
    return from_function(y, lambda s: s[0])


def ab_second_bit(model: Optional[SourceModel] = None) -> Statistic:
    y = (model or ab_pair_model()).y_axis
    return from_function(y, lambda s: s[1])


def binary_remote_model(side_flip: Optional[float] = None) -> SourceModel:
    """Z = X — честный бит, мера Хэмминга; Y константа либо Z через BSC(side_flip)."""
    x = Alphabet("X", BINARY)
    z = Alphabet("Z", BINARY)
    if side_flip is None:
        y = Alphabet("Y", ("0",))
        probs = np.zeros((2, 1, 2))
        probs[0, 0, 0] = probs[1, 0, 1] = 0.5
    else:
        y = Alphabet("Y", BINARY)
        probs = np.zeros((2, 2, 2))
        for b in range(2):
            probs[b, b, b] = 0.5 * (1 - side_flip)
            probs[b, 1 - b, b] = 0.5 * side_flip
    return SourceModel(make_joint([x, y, z], probs), z="Z")


def side_reveals_model() -> SourceModel:
    """Y = Z: сторонняя информация раскрывает удалённый источник."""
    x = Alphabet("X", BINARY)
    y = Alphabet("Y", BINARY)
    z = Alphabet("Z", BINARY)
    probs = np.zeros((2, 2, 2))
    for b in range(2):
        probs[b, b, b] = 0.4
        probs[1 - b, b, b] = 0.1
    return SourceModel(make_joint([x, y, z], probs), z="Z")


def remote_noise_model(noise: float = 0.3, side_flip: float = 0.25) -> SourceModel:
    """X = (Z, N) с N ⊥ Z; Y — Z через BSC(side_flip). Символ X — 'zn'."""
    x = Alphabet("X", bit_strings(2))
    y = Alphabet("Y", BINARY)
    z = Alphabet("Z", BINARY)
    probs = np.zeros((4, 2, 2))
    for i, s in enumerate(x.symbols):
        zb, nb = int(s[0]), int(s[1])
        p_n = noise if nb else 1 - noise
        for yb in range(2):
            p_y = 1 - side_flip if yb == zb else side_flip
            probs[i, yb, zb] = 0.5 * p_n * p_y
    return SourceModel(make_joint([x, y, z], probs), z="Z")


def z_component(model: SourceModel) -> Statistic:
    return from_function(model.x_axis, lambda s: s[0])


def noise_component(model: SourceModel) -> Statistic:
    return from_function(model.x_axis, lambda s: s[1])


BUILTIN_FAMILIES = {
    "fam_bin": fam_bin,
    "fam_dep": lambda: fam_dep_hci().family,
    "fam_dep2": lambda: fam_dep_hci(samples=2).family,
    "triangle_max": triangle_grid_family,
    "triangle_min": lambda: triangle_grid_family(1, MIN_GRID, MIN_THETAS),
    "generic": generic_family,
}

BUILTIN_SOURCES = {
    "ab_pair": ab_pair_model,
    "binary_remote": binary_remote_model,
    "side_reveals": side_reveals_model,
    "remote_noise": remote_noise_model,
}

BUILTIN_HCI = {
    "fam_dep": fam_dep_hci,
    "fam_dep2": lambda: fam_dep_hci(samples=2),
    "copy_w": copy_w_hci,
}
