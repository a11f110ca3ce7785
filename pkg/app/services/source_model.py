"""Модель источника для задач кодирования: p(x,y) или p(x,y,z) плюс мера искажения."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Mapping, Optional

import numpy as np

from app.errors import ErrorCode, WorkbenchError
from app.services.model_core import Alphabet, JointDistribution, as_alphabet, make_joint
from app.services.statistics_service import Statistic, push_forward

logger = logging.getLogger(__name__)

DEFAULT_ROLES = {"x": "X", "y": "Y", "z": "Z"}


def hamming(source: Alphabet, reproduction: Alphabet) -> np.ndarray:
    """d(z, ẑ) = 0 при совпадении символов, иначе 1."""
    return np.array(
        [[0.0 if s == r else 1.0 for r in reproduction.symbols] for s in source.symbols]
    )


@dataclass(frozen=True, eq=False)
class SourceModel:
    """Совместный закон и роли осей: X кодируется, Y — помощник/сторонняя информация, Z — удалённый источник."""

    dist: JointDistribution
    x: str = "X"
    y: str = "Y"
    z: Optional[str] = None
    distortion: Optional[np.ndarray] = None
    reproduction: Optional[Alphabet] = None

    def __post_init__(self) -> None:
        roles = [r for r in (self.x, self.y, self.z) if r is not None]
        if len(set(roles)) != len(roles):
            raise WorkbenchError(ErrorCode.AXIS_OVERLAP, f"роли осей совпадают: {roles}")
        for r in roles:
            self.dist.axis_index(r)
        if self.z is None:
            return

        z_axis = self.dist.axis(self.z)
        reproduction = self.reproduction or z_axis.renamed(f"{self.z}^")
        if not reproduction.symbols:
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, "пустой алфавит воспроизведения")
        if self.distortion is None:
            d = hamming(z_axis, reproduction)
        else:
            d = np.asarray(self.distortion, dtype=float)
        if d.shape != (z_axis.size, reproduction.size):
            raise WorkbenchError(
                ErrorCode.SHAPE_MISMATCH,
                f"таблица искажений формы {d.shape}, ожидалось {(z_axis.size, reproduction.size)}",
            )
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise WorkbenchError(ErrorCode.INVALID_CONFIG, "искажения должны быть конечными и неотрицательными")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "reproduction", reproduction)
        object.__setattr__(self, "distortion", d)

    @property
    def x_axis(self) -> Alphabet:
        return self.dist.axis(self.x)

    @property
    def y_axis(self) -> Alphabet:
        return self.dist.axis(self.y)

    @property
    def z_axis(self) -> Alphabet:
        if self.z is None:
            raise WorkbenchError(ErrorCode.UNKNOWN_AXIS, "у модели нет удалённого источника Z")
        return self.dist.axis(self.z)

    def p_xy(self) -> np.ndarray:
        return self.dist.tensor([self.x, self.y])

    def p_xyz(self) -> np.ndarray:
        return self.dist.tensor([self.x, self.y, self.z or ""])

    def _with(self, dist: JointDistribution) -> "SourceModel":
        return SourceModel(dist, self.x, self.y, self.z, self.distortion, self.reproduction)

    def reduce_x(self, t: Statistic) -> "SourceModel":
        """(T(X), Y, Z) с p(t,y,z) = Σ_{x: T(x)=t} p(x,y,z)."""
        return self._with(push_forward(self.dist, self.x, t))

    def reduce_y(self, t: Statistic) -> "SourceModel":
        return self._with(push_forward(self.dist, self.y, t))


def source_from_spec(spec: Mapping[str, Any]) -> SourceModel:
    """Модель источника из описания {axes, probs, roles?, distortion?, reproduction?}."""
    roles = dict(DEFAULT_ROLES)
    roles.update(spec.get("roles") or {})
    dist = make_joint(spec["axes"], spec["probs"])
    z = roles["z"] if roles.get("z") in dist.names else None
    reproduction = spec.get("reproduction")
    model = SourceModel(
        dist=dist,
        x=roles["x"],
        y=roles["y"],
        z=z,
        distortion=spec.get("distortion"),
        reproduction=as_alphabet(reproduction, f"{z}^") if reproduction is not None else None,
    )
    logger.debug("[MODEL] модель источника: оси %s, Z=%s", list(dist.names), z)
    return model
