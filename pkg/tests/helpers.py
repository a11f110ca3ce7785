"""Генераторы случайных малых моделей для свойств."""

import numpy as np

from app.services.model_core import Alphabet, ParamFamily, make_joint
from app.services.source_model import SourceModel


def random_joint(rng, sizes, names=None, sparsity=0.0):
    """Случайный совместный закон; доля sparsity ячеек обнуляется."""
    names = names or [f"A{i}" for i in range(len(sizes))]
    probs = rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes)
    if sparsity:
        mask = rng.random(sizes) < sparsity
        mask.flat[int(np.argmax(probs))] = False
        probs = np.where(mask, 0.0, probs)
        probs /= probs.sum()
    axes = [Alphabet(n, tuple(str(k) for k in range(s))) for n, s in zip(names, sizes)]
    return make_joint(axes, probs)


def random_family(rng, theta_size=2, obs_sizes=(3, 2)):
    cond = rng.dirichlet(np.ones(int(np.prod(obs_sizes))), size=theta_size).reshape((theta_size,) + tuple(obs_sizes))
    names = ["X", "Y", "Z"][: len(obs_sizes)]
    return ParamFamily(
        theta=Alphabet("theta", tuple(str(k) for k in range(theta_size))),
        prior=np.full(theta_size, 1.0 / theta_size),
        obs_axes=tuple(Alphabet(n, tuple(f"{n.lower()}{k}" for k in range(s))) for n, s in zip(names, obs_sizes)),
        cond=cond,
    )


def random_source(rng, nx=2, ny=3):
    return SourceModel(random_joint(rng, (nx, ny), ["X", "Y"]))
