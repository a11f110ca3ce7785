"""Свойства на случайных малых моделях."""

import itertools

import numpy as np
import pytest

from app.config import FRONTIER_SEARCH_TOL
from app.services.hci_service import hci_from_channels, lemma1_check
from app.services.model_core import (
    Alphabet,
    condition,
    conditional_mutual_information,
    entropy,
    extend_with_channel,
    joint,
    marginal,
    mutual_information,
    product_alphabet,
)
from app.services.rate_region import ak_frontier, corner_point
from app.services.remote_rd import DISTORTION_SLACK, conditional_remote_rd, convexity_defect, distortion_range
from app.services.source_model import SourceModel
from app.services.statistics_service import (
    attach,
    canonicalize,
    enumerate_partitions,
    from_labels,
    identity,
    is_coarsening,
    product,
    push_forward,
)
from app.services.sufficiency_service import is_sufficient, minimal_sufficient

from tests.helpers import random_family, random_joint, random_source

SEEDS = range(100)


def _random_statistic(rng, domain, max_classes=3):
    return from_labels(domain, rng.integers(0, max_classes, size=domain.size))


def _axes(size, names):
    return [Alphabet(n, tuple(f"{n.lower()}{k}" for k in range(size))) for n in names]


# -----------------------------
#     СОВМЕСТНЫЕ ЗАКОНЫ И ИНФОРМАЦИЯ
# -----------------------------


@pytest.mark.parametrize("seed", SEEDS)
def test_chain_rule(seed):
    d = random_joint(np.random.default_rng(seed), (2, 3, 2), ["A", "B", "C"], sparsity=0.3)
    left = mutual_information(d, "A", ["B", "C"])
    right = mutual_information(d, "A", "C") + conditional_mutual_information(d, "A", "B", "C")
    assert left == pytest.approx(right, abs=1e-12)
    assert entropy(d, ["A", "B"]) <= entropy(d, "A") + entropy(d, "B") + 1e-12


@pytest.mark.parametrize("seed", SEEDS)
def test_data_processing(seed):
    rng = np.random.default_rng(seed)
    d = random_joint(rng, (3, 4), ["A", "B"])
    channel = rng.dirichlet(np.ones(3), size=4)
    chain = extend_with_channel(d, "B", channel, [Alphabet("C", ("0", "1", "2"))])
    assert conditional_mutual_information(chain, "A", "C", "B") <= 1e-12
    assert mutual_information(chain, "A", "C") <= mutual_information(chain, "A", "B") + 1e-12


@pytest.mark.parametrize("seed", SEEDS)
def test_marginal_and_condition_commute(seed):
    rng = np.random.default_rng(seed)
    d = random_joint(rng, (2, 3, 2), ["A", "B", "C"])
    value = str(rng.integers(0, 2))
    left = marginal(condition(d, "A", value), "B")
    right = condition(marginal(d, ["A", "B"]), "A", value)
    assert left.names == right.names == ("B",)
    np.testing.assert_allclose(left.probs, right.probs, rtol=0, atol=1e-12)


# -----------------------------
#     СТАТИСТИКИ
# -----------------------------


@pytest.mark.parametrize("seed", SEEDS)
def test_push_forward_keeps_mass(seed):
    rng = np.random.default_rng(seed)
    d = random_joint(rng, (2, 4, 3), ["A", "B", "C"], sparsity=0.2)
    t = _random_statistic(rng, d.axis("B"))
    moved = push_forward(d, "B", t)
    assert moved.axis("B").size == t.num_classes
    assert float(moved.probs.sum()) == pytest.approx(float(d.probs.sum()), abs=1e-15)
    np.testing.assert_allclose(marginal(moved, ["A", "C"]).probs, marginal(d, ["A", "C"]).probs, atol=1e-15)


@pytest.mark.parametrize("seed", SEEDS)
def test_canonicalize_is_idempotent(seed):
    rng = np.random.default_rng(seed)
    (domain,) = _axes(6, ["X"])
    raw = {s: f"c{rng.integers(0, 4)}" for s in domain.symbols}
    once = canonicalize(domain, raw)
    twice = canonicalize(domain, dict(zip(domain.symbols, once.labels)))
    assert twice == once


@pytest.mark.parametrize("seed", SEEDS)
def test_product_is_associative(seed):
    rng = np.random.default_rng(seed)
    ta, tb, tc = (_random_statistic(rng, a) for a in _axes(3, ["A", "B", "C"]))
    left = product(product(ta, tb), tc)
    right = product(ta, product(tb, tc))
    assert left.domain.symbols == right.domain.symbols
    assert left.labels == right.labels


@pytest.mark.parametrize("size", [1, 2, 3, 4])
def test_coarsening_is_partial_order(size):
    (domain,) = _axes(size, ["X"])
    parts = list(enumerate_partitions(domain))
    for t in parts:
        assert is_coarsening(t, t)
    for t, u in itertools.product(parts, repeat=2):
        if is_coarsening(t, u) and is_coarsening(u, t):
            assert t == u
    for t, u, v in itertools.product(parts, repeat=3):
        if is_coarsening(t, u) and is_coarsening(u, v):
            assert is_coarsening(t, v)


@pytest.mark.parametrize("seed", SEEDS)
def test_coarsening_order_on_six_symbols(seed):
    rng = np.random.default_rng(seed)
    (domain,) = _axes(6, ["X"])
    finest = identity(domain)
    t, u, v = (_random_statistic(rng, domain, max_classes=4) for _ in range(3))
    # тройка t ⪯ t·u ⪯ t·u·v по построению
    tu = from_labels(domain, list(zip(t.labels, u.labels)))
    tuv = from_labels(domain, list(zip(t.labels, u.labels, v.labels)))
    assert is_coarsening(t, tu) and is_coarsening(tu, tuv) and is_coarsening(t, tuv)
    assert is_coarsening(tuv, finest)
    for a, b in itertools.product((t, u, v, tu, tuv), repeat=2):
        assert (is_coarsening(a, b) and is_coarsening(b, a)) == (a == b)


@pytest.mark.parametrize("seed", SEEDS)
def test_statistic_data_processing(seed):
    rng = np.random.default_rng(seed)
    fam = random_family(rng, 3, (5,))
    t = _random_statistic(rng, fam.obs_axis("X"))
    d = attach(joint(fam), "X", t, "T")
    assert mutual_information(d, "theta", "T") <= mutual_information(d, "theta", "X") + 1e-9


# -----------------------------
#     ДОСТАТОЧНОСТЬ И HCI
# -----------------------------


@pytest.mark.parametrize("seed", SEEDS)
def test_minimal_statistic_is_coarsest(seed):
    fam = random_family(np.random.default_rng(seed), 2, (4,))
    stat = minimal_sufficient(fam, "X")
    assert is_sufficient(fam, stat).holds
    for t in enumerate_partitions(stat.domain):
        if t.num_classes < stat.num_classes:
            assert not is_sufficient(fam, t).holds


def _random_hci(rng):
    theta = Alphabet("theta", ("0", "1", "2"))
    w = Alphabet("W", ("w0", "w1", "w2"))
    p_w = rng.dirichlet(np.ones(3), size=3)
    p_obs = rng.dirichlet(np.ones(4), size=3).reshape(3, 2, 2)
    obs = _axes(2, ["X", "Y"])
    return hci_from_channels(theta, rng.dirichlet(np.ones(3)), w, p_w, obs, p_obs)


@pytest.mark.parametrize("seed", SEEDS)
def test_lemma1_on_random_hci(seed):
    rng = np.random.default_rng(seed)
    h = _random_hci(rng)
    domain = product_alphabet(h.family.obs_axes)
    report = lemma1_check(h, _random_statistic(rng, domain))
    assert report.premise("theta_w_obs").holds
    assert report.consistent
    assert report.extra["bound_ok"]
    full = lemma1_check(h, identity(domain))
    assert full.premises_hold and full.conclusion.holds


# -----------------------------
#     КОДИРОВАНИЕ ИСТОЧНИКОВ
# -----------------------------


@pytest.mark.parametrize("seed", SEEDS)
def test_frontier_points_are_achieved(seed):
    model = random_source(np.random.default_rng(seed), 2, 3)
    frontier = ak_frontier(model, 3, budget=4, seed=seed, lambda_step=0.25)
    h_x_given_y = entropy(model.dist, ["X", "Y"]) - entropy(model.dist, "Y")
    u = Alphabet("U", tuple(f"u{k}" for k in range(frontier.u_card)))
    for (r1, r2), q in zip(frontier.points, frontier.channels):
        d = extend_with_channel(model.dist, "Y", q, [u])
        assert entropy(d, ["X", "U"]) - entropy(d, "U") == pytest.approx(r1, abs=1e-9)
        assert mutual_information(d, "Y", "U") == pytest.approx(r2, abs=1e-9)
        assert conditional_mutual_information(d, "X", "U", "Y") <= 1e-12
        assert r1 >= h_x_given_y - 1e-9
        assert r2 >= 0.0


@pytest.mark.parametrize("seed", SEEDS)
def test_corner_point_bounds_frontier(seed):
    model = random_source(np.random.default_rng(seed), 2, 3)
    frontier = ak_frontier(model, 3, budget=4, seed=seed, lambda_step=0.25)
    h_x_given_y = entropy(model.dist, ["X", "Y"]) - entropy(model.dist, "Y")
    corner = corner_point(model)
    for r1, r2 in frontier.points:
        if r1 <= h_x_given_y + 1e-6:
            assert r2 >= corner - FRONTIER_SEARCH_TOL


@pytest.mark.parametrize("seed", SEEDS)
def test_rd_curve_is_convex_and_nonincreasing(seed):
    d = random_joint(np.random.default_rng(seed), (2, 2, 2), ["X", "Y", "Z"])
    model = SourceModel(d, z="Z")
    d_min, d_max = distortion_range(model)
    span = d_max - d_min
    if span < 1e-3:
        pytest.skip("вырожденный диапазон искажений")
    grid = np.linspace(d_min + 0.1 * span, d_max, 5)
    points = conditional_remote_rd(model, grid, monotone=False).points
    rates = np.array([p.rate_bits for p in points])
    assert np.all(rates >= 0)
    assert np.all(np.diff(rates) <= 1e-9)
    assert convexity_defect(points) <= 1e-3
    assert rates[-1] == 0.0
    for p in points[:-1]:
        assert abs(p.achieved_distortion - p.distortion) <= DISTORTION_SLACK
