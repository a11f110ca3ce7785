import numpy as np
import pytest

from app.errors import ErrorCode, WorkbenchError
from app.services.families import ab_first_bit, ab_second_bit
from app.services.rate_region import (
    ak_frontier,
    channel_rates,
    corner_point,
    deterministic_channel,
    hull_gap,
    lower_hull,
    pareto_filter,
    region_gap,
    sufficient_statistic_of_y,
    theorem6_compare,
    y_statistic_verdict,
)


class TestRates:
    def test_first_bit_channel(self, ab_pair):
        q = deterministic_channel(ab_first_bit(ab_pair), 2)
        r1, r2 = channel_rates(ab_pair.p_xy(), q)
        assert r1 == pytest.approx(0.0, abs=1e-12)
        assert r2 == pytest.approx(1.0)

    def test_constant_channel(self, ab_pair):
        q = np.zeros((4, 2))
        q[:, 0] = 1.0
        r1, r2 = channel_rates(ab_pair.p_xy(), q)
        assert r1 == pytest.approx(1.0)
        assert r2 == pytest.approx(0.0, abs=1e-12)


class TestCorner:
    def test_ab_pair_corner(self, ab_pair):
        assert corner_point(ab_pair) == pytest.approx(1.0, abs=1e-9)
        assert sufficient_statistic_of_y(ab_pair) == ab_first_bit(ab_pair)

    def test_frontier_reaches_corner(self, ab_pair):
        frontier = ak_frontier(ab_pair, 2, budget=200, seed=0)
        best = min(abs(r1) + abs(r2 - 1.0) for r1, r2 in frontier.points)
        assert best <= 1e-9
        assert frontier.stats["deterministic_maps"] > 0

    def test_card_too_large(self, ab_pair):
        with pytest.raises(WorkbenchError) as e:
            ak_frontier(ab_pair, 7, budget=1)
        assert e.value.code is ErrorCode.CARD_TOO_LARGE

    def test_invalid_budget(self, ab_pair):
        with pytest.raises(WorkbenchError) as e:
            ak_frontier(ab_pair, 2, budget=-1)
        assert e.value.code is ErrorCode.INVALID_CONFIG

    def test_frontier_is_pareto(self, ab_pair):
        frontier = ak_frontier(ab_pair, 3, budget=10, seed=1)
        r1 = [p[0] for p in frontier.points]
        r2 = [p[1] for p in frontier.points]
        assert r1 == sorted(r1)
        assert all(a > b for a, b in zip(r2, r2[1:]))

    def test_seed_is_deterministic(self, ab_pair):
        a = ak_frontier(ab_pair, 3, budget=5, seed=11)
        b = ak_frontier(ab_pair, 3, budget=5, seed=11)
        assert a.points == b.points


class TestHull:
    def test_pareto_filter(self):
        points = [(0.0, 1.0), (1.0, 0.0), (0.5, 0.6), (0.6, 0.7), (0.0, 1.2)]
        assert pareto_filter(points) == [0, 2, 1]

    def test_lower_hull_drops_point_above_chord(self):
        assert lower_hull([(0.0, 1.0), (1.0, 0.0), (0.5, 0.6)]) == [(0.0, 1.0), (1.0, 0.0)]

    def test_region_gap(self):
        hull = [(0.0, 1.0), (1.0, 0.0)]
        assert region_gap((0.5, 0.6), hull) == 0.0
        assert region_gap((0.5, 0.4), hull) == pytest.approx(0.05, abs=1e-9)

    def test_hull_gap_empty(self):
        assert hull_gap([], [(0.0, 1.0)]) == 0.0


class TestTheorem6:
    def test_first_bit_keeps_region(self, ab_pair):
        report, full, short = theorem6_compare(ab_pair, ab_first_bit(ab_pair), 3, budget=20, seed=0)
        assert report.precondition.holds
        assert report.max_gap <= 0.02
        assert report.lifted_gap <= 1e-9
        assert report.holds
        assert short.u_card <= 4

    def test_second_bit_rejected(self, ab_pair):
        with pytest.raises(WorkbenchError) as e:
            theorem6_compare(ab_pair, ab_second_bit(ab_pair), 2, budget=5)
        assert e.value.code is ErrorCode.PRECONDITION_FAILED

    def test_threshold_reaches_precondition(self, ab_pair):
        # I(X;Y|T) = 1 бит для второго бита, поэтому порог в 2 бита пропускает предусловие
        report, _, _ = theorem6_compare(ab_pair, ab_second_bit(ab_pair), 2, budget=2, seed=0, threshold=2.0)
        assert report.precondition.holds
        assert report.precondition.threshold_bits == 2.0

    def test_zero_threshold_is_not_replaced_by_default(self, ab_pair):
        with pytest.raises(WorkbenchError) as e:
            y_statistic_verdict(ab_pair, ab_first_bit(ab_pair), threshold=0.0)
        assert e.value.code is ErrorCode.INVALID_CONFIG
