import numpy as np
import pytest

from app.errors import ErrorCode, WorkbenchError
from app.services.families import (
    MAX_GRID,
    MAX_THETAS,
    MIN_GRID,
    MIN_THETAS,
    count_statistic,
    extreme_statistic,
    fam_dep_hci,
    generic_family,
    parity_statistic,
    triangle_grid_family,
)
from app.services.model_core import joint
from app.services.statistics_service import constant, enumerate_partitions, identity, product
from app.services.sufficiency_service import (
    check_markov,
    completing_statistics,
    factorization_verdict,
    is_conditionally_sufficient,
    is_sufficient,
    minimal_conditional_sufficient,
    minimal_sufficient,
    ratio_partition,
    theorem2_check,
    verify_minimality,
)


class TestFamBin:
    def test_count_is_sufficient(self, fam):
        v = is_sufficient(fam, count_statistic(fam.obs_axis("X")))
        assert v.holds
        assert v.cmi_bits <= 1e-9

    def test_parity_is_not(self, fam):
        v = is_sufficient(fam, parity_statistic(fam.obs_axis("X")))
        assert not v.holds
        assert v.cmi_bits > 0.1
        assert v.witness is not None

    def test_identity_always_sufficient(self, fam):
        assert is_sufficient(fam, identity(fam.obs_axis("X"))).holds

    def test_minimal_partition(self, fam):
        assert minimal_sufficient(fam, "X").partition_label() == "00|01,10|11"

    def test_minimal_is_unique_coarsest(self, fam):
        stat = minimal_sufficient(fam, "X")
        rows = verify_minimality(fam, stat, list(enumerate_partitions(stat.domain)))
        assert len(rows) == 15
        assert all(r["ok"] for r in rows)
        coarsest = [r for r in rows if r["sufficient"] and r["candidate"] == stat.partition_label()]
        assert len(coarsest) == 1
        # достаточны только count и тождественная статистика
        assert sum(r["sufficient"] for r in rows) == 2

    def test_invalid_threshold(self, fam):
        with pytest.raises(WorkbenchError) as e:
            is_sufficient(fam, identity(fam.obs_axis("X")), threshold=0.0)
        assert e.value.code is ErrorCode.INVALID_CONFIG


class TestMarkov:
    def test_fam_dep_chain(self, dep2):
        d = joint(dep2.family)
        # X и Y зависимы через W, поэтому X − θ − Y нарушена слабо, но нарушена
        v = check_markov(d, "X", "theta", "Y")
        assert not v.holds
        assert v.chain == "X - theta - Y"

    def test_threshold_respected(self, dep2):
        d = joint(dep2.family)
        exact = check_markov(d, "X", "theta", "Y")
        loose = check_markov(d, "X", "theta", "Y", threshold=exact.cmi_bits * 2)
        assert loose.holds


class TestConditional:
    def test_needs_two_axes(self, fam):
        with pytest.raises(WorkbenchError) as e:
            is_conditionally_sufficient(fam, identity(fam.obs_axis("X")), "Y")
        assert e.value.code is ErrorCode.DOMAIN_MISMATCH

    def test_overlap_rejected(self, dep2):
        x = dep2.family.obs_axis("X")
        with pytest.raises(WorkbenchError) as e:
            is_conditionally_sufficient(dep2.family, identity(x), "X")
        assert e.value.code is ErrorCode.DOMAIN_MISMATCH

    def test_constant_is_conditionally_sufficient_when_y_reveals_theta(self):
        # Y совпадает с θ: X при известном Y ничего не добавляет
        h = fam_dep_hci(samples=1, flip=0.0, q=(0.0, 1.0))
        fam = h.family
        assert is_conditionally_sufficient(fam, constant(fam.obs_axis("X")), "Y").holds

    def test_constant_fails_on_single_bit_dependent_family(self):
        # X один бит: константа отбрасывает всё, а X несёт сведения о θ сверх Y
        fam = fam_dep_hci(samples=1).family
        verdict = is_conditionally_sufficient(fam, constant(fam.obs_axis("X")), "Y")
        assert not verdict.holds
        assert verdict.cmi_bits > 1e-3


class TestTriangleGrid:
    @pytest.mark.parametrize("n", [1, 2])
    def test_max_family_recovers_max_partition(self, n):
        fam = triangle_grid_family(n, MAX_GRID, MAX_THETAS)
        found = minimal_conditional_sufficient(fam, "X", "Y")
        assert found == extreme_statistic(fam, "X", use_max=True)
        assert is_conditionally_sufficient(fam, found, "Y").holds

    @pytest.mark.parametrize("n", [1, 2])
    def test_min_family_recovers_min_partition(self, n):
        fam = triangle_grid_family(n, MIN_GRID, MIN_THETAS)
        found = minimal_conditional_sufficient(fam, "Y", "X")
        assert found == extreme_statistic(fam, "Y", use_max=False)
        assert is_conditionally_sufficient(fam, found, "X").holds

    def test_pair_max_partition_keeps_null_class(self):
        # при n=2 точки с координатой на нижнем краю сетки недостижимы ни при каком y
        fam = triangle_grid_family(2, MAX_GRID, MAX_THETAS)
        found = minimal_conditional_sufficient(fam, "X", "Y")
        assert found.num_classes == 6

    def test_coarse_theta_set_still_sufficient(self):
        grid = tuple((k + 0.5) / 6 for k in range(6))
        fam = triangle_grid_family(1, grid, (0.0, 1 / 6))
        found = minimal_conditional_sufficient(fam, "X", "Y")
        assert is_conditionally_sufficient(fam, found, "Y").holds

    def test_empty_support_rejected(self):
        with pytest.raises(WorkbenchError) as e:
            triangle_grid_family(1, MAX_GRID, (5.0,))
        assert e.value.code is ErrorCode.INVALID_CONFIG


class TestRatioPartition:
    def test_zero_row_gets_own_class(self, fam):
        vectors = np.array([[0.0, 0.0], [0.2, 0.4], [0.1, 0.2], [0.3, 0.1]])
        stat = ratio_partition(fam.obs_axis("X"), vectors)
        assert stat.labels == (0, 1, 1, 2)
        assert stat.classes()[0] == ["00"]

    def test_support_must_match(self, fam):
        vectors = np.array([[0.1, 0.0], [0.2, 0.1], [0.3, 0.0], [0.1, 0.1]])
        stat = ratio_partition(fam.obs_axis("X"), vectors)
        assert stat.labels == (0, 1, 0, 2)


class TestTheorem2:
    def test_counts_are_globally_sufficient(self, dep2):
        fam = dep2.family
        report = theorem2_check(fam, count_statistic(fam.obs_axis("X")), count_statistic(fam.obs_axis("Y")))
        assert report.conclusion.holds
        assert report.extra["factorization"].holds
        assert report.extra["agree"]

    def test_parity_breaks_both_views(self, dep2):
        fam = dep2.family
        report = theorem2_check(fam, parity_statistic(fam.obs_axis("X")), count_statistic(fam.obs_axis("Y")))
        assert not report.conclusion.holds
        assert not report.extra["factorization"].holds
        assert report.extra["agree"]

    def test_local_precondition(self, dep2):
        fam = dep2.family
        with pytest.raises(WorkbenchError) as e:
            theorem2_check(fam, count_statistic(fam.obs_axis("X")), parity_statistic(fam.obs_axis("Y")))
        assert e.value.code is ErrorCode.PRECONDITION_FAILED

    def test_factorization_matches_cmi_on_generic_family(self):
        fam = generic_family()
        ty = identity(fam.obs_axis("Y"))
        for tx in enumerate_partitions(fam.obs_axis("X")):
            direct = is_sufficient(fam, product(tx, ty))
            assert direct.holds == factorization_verdict(fam, tx, ty).holds

    def test_generic_family_needs_identity(self):
        fam = generic_family()
        found = completing_statistics(fam, identity(fam.obs_axis("Y")), "X")
        assert [t.labels for t in found] == [identity(fam.obs_axis("X")).labels]
