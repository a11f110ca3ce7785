import numpy as np
import pytest

from app.errors import ErrorCode, WorkbenchError
from app.services.families import copy_w_hci, count_statistic, fam_bin, observed_w_hci, parity_statistic
from app.services.hci_service import HciModel, lemma1_check, theorem1_check, verify_hci
from app.services.model_core import Alphabet
from app.services.statistics_service import identity, product


class TestVerify:
    def test_fam_dep_is_hci(self, dep2):
        first, second = verify_hci(dep2)
        assert first.holds
        assert second.holds

    def test_copy_w_breaks_conditional_independence(self):
        first, second = verify_hci(copy_w_hci())
        assert first.holds
        assert not second.holds
        assert second.cmi_bits > 0.1

    def test_w_is_whole_observation(self, dep2):
        h = observed_w_hci(dep2.family)
        assert h.w.size == 16
        first, second = verify_hci(h)
        assert first.holds
        assert second.holds
        assert second.cmi_bits <= 1e-12

    def test_composition_mismatch(self, dep2):
        uniform = np.full((2, 4, 4), 1 / 16)
        h = HciModel(dep2.family, dep2.w, dep2.p_w_given_theta, uniform)
        with pytest.raises(WorkbenchError) as e:
            verify_hci(h)
        assert e.value.code is ErrorCode.COMPOSITION_MISMATCH

    def test_w_name_taken(self, dep2):
        with pytest.raises(WorkbenchError) as e:
            HciModel(dep2.family, Alphabet("X", ("0", "1")), dep2.p_w_given_theta, dep2.p_obs_given_w)
        assert e.value.code is ErrorCode.AXIS_OVERLAP

    def test_channel_rows_checked(self, dep2):
        with pytest.raises(WorkbenchError) as e:
            HciModel(dep2.family, dep2.w, [[0.9, 0.2], [0.1, 0.9]], dep2.p_obs_given_w)
        assert e.value.code is ErrorCode.NORMALIZATION


class TestLemma1:
    def test_counts_suffice_for_w_and_theta(self, dep2):
        fam = dep2.family
        t = product(count_statistic(fam.obs_axis("X")), count_statistic(fam.obs_axis("Y")))
        report = lemma1_check(dep2, t)
        assert report.premises_hold
        assert report.conclusion.holds
        assert report.extra["bound_ok"]

    def test_observed_w_bound(self):
        # W совпадает с наблюдением: count не достаточна для W, но достаточна для θ
        h = observed_w_hci(fam_bin())
        report = lemma1_check(h, count_statistic(h.family.obs_axis("X")))
        assert not report.premise("w_t_obs").holds
        assert report.conclusion.holds
        assert report.extra["bound_ok"]
        assert report.consistent

    def test_partial_statistic_rejected(self, dep2):
        with pytest.raises(WorkbenchError) as e:
            lemma1_check(dep2, count_statistic(dep2.family.obs_axis("X")))
        assert e.value.code is ErrorCode.DOMAIN_MISMATCH


class TestTheorem1:
    def test_counts(self, dep2):
        fam = dep2.family
        report = theorem1_check(
            dep2, identity(dep2.w), count_statistic(fam.obs_axis("X")), count_statistic(fam.obs_axis("Y")),
        )
        assert report.premises_hold
        assert report.extra["global_for_tw"].holds
        assert report.conclusion.holds
        assert report.consistent

    def test_parity_fails_locally_and_globally(self, dep2):
        fam = dep2.family
        report = theorem1_check(
            dep2, identity(dep2.w), parity_statistic(fam.obs_axis("X")), count_statistic(fam.obs_axis("Y")),
        )
        assert not report.premise("local_x").holds
        assert report.premise("local_y").holds
        assert not report.conclusion.holds
        assert report.conclusion.cmi_bits > 1e-3

    def test_tw_on_wrong_alphabet(self, dep2):
        x = dep2.family.obs_axis("X")
        with pytest.raises(WorkbenchError) as e:
            theorem1_check(dep2, identity(x), identity(x), identity(dep2.family.obs_axis("Y")))
        assert e.value.code is ErrorCode.DOMAIN_MISMATCH

    def test_overlapping_statistics(self, dep2):
        x = dep2.family.obs_axis("X")
        with pytest.raises(WorkbenchError) as e:
            theorem1_check(dep2, identity(dep2.w), count_statistic(x), parity_statistic(x))
        assert e.value.code is ErrorCode.AXIS_OVERLAP
