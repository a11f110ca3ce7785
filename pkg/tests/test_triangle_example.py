import numpy as np
import pytest

from app.errors import ErrorCode, WorkbenchError
from app.services.triangle_example import TriangleConfig, ratio_is_constant, triangle_density, triangle_ratio_check


class TestDensity:
    def test_inside_and_outside(self):
        assert triangle_density([0.6, 0.9], [0.2, 0.5], 0.1) == 4.0
        assert triangle_density([0.6, 1.2], [0.2, 0.5], 0.1) == 0.0
        assert triangle_density([0.6], [0.7], 0.1) == 0.0

    def test_ratio_needs_same_support(self):
        assert ratio_is_constant(np.array([4.0, 4.0, 0.0]), np.array([2.0, 2.0, 0.0]))
        assert not ratio_is_constant(np.array([4.0, 4.0, 0.0]), np.array([4.0, 0.0, 0.0]))


class TestRatioClasses:
    def test_classes_follow_max_and_min(self):
        report = triangle_ratio_check(TriangleConfig(n=2, seed=4), 200)
        assert report.holds
        assert report.equal_max > 0
        assert report.different_min > 0

    def test_single_sample(self):
        assert triangle_ratio_check(TriangleConfig(n=1, theta_values=(0.0, 0.3)), 50).holds

    def test_empty_common_support(self):
        with pytest.raises(WorkbenchError) as e:
            triangle_ratio_check(TriangleConfig(theta_values=(0.0, 1.5)), 10)
        assert e.value.code is ErrorCode.EMPTY_COMMON_SUPPORT

    def test_needs_two_thetas(self):
        with pytest.raises(WorkbenchError) as e:
            triangle_ratio_check(TriangleConfig(theta_values=(0.0,)), 10)
        assert e.value.code is ErrorCode.INVALID_CONFIG
