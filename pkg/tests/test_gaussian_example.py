import numpy as np
import pytest

from app.errors import ErrorCode, WorkbenchError
from app.services.gaussian_example import (
    FULL,
    REDUCED,
    GaussianHciConfig,
    gaussian_mc_mse,
    gaussian_posterior,
    posterior_agreement,
)


class TestPosterior:
    def test_sums_reproduce_full_posterior(self):
        cfg = GaussianHciConfig(n=3, rho=0.4, prior_mean=0.5, prior_var=2.0)
        x, y = [0.1, 1.2, -0.3], [0.7, 0.0, 2.5]
        mean_f, var_f = gaussian_posterior(cfg, x, y, FULL)
        mean_r, var_r = gaussian_posterior(cfg, x, y, REDUCED)
        assert mean_f == pytest.approx(mean_r, abs=1e-10)
        assert var_f == pytest.approx(var_r, abs=1e-10)

    def test_random_configurations_agree(self):
        agreement = posterior_agreement(200, seed=3)
        assert agreement.configs == 200
        assert agreement.max_diff <= 1e-10

    def test_posterior_shrinks_with_data(self):
        small = gaussian_posterior(GaussianHciConfig(n=1), [0.0], [0.0])[1]
        large = gaussian_posterior(GaussianHciConfig(n=6), np.zeros(6), np.zeros(6))[1]
        assert large < small < 1.0

    def test_length_mismatch(self):
        with pytest.raises(WorkbenchError) as e:
            gaussian_posterior(GaussianHciConfig(n=3), [0.0, 1.0], [0.0, 1.0, 2.0])
        assert e.value.code is ErrorCode.LENGTH_MISMATCH

    def test_nonfinite(self):
        with pytest.raises(WorkbenchError) as e:
            gaussian_posterior(GaussianHciConfig(n=2), [0.0, np.nan], [0.0, 1.0])
        assert e.value.code is ErrorCode.NONFINITE_INPUT

    @pytest.mark.parametrize("kwargs", [{"rho": 1.0}, {"rho": 0.0}, {"n": 0}, {"prior_var": 0.0}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(WorkbenchError) as e:
            GaussianHciConfig(**kwargs)
        assert e.value.code is ErrorCode.INVALID_CONFIG


class TestMonteCarlo:
    def test_mse_within_noise(self):
        result = gaussian_mc_mse(GaussianHciConfig(n=3, rho=0.5, seed=5), 2000)
        assert result.within_noise
        assert result.mse_full == pytest.approx(result.posterior_var, rel=0.15)

    def test_trials_reproducible(self):
        cfg = GaussianHciConfig(seed=9)
        a = gaussian_mc_mse(cfg, 50)
        b = gaussian_mc_mse(cfg, 50)
        assert a == b
