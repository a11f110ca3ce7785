import numpy as np
import pytest
from scipy.stats import multivariate_normal

from app.errors import ErrorCode, WorkbenchError
from app.services.qam_example import (
    QamConfig,
    energy_statistic,
    qam_constellation,
    qam_lr,
    qam_lr_from_magnitudes,
    qam_roc_compare,
)


class TestLikelihoodRatio:
    def test_zero_observation(self):
        # при x = 0 LR = Σ π_m (σ² / (r_m²·var_h + σ²))^k
        cfg = QamConfig(k=4)
        assert qam_lr(cfg, np.zeros(4)) == pytest.approx(1 / 16)

    def test_depends_only_on_magnitudes(self, rng):
        cfg = QamConfig(k=3, constellation=((1.0, 0.0, 0.5), (2.0, 1.0, 0.5)), noise_var=0.5)
        x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        rotated = x * np.exp(1j * rng.uniform(0, 2 * np.pi, 3))
        assert qam_lr(cfg, x) == pytest.approx(qam_lr(cfg, rotated), rel=1e-12)
        assert qam_lr(cfg, x) == pytest.approx(qam_lr_from_magnitudes(cfg, np.abs(x)), rel=1e-12)

    def test_matches_stacked_real_density(self, rng):
        cfg = QamConfig(k=2, constellation=((0.5, 0.0, 0.25), (1.5, 2.0, 0.75)), noise_var=0.8, fading_var=1.2)
        x = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        stacked = np.concatenate([x.real, x.imag])

        def density(var):
            return multivariate_normal(np.zeros(4), np.eye(4) * var / 2).pdf(stacked)

        h1 = sum(p * density(r ** 2 * cfg.fading_var + cfg.noise_var) for r, _, p in cfg.constellation)
        assert qam_lr(cfg, x) == pytest.approx(h1 / density(cfg.noise_var), rel=1e-10)

    def test_energy(self):
        assert energy_statistic([3 + 4j, 1j]) == pytest.approx(26.0)

    def test_length_mismatch(self):
        with pytest.raises(WorkbenchError) as e:
            qam_lr(QamConfig(k=4), np.zeros(3))
        assert e.value.code is ErrorCode.LENGTH_MISMATCH

    def test_nonfinite(self):
        with pytest.raises(WorkbenchError) as e:
            qam_lr_from_magnitudes(QamConfig(k=2), [1.0, np.inf])
        assert e.value.code is ErrorCode.NONFINITE_INPUT

    def test_constellation_probs(self):
        with pytest.raises(WorkbenchError) as e:
            QamConfig(constellation=((1.0, 0.0, 0.7),))
        assert e.value.code is ErrorCode.INVALID_CONFIG
        assert sum(p for _, _, p in qam_constellation(8)) == pytest.approx(1.0)


class TestRoc:
    def test_tables_identical(self):
        result = qam_roc_compare(QamConfig(k=4, seed=1), 500)
        assert result.identical
        assert result.max_lr_rel_diff <= 1e-12
        assert result.auc_full == pytest.approx(result.auc_reduced, abs=1e-4)
        assert result.auc_full > 0.5

    def test_pd_not_below_pfa(self):
        result = qam_roc_compare(QamConfig(k=4, seed=2), 500, [0.5, 1.0, 2.0])
        assert [r.threshold for r in result.rows] == [0.5, 1.0, 2.0]
        pfa = [r.pfa_full for r in result.rows]
        assert pfa == sorted(pfa, reverse=True)

    @pytest.mark.parametrize("taus", [[0.0, 1.0], [-1.0], []])
    def test_bad_thresholds(self, taus):
        with pytest.raises(WorkbenchError) as e:
            qam_roc_compare(QamConfig(), 10, taus)
        assert e.value.code is ErrorCode.INVALID_CONFIG
