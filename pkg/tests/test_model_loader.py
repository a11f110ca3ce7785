import json

import numpy as np
import pytest

from app.errors import ErrorCode, WorkbenchError
from app.services.families import fam_bin
from app.services.hci_service import verify_hci
from app.services.model_loader import (
    axis_alphabets,
    family_of,
    hci_of,
    load_model_file,
    load_statistics,
    source_of,
    statistic_from_spec,
)
from app.services.rate_region import corner_point


class TestModelFiles:
    def test_fam_bin_matches_builtin(self, models_dir):
        mf = load_model_file(models_dir / "fam_bin.json")
        assert mf.is_family
        np.testing.assert_allclose(family_of(mf).cond, fam_bin().cond, atol=1e-12)

    def test_named_statistics(self, models_dir):
        mf = load_model_file(models_dir / "fam_bin.json")
        count = statistic_from_spec(mf.statistics["count"], axis_alphabets(mf))
        assert count.partition_label() == "00|01,10|11"

    def test_fam_dep_hci_block(self, models_dir):
        h = hci_of(load_model_file(models_dir / "fam_dep.json"))
        first, second = verify_hci(h)
        assert first.holds and second.holds

    def test_source_file(self, models_dir):
        model = source_of(load_model_file(models_dir / "ab_pair.json"))
        assert corner_point(model) == pytest.approx(1.0)

    def test_remote_file_has_z(self, models_dir):
        model = source_of(load_model_file(models_dir / "remote_zn.json"))
        assert model.z == "Z"
        assert model.distortion.shape == (2, 2)

    def test_source_is_not_family(self, models_dir):
        with pytest.raises(WorkbenchError) as e:
            family_of(load_model_file(models_dir / "ab_pair.json"))
        assert e.value.code is ErrorCode.MODEL_FILE

    def test_cached(self, models_dir):
        assert load_model_file(models_dir / "fam_bin.json") is load_model_file(models_dir / "fam_bin.json")


class TestBadFiles:
    def test_missing(self, tmp_path):
        with pytest.raises(WorkbenchError) as e:
            load_model_file(tmp_path / "nope.json")
        assert e.value.code is ErrorCode.MODEL_FILE

    def test_not_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{axes:", encoding="utf-8")
        with pytest.raises(WorkbenchError) as e:
            load_model_file(path)
        assert e.value.code is ErrorCode.MODEL_FILE

    @pytest.mark.parametrize("body", [
        {"axes": 5},
        {"axes": [{"name": "X", "symbols": ["0", "1"]}], "probs": [0.5, 0.5], "colour": "red"},
    ])
    def test_schema(self, tmp_path, body):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(body), encoding="utf-8")
        with pytest.raises(WorkbenchError) as e:
            load_model_file(path)
        assert e.value.code is ErrorCode.MODEL_FILE
        assert e.value.details["errors"]

    def test_statistic_on_unknown_axis(self, tmp_path, models_dir):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"axis": "Q", "map": {"0": 0}}), encoding="utf-8")
        alphabets = axis_alphabets(load_model_file(models_dir / "fam_bin.json"))
        with pytest.raises(WorkbenchError) as e:
            load_statistics(path, alphabets)
        assert e.value.code is ErrorCode.DOMAIN_MISMATCH

    def test_single_statistic_named_by_file(self, tmp_path, models_dir):
        path = tmp_path / "halves.json"
        path.write_text(json.dumps({"axis": "X", "map": {"00": "a", "01": "a", "10": "b", "11": "b"}}), encoding="utf-8")
        alphabets = axis_alphabets(load_model_file(models_dir / "fam_bin.json"))
        stats = load_statistics(path, alphabets)
        assert list(stats) == ["halves"]
        assert stats["halves"].labels == (0, 0, 1, 1)
