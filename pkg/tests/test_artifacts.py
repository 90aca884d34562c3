import numpy as np
import pandas as pd
import pytest

from glassceiling import __version__
from glassceiling.artifacts import (
    load_logit_params,
    read_frame,
    read_manifest,
    write_frame,
    write_logit_params,
    write_manifest,
)
from glassceiling.spsa_optimizer import GroupSpace, LogitParams


def test_manifest_bytes_are_deterministic(tmp_path):
    payload = {"config": {"b": 2, "a": 1}, "alpha": 1.3}
    first = write_manifest(tmp_path / "one", "measure", payload).read_bytes()
    second = write_manifest(tmp_path / "two", "measure", dict(reversed(list(payload.items())))).read_bytes()
    assert first == second
    assert first.endswith(b"\n")
    manifest = read_manifest(tmp_path / "one")
    assert manifest["version"] == __version__
    assert manifest["command"] == "measure"


def test_frame_round_trip_is_exact(tmp_path):
    frame = pd.DataFrame({"alpha": [0.6, 1.3], "r": [1 / 3, np.pi]})
    write_frame(tmp_path, "sweep", frame)
    pd.testing.assert_frame_equal(read_frame(tmp_path, "sweep"), frame)
    assert "\r" not in (tmp_path / "sweep.csv").read_text()


def test_logit_params_round_trip(tmp_path):
    params = LogitParams(GroupSpace(2), np.random.default_rng(3).standard_normal(36))
    path = write_logit_params(tmp_path, params)
    restored = load_logit_params(path)
    assert restored.space == params.space
    assert np.array_equal(restored.theta, params.theta)


def test_theta_file_with_mask(tmp_path):
    params = LogitParams.uniform(GroupSpace(0))
    mask = np.array([True, False, False, True])
    frame = read_frame(tmp_path, write_logit_params(tmp_path, params, mask).stem)
    assert frame["prob"].tolist() == [0.5, 0.0, 0.0, 0.5]


def test_theta_file_needs_columns(tmp_path):
    path = tmp_path / "theta.csv"
    pd.DataFrame({"class_index": [0], "theta": [0.0]}).to_csv(path, index=False)
    with pytest.raises(ValueError, match="missing columns"):
        load_logit_params(path)
