import json

import numpy as np
import pytest

from robustkalman import NonlinearSSM, build_preset
from robustkalman.cli import main
from robustkalman.config import (contamination_from_config,
                                 contamination_to_config, model_from_config,
                                 model_to_config)
from robustkalman.contamination import (BlockSignal, CauchyDist,
                                        ContaminationSpec, MultivariateCauchy)


class TestCliBasics:
    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 64

    def test_unknown_command_is_usage_error(self):
        assert main(["frobnicate"]) == 64

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert "0.1.0" in capsys.readouterr().out

    def test_missing_model_is_config_error(self, tmp_path):
        assert main(["simulate", "--out", str(tmp_path / "x.csv")]) == 1

    def test_broken_config_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["simulate", "--config", str(bad),
                     "--out", str(tmp_path / "x.csv")]) == 1


class TestSimulateFilterSmooth:
    def test_chain(self, tmp_path):
        traj = tmp_path / "traj.csv"
        assert main(["simulate", "--preset", "simb", "--T", "40",
                     "--seed", "7", "--regime", "io", "--out", str(traj)]) == 0
        header = open(traj).readline().strip().split(",")
        assert header[:3] == ["t", "y_1", "y_2"]
        assert len(open(traj).read().splitlines()) == 41

        states = tmp_path / "states.csv"
        assert main(["filter", "--preset", "simb", "--variant", "rls-io",
                     "--r", "0.1", "--in", str(traj), "--out", str(states)]) == 0
        got = open(states).read().splitlines()
        assert got[0].startswith("t,x_pred_1")
        assert len(got) == 41

        smoothed = tmp_path / "smooth.csv"
        assert main(["smooth", "--preset", "simb", "--variant", "rls-io",
                     "--r", "0.1", "--in", str(traj), "--out", str(smoothed)]) == 0
        assert open(smoothed).readline().startswith("t,x_smooth_1")

    def test_missing_cells_handled(self, tmp_path):
        obs = tmp_path / "obs.csv"
        obs.write_text("t,y_1\n1,0.5\n2,\n3,1.5\n")
        out = tmp_path / "states.csv"
        assert main(["filter", "--preset", "sima", "--in", str(obs),
                     "--out", str(out)]) == 0
        rows = open(out).read().splitlines()
        # missing step: blank innovation norm, estimate equals prediction
        cells = rows[2].split(",")
        assert cells[1] == cells[2]
        assert cells[-2] == ""

    def test_robust_without_height_is_config_error(self, tmp_path):
        obs = tmp_path / "obs.csv"
        obs.write_text("t,y_1\n1,0.5\n")
        assert main(["filter", "--preset", "sima", "--variant", "rls-ao",
                     "--in", str(obs), "--out", str(tmp_path / "o.csv")]) == 1


class TestCalibrateCommand:
    def test_radius_heights_monotone(self, tmp_path):
        outs = {}
        for r in ("0.1", "0.5"):
            path = tmp_path / f"cal{r}.json"
            assert main(["calibrate", "--preset", "sima", "--criterion",
                         "radius", "--r", r, "--mc-size", "50000",
                         "--out", str(path)]) == 0
            outs[r] = json.load(open(path))
        assert outs["0.1"]["b"][-1] > outs["0.5"]["b"][-1]
        assert outs["0.1"]["criterion"] == "radius"

    def test_efficiency_needs_delta(self):
        assert main(["calibrate", "--preset", "sima",
                     "--criterion", "efficiency"]) == 1


class TestBenchCommand:
    def test_end_to_end_and_determinism(self, tmp_path):
        args = ["bench", "--preset", "sima", "--runs", "120", "--seed", "42",
                "--regimes", "ideal,io"]
        assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
        assert main(args + ["--threads", "3",
                            "--out", str(tmp_path / "b.csv")]) == 0
        assert open(tmp_path / "a.csv", "rb").read() == \
            open(tmp_path / "b.csv", "rb").read()
        assert open(tmp_path / "a_raw.csv", "rb").read() == \
            open(tmp_path / "b_raw.csv", "rb").read()

    def test_json_format(self, tmp_path):
        out = tmp_path / "rep.json"
        assert main(["bench", "--preset", "sima", "--runs", "40",
                     "--regimes", "ideal", "--format", "json",
                     "--out", str(out)]) == 0
        payload = json.load(open(out))
        assert payload["model"] == "sima"

    def test_config_file_drives_bench(self, tmp_path):
        cfg = {
            "model": {"preset": "sima"},
            "seed": 5,
            "horizon": 30,
            "contamination": {
                "r_ao": 0.1, "r_io": 0.1,
                "dist_ao": {"kind": "cauchy", "loc": 5.0, "scale": 1.0},
                "dist_io": {"kind": "cauchy", "loc": -10.0, "scale": 1.0},
            },
            "bench": {"regimes": ["ideal", "ao"], "runs": 50,
                      "score_time": 20,
                      "calibration": {"criterion": "radius", "value": 0.1}},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "rep.csv"
        assert main(["bench", "--config", str(path), "--out", str(out)]) == 0
        body = open(out).read()
        assert ",ao," in body and ",ideal," in body


class TestConfigRoundTrip:
    @pytest.mark.parametrize("name", ["sima", "simb", "rw2d", "ar2",
                                      "m1", "m2", "m3"])
    def test_every_preset_round_trips(self, name, rng):
        model = build_preset(name, T=40, seed=2)
        section = model_to_config(model)
        rebuilt = model_from_config(section)
        if isinstance(model, NonlinearSSM):
            for _ in range(5):
                x = rng.standard_normal(model.p)
                v = rng.standard_normal(model.dim_v)
                np.testing.assert_allclose(rebuilt.f(3, x, None, v),
                                           model.f(3, x, None, v), rtol=1e-12)
        else:
            for t in (1, 3, 17):
                np.testing.assert_array_equal(rebuilt.F(t), model.F(t))
                np.testing.assert_array_equal(rebuilt.Z(t), model.Z(t))
                np.testing.assert_array_equal(rebuilt.Q(t), model.Q(t))
                np.testing.assert_array_equal(rebuilt.V(t), model.V(t))
            np.testing.assert_array_equal(rebuilt.a0, model.a0)
            np.testing.assert_array_equal(rebuilt.Q0, model.Q0)

    def test_plain_matrix_model_round_trips(self):
        section = {"F": [[0.5]], "Z": [[1.0]], "Q": [[1.0]], "V": [[2.0]],
                   "a0": [0.0], "Q0": [[1.0]]}
        model = model_from_config(section)
        assert model_to_config(model) == section

    def test_contamination_round_trip(self):
        spec = ContaminationSpec(
            r_ao=0.1, r_io=0.2,
            dist_ao=CauchyDist(5.0, 1.0),
            dist_io=MultivariateCauchy(np.zeros(2), np.eye(2)))
        loaded = contamination_from_config(contamination_to_config(spec))
        assert loaded.r_ao == spec.r_ao and loaded.r_io == spec.r_io
        assert isinstance(loaded.dist_io, MultivariateCauchy)
        blocky = ContaminationSpec(dist_io=BlockSignal(8, 3.0))
        again = contamination_from_config(contamination_to_config(blocky))
        assert again.dist_io == BlockSignal(8, 3.0)
