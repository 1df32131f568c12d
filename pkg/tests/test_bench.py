import numpy as np
import pytest

from robustkalman import (BlockSignal, CauchyDist, ConfigError,
                          ContaminationSpec, Scenario, StudyReport,
                          build_preset, default_contamination, export_report,
                          load_report, run_study)


def small_scenario(**kw):
    base = dict(model="sima", regimes=("ideal", "ao", "io"), n_runs=300,
                seed=11, calibration_mc=20_000)
    base.update(kw)
    return Scenario(**base)


class TestRunStudy:
    def test_report_shape(self):
        rep = run_study(small_scenario())
        assert set(rep.rows) == {(r, v, s)
                                 for r in ("ideal", "ao", "io")
                                 for v in ("classical", "rls-ao", "rls-io")
                                 for s in ("filter", "smoother")}
        for key, arr in rep.raw.items():
            assert arr.shape == (300,)

    def test_ideal_regime_classical_is_best(self):
        rep = run_study(small_scenario(regimes=("ideal",), n_runs=3000))
        base = rep.mse("ideal", "classical")
        for v in ("rls-ao", "rls-io"):
            # robustness premium: classical no worse, up to MC noise
            se = rep.raw[("ideal", v, "filter")].std() / np.sqrt(3000)
            assert base <= rep.mse("ideal", v) + 2 * se

    def test_deterministic_across_thread_counts(self):
        rep1 = run_study(small_scenario(threads=1))
        rep4 = run_study(small_scenario(threads=4))
        for key in rep1.rows:
            assert rep1.rows[key].mse == rep4.rows[key].mse
            np.testing.assert_array_equal(rep1.raw[key], rep4.raw[key])

    def test_contamination_required_for_contaminated_regimes(self):
        m = build_preset("rw2d")  # no built-in default contamination
        with pytest.raises(ConfigError):
            run_study(Scenario(model=m, regimes=("ao",), n_runs=10))

    def test_block_regime(self):
        spec = ContaminationSpec(dist_io=BlockSignal(mean_duration=10,
                                                     amplitude_scale=5.0))
        sc = Scenario(model="ar2", regimes=("block",), n_runs=200, seed=3,
                      contamination=spec, calibration_mc=20_000)
        rep = run_study(sc)
        assert rep.mse("block", "rls-io") > 0

    def test_seminorm_scoring(self):
        rep = run_study(small_scenario(regimes=("ideal",), seminorm=True))
        st = rep.rows[("ideal", "classical", "filter")]
        assert st.mse_seminorm is not None
        assert st.mse_seminorm <= st.mse + 1e-12  # seminorm ignores directions

    def test_fixed_height_variant(self):
        from robustkalman import rls_ao
        sc = small_scenario(variants=(rls_ao(b=0.8, label="ao-fixed"),),
                            regimes=("ideal",))
        rep = run_study(sc)
        assert ("ideal", "ao-fixed", "filter") in rep.rows

    def test_invalid_scenario(self):
        with pytest.raises(ConfigError):
            Scenario(model="sima", t_star=99, T=50)
        with pytest.raises(ConfigError):
            Scenario(model="sima", regimes=("nope",))


class TestExport:
    def test_csv_shape_and_raw_companion(self, tmp_path):
        rep = run_study(small_scenario())
        path = tmp_path / "report.csv"
        export_report(rep, "csv", path)
        lines = open(path).read().splitlines()
        assert lines[0] == "model,regime,variant,stage,coordinate,statistic,value"
        mse_rows = [l for l in lines[1:]
                    if l.split(",")[4] == "all" and l.split(",")[5] == "mse"]
        assert len(mse_rows) == 18  # 3 regimes x 3 variants x 2 stages
        raw_lines = open(tmp_path / "report_raw.csv").read().splitlines()
        assert len(raw_lines) == 1 + 18 * 300

    def test_byte_identical_reexport(self, tmp_path):
        rep1 = run_study(small_scenario(threads=1))
        rep2 = run_study(small_scenario(threads=3))
        export_report(rep1, "csv", tmp_path / "a.csv")
        export_report(rep2, "csv", tmp_path / "b.csv")
        assert open(tmp_path / "a.csv", "rb").read() == \
            open(tmp_path / "b.csv", "rb").read()
        assert open(tmp_path / "a_raw.csv", "rb").read() == \
            open(tmp_path / "b_raw.csv", "rb").read()

    def test_json_round_trip(self, tmp_path):
        rep = run_study(small_scenario(n_runs=50))
        path = tmp_path / "report.json"
        export_report(rep, "json", path)
        loaded = load_report(path)
        assert loaded.rows.keys() == rep.rows.keys()
        for key in rep.rows:
            assert loaded.rows[key] == rep.rows[key]
            np.testing.assert_array_equal(loaded.raw[key], rep.raw[key])
        assert (loaded.model_name, loaded.n_runs) == (rep.model_name, rep.n_runs)

    def test_empty_report_header_only(self, tmp_path):
        rep = StudyReport(model_name="none", n_runs=0, T=0, t_star=0, seed=0,
                          calibration={}, regimes=(), variant_labels=())
        export_report(rep, "csv", tmp_path / "empty.csv")
        lines = open(tmp_path / "empty.csv").read().splitlines()
        assert len(lines) == 1

    def test_unknown_format(self, tmp_path):
        rep = run_study(small_scenario(n_runs=10, regimes=("ideal",)))
        with pytest.raises(ConfigError):
            export_report(rep, "xml", tmp_path / "x")


class TestDefaults:
    def test_builtin_contamination_specs(self):
        sa = default_contamination("sima")
        assert isinstance(sa.dist_ao, CauchyDist) and sa.r_io == 0.1
        sb = default_contamination("simb")
        assert sb.dist_io.shape.shape == (3, 3)
        assert default_contamination("rw2d") is None
