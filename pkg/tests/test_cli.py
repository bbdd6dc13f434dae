import json
import math
from fractions import Fraction

import numpy as np
import pytest

import sqz_sensor as sq
from sqz_sensor.cli import main, reference_params

FIG2_FILE = {
    "kappa_prime": 1.0,
    "kappa_double_prime": 0.1,
    "eta": 0.7,
    "n_photons": 1.0,
    "r_squeeze": 0.5 * math.log(30.0),
}


@pytest.fixture
def params_file(tmp_path):
    path = tmp_path / "params.json"
    path.write_text(json.dumps(FIG2_FILE))
    return path


def read_curve_csv(path):
    omegas, values = [], []
    header = []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            header.append(line)
        elif line and not line.startswith("omega"):
            w, s = line.split(",")
            omegas.append(float(w))
            values.append(float(s))
    return np.array(omegas), np.array(values), header


class TestSpectrumCommand:
    def test_csv_output_and_manifest(self, params_file, tmp_path):
        out = tmp_path / "curve.csv"
        rc = main(["spectrum", "--params", str(params_file), "--scenario", "no-squeeze",
                   "--omega-min", "0", "--omega-max", "4", "--points", "5",
                   "--out", str(out)])
        assert rc == 0
        omegas, values, header = read_curve_csv(out)
        assert omegas == pytest.approx(np.linspace(0.0, 4.0, 5))
        assert values[0] == pytest.approx(float(Fraction(121, 560)), rel=1e-15)
        assert any("psd_convention" in line for line in header)
        manifest = json.loads((tmp_path / "curve.csv.manifest.json").read_text())
        assert manifest["command"] == "spectrum"
        assert manifest["params_sha256"]

    def test_round_trip_from_manifest(self, params_file, tmp_path):
        out = tmp_path / "curve.csv"
        main(["spectrum", "--params", str(params_file), "--scenario", "input-squeeze",
              "--points", "9", "--out", str(out)])
        omegas, values, _ = read_curve_csv(out)
        manifest = json.loads((tmp_path / "curve.csv.manifest.json").read_text())
        params = sq.params_from_dict(manifest["params"])
        recomputed = sq.input_squeeze_psd(params, omegas)
        assert np.array_equal(values, recomputed)

    def test_single_point_lossless(self, tmp_path):
        pfile = tmp_path / "lossless.json"
        pfile.write_text(json.dumps({
            "kappa_prime": 1.0, "kappa_double_prime": 0.0, "eta": 1.0, "n_photons": 1.0,
        }))
        out = tmp_path / "point.csv"
        rc = main(["spectrum", "--params", str(pfile), "--scenario", "no-squeeze",
                   "--omega-min", "1", "--omega-max", "1", "--points", "1",
                   "--out", str(out)])
        assert rc == 0
        _, values, _ = read_curve_csv(out)
        assert values == pytest.approx([0.25], rel=1e-15)

    def test_json_format(self, params_file, tmp_path):
        out = tmp_path / "curve.json"
        main(["spectrum", "--params", str(params_file), "--scenario", "snl",
              "--points", "5", "--out", str(out), "--format", "json"])
        payload = json.loads(out.read_text())
        assert payload["S"][0] == 0.0
        assert payload["manifest"]["psd_convention"] == sq.PSD_CONVENTION

    def test_normalize_flag(self, params_file, tmp_path):
        out = tmp_path / "norm.csv"
        main(["spectrum", "--params", str(params_file), "--scenario", "no-squeeze",
              "--points", "5", "--normalize", "--out", str(out)])
        manifest = json.loads((tmp_path / "norm.csv.manifest.json").read_text())
        assert manifest["normalization"] == "kappa_prime_over_n"

    def test_unknown_scenario_is_usage_error(self, params_file, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            main(["spectrum", "--params", str(params_file), "--scenario", "triple-squeeze",
                  "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2

    def test_missing_params_file(self, tmp_path):
        rc = main(["spectrum", "--params", str(tmp_path / "nope.json"),
                   "--scenario", "no-squeeze", "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_invalid_params_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"kappa_prime": -1.0, "kappa_double_prime": 0.1,
                                   "eta": 0.7, "n_photons": 1.0}))
        rc = main(["spectrum", "--params", str(bad), "--scenario", "no-squeeze",
                   "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestFig2Command:
    def test_curves_and_ordering(self, tmp_path):
        out_dir = tmp_path / "fig2"
        rc = main(["fig2", "--out-dir", str(out_dir), "--points", "401"])
        assert rc == 0
        curves = {}
        for name in ("no_squeeze", "input_squeeze", "double_squeeze_optimal", "snl"):
            omegas, values, _ = read_curve_csv(out_dir / f"{name}.csv")
            curves[name] = (omegas, values)
        grid = curves["no_squeeze"][0]
        assert grid[0] == 0.0 and grid[-1] == 4.0 and grid.size == 401

        # spot values at omega = 0 and omega = kappa_prime
        expect = {
            "no_squeeze": (Fraction(121, 560), Fraction(221, 560)),
            "input_squeeze": (Fraction(6619, 56000), Fraction(29557, 168000)),
            "double_squeeze_optimal": (Fraction(127, 1940), Fraction(20077, 162960)),
        }
        i1 = int(np.argmin(np.abs(grid - 1.0)))
        assert grid[i1] == 1.0
        for name, (at0, at1) in expect.items():
            values = curves[name][1]
            assert values[0] == pytest.approx(float(at0), rel=1e-12)
            assert values[i1] == pytest.approx(float(at1), rel=1e-12)

        # the shot-noise-limit column is exactly omega / 4
        assert np.array_equal(curves["snl"][1], grid / 4.0)

        # strict ordering everywhere
        s_no, s_in, s_db = (curves[k][1] for k in
                            ("no_squeeze", "input_squeeze", "double_squeeze_optimal"))
        assert np.all(s_db <= s_in) and np.all(s_in <= s_no)
        assert np.all(s_db[1:] < s_in[1:])

        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert sorted(manifest["outputs"]) == sorted(
            ["no_squeeze.csv", "input_squeeze.csv", "double_squeeze_optimal.csv", "snl.csv"])

    def test_squeezed_curves_dip_below_snl_inside_bands(self, tmp_path):
        out_dir = tmp_path / "fig2"
        main(["fig2", "--out-dir", str(out_dir), "--points", "401"])
        grid, snl_vals, _ = read_curve_csv(out_dir / "snl.csv")
        _, s_in, _ = read_curve_csv(out_dir / "input_squeeze.csv")
        _, s_db, _ = read_curve_csv(out_dir / "double_squeeze_optimal.csv")
        params = reference_params()
        b_in = sq.snl_crossings(sq.Scenario.input_squeeze(), params, (0.0, 8.0))
        b_db = sq.snl_crossings(sq.Scenario.double_squeeze_optimal(), params, (0.0, 8.0))
        inside_in = (grid > b_in.lower + 0.02) & (grid < min(b_in.upper, 4.0) - 0.02)
        inside_db = (grid > b_db.lower + 0.02) & (grid < min(b_db.upper, 4.0) - 0.02)
        assert np.all(s_in[inside_in] < snl_vals[inside_in])
        assert np.all(s_db[inside_db] < snl_vals[inside_db])


class TestValidateCommand:
    def test_gates_pass(self, params_file, tmp_path):
        report_path = tmp_path / "report.json"
        rc = main(["validate", "--params", str(params_file), "--budget", "800",
                   "--seed", "7", "--out", str(report_path)])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert report["passed"]
        assert {c["name"] for c in report["checks"]} == {
            "frequency_domain_solver_vs_closed_forms",
            "numeric_kc_minimum_vs_closed_form",
            "stochastic_simulator_vs_closed_forms",
        }

    def test_mutation_negative_control(self, params_file, tmp_path):
        report_path = tmp_path / "mutated.json"
        rc = main(["validate", "--params", str(params_file), "--budget", "50",
                   "--seed", "7", "--mutate", "--out", str(report_path)])
        assert rc == 1
        report = json.loads(report_path.read_text())
        assert not report["passed"]
        solver_check = next(c for c in report["checks"]
                            if c["name"] == "frequency_domain_solver_vs_closed_forms")
        assert not solver_check["passed"]


class TestOptimizeCommand:
    def test_kc_target(self, params_file, tmp_path, capsys):
        out = tmp_path / "kc.json"
        rc = main(["optimize", "--params", str(params_file), "--target", "kc",
                   "--out", str(out)])
        assert rc == 0
        result = json.loads(out.read_text())
        assert result["closed_form"] == pytest.approx(float(Fraction(-927, 970)), rel=1e-12)
        assert result["agreement"] < 1e-8

    def test_snl_kappa_target(self, params_file, tmp_path):
        out = tmp_path / "kappa.json"
        rc = main(["optimize", "--params", str(params_file), "--target", "snl_kappa",
                   "--omega", "1.0", "--out", str(out)])
        assert rc == 0
        result = json.loads(out.read_text())
        assert result["closed_form"]["kappa"] == 1.0
        assert result["agreement"] < 1e-8

    def test_band_target(self, params_file, tmp_path):
        out = tmp_path / "band.json"
        rc = main(["optimize", "--params", str(params_file), "--target", "band",
                   "--scenario", "double-squeeze-optimal", "--out", str(out)])
        assert rc == 0
        band = json.loads(out.read_text())["band"]
        assert band["lower"] == pytest.approx(0.2799567425, abs=1e-6)
        assert band["upper"] == pytest.approx(4.0499401647, abs=1e-6)

    def test_band_absent_is_a_result(self, params_file, tmp_path):
        out = tmp_path / "noband.json"
        rc = main(["optimize", "--params", str(params_file), "--target", "band",
                   "--scenario", "no-squeeze", "--out", str(out)])
        assert rc == 0
        result = json.loads(out.read_text())
        assert result["band"] is None
        assert "reason" in result


class TestEnvironment:
    def test_thread_cap_env(self, params_file, tmp_path, monkeypatch):
        monkeypatch.setenv("SQZ_SENSOR_THREADS", "1")
        out = tmp_path / "curve.csv"
        rc = main(["spectrum", "--params", str(params_file), "--scenario", "snl",
                   "--points", "3", "--out", str(out)])
        assert rc == 0

    def test_bad_thread_cap(self, params_file, tmp_path, monkeypatch):
        monkeypatch.setenv("SQZ_SENSOR_THREADS", "many")
        rc = main(["spectrum", "--params", str(params_file), "--scenario", "snl",
                   "--points", "3", "--out", str(tmp_path / "x.csv")])
        assert rc == 2
