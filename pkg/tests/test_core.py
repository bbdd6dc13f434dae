import json
import math
from dataclasses import replace

import numpy as np
import pytest

import sqz_sensor as sq
from sqz_sensor import (
    ConfigError,
    RangeError,
    Scenario,
    ScenarioMismatchError,
    SensorParams,
    SpectrumCurve,
)

SPEED_OF_LIGHT = 299792458.0


class TestSensorParams:
    def test_fig2_derived_quantities(self, fig2_params):
        assert fig2_params.kappa == pytest.approx(1.1, rel=1e-15)
        assert fig2_params.epsilon_sq == pytest.approx(3.0 / 7.0, rel=1e-14)
        assert math.exp(2.0 * fig2_params.r_squeeze) == pytest.approx(30.0, rel=1e-12)
        assert fig2_params.beta == 1.0

    def test_lossless_detection(self):
        p = SensorParams(kappa_prime=1.0, kappa_double_prime=0.0, eta=1.0, n_photons=1.0)
        assert p.epsilon_sq == 0.0

    def test_unstable_kc_rejected(self):
        with pytest.raises(RangeError, match="k_c"):
            SensorParams(kappa_prime=1.0, kappa_double_prime=0.1, eta=0.7,
                         n_photons=1.0, k_c=1.2)

    @pytest.mark.parametrize("field,value", [
        ("kappa_prime", 0.0),
        ("kappa_prime", -1.0),
        ("kappa_double_prime", -0.1),
        ("eta", 0.0),
        ("eta", 1.2),
        ("n_photons", 0.0),
        ("gamma_spm", -0.5),
        ("r_squeeze", -0.1),
        ("kappa_prime", math.nan),
    ])
    def test_range_errors_name_offending_field(self, field, value):
        kwargs = dict(kappa_prime=1.0, kappa_double_prime=0.1, eta=0.7, n_photons=1.0)
        kwargs[field] = value
        with pytest.raises(RangeError, match=field):
            SensorParams(**kwargs)

    def test_bad_units_rejected(self):
        with pytest.raises(RangeError, match="units"):
            SensorParams(kappa_prime=1.0, kappa_double_prime=0.0, eta=1.0,
                         n_photons=1.0, units="hertz")

    def test_epsilon_sq_strictly_decreasing(self):
        etas = np.linspace(0.05, 1.0, 200)
        eps = [(1.0 - e) / e for e in etas]
        p_half = SensorParams(kappa_prime=1.0, kappa_double_prime=0.0, eta=0.5, n_photons=1.0)
        assert p_half.epsilon_sq == pytest.approx(1.0, rel=1e-15)
        values = [
            SensorParams(kappa_prime=1.0, kappa_double_prime=0.0, eta=float(e), n_photons=1.0).epsilon_sq
            for e in etas
        ]
        assert np.all(np.diff(values) < 0.0)
        assert values == pytest.approx(eps)

    def test_kappa_is_sum(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            kp = rng.uniform(0.1, 10.0)
            kpp = rng.uniform(0.0, 5.0)
            p = SensorParams(kappa_prime=kp, kappa_double_prime=kpp, eta=0.9, n_photons=1.0)
            assert p.kappa == kp + kpp

    def test_from_pump(self):
        p = SensorParams.from_pump(
            1.0, math.pi / 3.0,
            kappa_prime=1.0, kappa_double_prime=0.1, eta=0.7, n_photons=1.0,
        )
        assert p.k_c == pytest.approx(0.5, rel=1e-15)
        assert p.k_s == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-15)

    def test_validate_returns_params(self, fig2_params):
        assert sq.validate(fig2_params) is fig2_params

    def test_immutable(self, fig2_params):
        with pytest.raises(AttributeError):
            fig2_params.eta = 0.5


class TestRateHelpers:
    def test_quality_factor_conversion(self):
        kp, kpp = sq.rates_from_quality(2e15, 1e9, 10.0)
        assert kpp == pytest.approx(1e6, rel=1e-15)
        assert kp == pytest.approx(1e7, rel=1e-15)
        assert kp / (2.0 * math.pi) == pytest.approx(1.5915494309189535e6, rel=1e-12)

    def test_quality_inverse_proportionality(self):
        kp1, kpp1 = sq.rates_from_quality(2e15, 1e9, 10.0)
        kp2, kpp2 = sq.rates_from_quality(2e15, 1e10, 10.0)
        assert kpp2 == pytest.approx(kpp1 / 10.0, rel=1e-15)
        assert kp2 == pytest.approx(kp1 / 10.0, rel=1e-15)

    def test_quality_conversion_at_1064nm(self):
        # Recompute the eigenfrequency exactly instead of the rounded
        # 2e15 rad/s figure.
        omega_0 = 2.0 * math.pi * SPEED_OF_LIGHT / 1064e-9
        kp, _ = sq.rates_from_quality(omega_0, 1e9, 10.0)
        assert kp == pytest.approx(10.0 * omega_0 / 2e9, rel=1e-15)
        assert kp / (2.0 * math.pi) == pytest.approx(1.41e6, rel=2e-3)

    @pytest.mark.parametrize("args", [(0.0, 1e9, 10.0), (2e15, 0.0, 10.0), (2e15, 1e9, -1.0)])
    def test_quality_conversion_rejects_nonpositive(self, args):
        with pytest.raises(RangeError):
            sq.rates_from_quality(*args)

    def test_spm_cancelling_gain(self):
        assert sq.spm_cancelling_ks(0.0, 1.0) == 0.0
        assert sq.spm_cancelling_ks(0.05, 4.0) == pytest.approx(0.4, rel=1e-15)

    def test_detuning_offset(self):
        assert sq.detuning_offset(0.0, 1.0) == 0.0
        assert sq.detuning_offset(0.05, 4.0) == pytest.approx(-0.2, rel=1e-15)

    def test_offset_is_half_cancelling_gain(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            gamma, n = rng.uniform(0.0, 1.0), rng.uniform(0.1, 10.0)
            assert sq.detuning_offset(gamma, n) == pytest.approx(
                -0.5 * sq.spm_cancelling_ks(gamma, n), rel=1e-15, abs=1e-300)

    def test_squeeze_db_conversion(self):
        r = sq.r_from_db(15.0)
        assert math.exp(2.0 * r) == pytest.approx(10.0 ** 1.5, rel=1e-12)
        assert sq.db_from_r(r) == pytest.approx(15.0, rel=1e-12)
        # a power factor of 30 is a squeezing level just under 15 dB
        assert sq.db_from_r(0.5 * math.log(30.0)) == pytest.approx(14.77, abs=0.01)

    def test_with_spm_cancelled(self):
        p = SensorParams(kappa_prime=1.0, kappa_double_prime=0.1, eta=0.7,
                         n_photons=4.0, gamma_spm=0.05)
        assert not p.is_spm_cancelled
        pc = p.with_spm_cancelled()
        assert pc.k_s == pytest.approx(0.4, rel=1e-15)
        assert pc.is_spm_cancelled


class TestScenario:
    def test_no_squeeze_materialization(self, fig2_params):
        p = Scenario.no_squeeze().materialize(fig2_params)
        assert p.r_squeeze == 0.0 and p.k_c == 0.0

    def test_input_squeeze_materialization(self, fig2_params):
        p = Scenario.input_squeeze().materialize(replace(fig2_params, k_c=0.3))
        assert p.k_c == 0.0
        assert p.r_squeeze == fig2_params.r_squeeze

    def test_double_squeeze_materialization_deterministic(self, fig2_params):
        p1 = Scenario.double_squeeze_optimal().materialize(fig2_params)
        p2 = Scenario.double_squeeze_optimal().materialize(fig2_params)
        assert p1.k_c == p2.k_c == sq.optimal_kc(fig2_params)

    def test_custom_materialization(self, fig2_params):
        p = Scenario.custom(-0.25).materialize(fig2_params)
        assert p.k_c == -0.25

    def test_check_rejects_contradictions(self, fig2_params):
        with pytest.raises(ScenarioMismatchError):
            Scenario.no_squeeze().check(fig2_params)  # r != 0
        with pytest.raises(ScenarioMismatchError):
            Scenario.input_squeeze().check(replace(fig2_params, k_c=0.2))
        with pytest.raises(ScenarioMismatchError):
            Scenario.double_squeeze_optimal().check(fig2_params)  # k_c not optimal
        with pytest.raises(ScenarioMismatchError):
            Scenario.custom(0.1).check(fig2_params)

    def test_from_name(self):
        assert Scenario.from_name("no-squeeze").tag == "no_squeeze"
        assert Scenario.from_name("double_squeeze_optimal").tag == "double_squeeze_optimal"
        assert Scenario.from_name("custom", custom_kc=0.2).custom_kc == 0.2
        with pytest.raises(ScenarioMismatchError):
            Scenario.from_name("triple-squeeze")
        with pytest.raises(ScenarioMismatchError):
            Scenario.from_name("custom")


class TestParamsFile:
    def _write(self, tmp_path, data):
        path = tmp_path / "params.json"
        path.write_text(json.dumps(data))
        return path

    def test_full_schema(self, tmp_path):
        path = self._write(tmp_path, {
            "kappa_prime": 1.0, "kappa_double_prime": 0.1, "eta": 0.7,
            "n_photons": 1.0, "gamma_spm": 0.05, "squeeze_db": 15.0,
            "k_c": 0.0, "k_s": 0.1, "units": "kappa_prime",
        })
        p = sq.load_params(path)
        assert p.k_s == 0.1
        assert math.exp(2.0 * p.r_squeeze) == pytest.approx(10.0 ** 1.5, rel=1e-12)

    def test_auto_spm_cancel(self, tmp_path):
        path = self._write(tmp_path, {
            "kappa_prime": 1.0, "kappa_double_prime": 0.1, "eta": 0.7,
            "n_photons": 4.0, "gamma_spm": 0.05, "auto_spm_cancel": True,
        })
        assert sq.load_params(path).k_s == pytest.approx(0.4, rel=1e-15)

    def test_defaults(self, tmp_path):
        path = self._write(tmp_path, {
            "kappa_prime": 1.0, "kappa_double_prime": 0.1, "eta": 0.7, "n_photons": 1.0,
        })
        p = sq.load_params(path)
        assert p.r_squeeze == 0.0 and p.k_c == 0.0 and p.k_s == 0.0
        assert p.units == "kappa_prime"

    def test_missing_required_key(self, tmp_path):
        path = self._write(tmp_path, {"kappa_prime": 1.0, "eta": 0.7, "n_photons": 1.0})
        with pytest.raises(ConfigError, match="kappa_double_prime"):
            sq.load_params(path)

    def test_conflicting_ks(self, tmp_path):
        path = self._write(tmp_path, {
            "kappa_prime": 1.0, "kappa_double_prime": 0.1, "eta": 0.7,
            "n_photons": 1.0, "k_s": 0.1, "auto_spm_cancel": True,
        })
        with pytest.raises(ConfigError):
            sq.load_params(path)

    def test_unknown_key(self, tmp_path):
        path = self._write(tmp_path, {
            "kappa_prime": 1.0, "kappa_double_prime": 0.1, "eta": 0.7,
            "n_photons": 1.0, "bandwidth": 2.0,
        })
        with pytest.raises(ConfigError, match="bandwidth"):
            sq.load_params(path)

    def test_roundtrip_dict(self, fig2_params):
        d = sq.params_to_dict(fig2_params)
        assert sq.params_from_dict(
            {k: v for k, v in d.items() if k != "r_squeeze"} | {"r_squeeze": d["r_squeeze"]}
        ) == fig2_params


class TestSpectrumCurve:
    def test_grid_must_increase(self):
        with pytest.raises(sq.GridError):
            SpectrumCurve(omegas=np.array([0.0, 1.0, 1.0]), values=np.ones(3))

    def test_values_positive(self):
        with pytest.raises(RangeError):
            SpectrumCurve(omegas=np.array([0.0, 1.0]), values=np.array([0.0, 1.0]))

    def test_snl_curve_may_touch_zero(self):
        curve = SpectrumCurve(omegas=np.array([0.0, 1.0]), values=np.array([0.0, 0.25]),
                              scenario="snl")
        assert curve.values[0] == 0.0

    def test_values_finite(self):
        with pytest.raises(RangeError):
            SpectrumCurve(omegas=np.array([0.0, 1.0]), values=np.array([1.0, math.inf]))

    def test_arrays_frozen(self):
        curve = SpectrumCurve(omegas=np.array([0.0, 1.0]), values=np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            curve.values[0] = 3.0
