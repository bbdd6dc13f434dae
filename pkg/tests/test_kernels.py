import numpy as np
import pytest

import sqz_sensor.stochastic as stochastic
from sqz_sensor import ConfigError, SensorParams, SimulationConfig, simulate
from sqz_sensor._kernels import ENV_BACKEND, HAS_NUMBA, active_backend


@pytest.fixture
def params():
    return SensorParams(kappa_prime=1.0, kappa_double_prime=0.1, eta=0.7,
                        n_photons=1.0, r_squeeze=0.5, k_c=-0.3)


class TestBackendSelection:
    def test_auto_resolution(self, monkeypatch):
        monkeypatch.delenv(ENV_BACKEND, raising=False)
        assert active_backend() == ("numba" if HAS_NUMBA else "numpy")

    def test_forced_numpy(self, monkeypatch):
        monkeypatch.setenv(ENV_BACKEND, "numpy")
        assert active_backend() == "numpy"

    def test_unknown_value_rejected(self, monkeypatch):
        monkeypatch.setenv(ENV_BACKEND, "fortran")
        with pytest.raises(ConfigError):
            active_backend()

    @pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")
    def test_forced_numba(self, monkeypatch):
        monkeypatch.setenv(ENV_BACKEND, "numba")
        assert active_backend() == "numba"


@pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")
class TestBackendParity:
    @pytest.mark.parametrize("method", ["euler", "exact"])
    def test_paths_agree(self, params, method, monkeypatch):
        cfg = SimulationConfig(dt=0.02, duration=400.0, seed=13, n_segments=4,
                               method=method)
        monkeypatch.setenv(ENV_BACKEND, "numba")
        compiled = simulate(params, cfg)
        monkeypatch.setenv(ENV_BACKEND, "numpy")
        fallback = simulate(params, cfg)
        assert compiled.backend == "numba"
        assert fallback.backend == "numpy"
        assert np.max(np.abs(compiled.d_s - fallback.d_s)) < 1e-12


class TestChunking:
    def test_chunk_size_does_not_change_realization(self, params, monkeypatch):
        cfg = SimulationConfig(dt=0.02, duration=400.0, seed=13, n_segments=4)
        reference = simulate(params, cfg)
        monkeypatch.setattr(stochastic, "_CHUNK", 1000)
        chunked = simulate(params, cfg)
        assert np.array_equal(reference.d_s, chunked.d_s)
