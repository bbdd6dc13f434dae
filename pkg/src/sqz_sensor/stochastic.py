"""Time-domain integration of the linearized Langevin dynamics.

This is the second, fully independent verification route: the quadrature
pair is integrated against white-noise inputs, the detected quadrature is
assembled sample by sample through the output and loss relations, and its
spectrum is estimated with a segment-averaged periodogram.  Nothing here
reuses the closed-form algebra of :mod:`sqz_sensor.spectra`.

Noise generation uses one counter-based stream per input field, keyed by
``(seed, stream id)``, so realizations are reproducible bit for bit on
any platform for a fixed backend.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import signal as _scipy_signal

from ._kernels import active_backend, euler_maruyama_loop, exact_relax_loop
from .core import (
    NORMALIZATION_RAW,
    PSD_CONVENTION,
    SensorParams,
    SpectrumCurve,
    params_to_dict,
)
from .dynamics import (
    SignalWaveform,
    drift_matrix,
    frequency_response,
    input_noise_psds,
    relaxation_rates,
)
from .errors import ConfigError, GridError, RangeError, SnrError

METHOD_EULER = "euler"
METHOD_EXACT = "exact"

#: Stream ids for the counter-based noise generators.
STREAM_A_C = 0
STREAM_A_S = 1
STREAM_V = 2
STREAM_U = 3

#: Fixed chunk length; reproducibility must not depend on memory layout.
_CHUNK = 1 << 20

#: Margin against the fastest relaxation rate when validating the step.
_DT_MARGIN = 0.1


@dataclass(frozen=True)
class SimulationConfig:
    """Integration settings for one stochastic run.

    ``duration`` is the retained span; a transient of ``burn_in`` seconds
    (default: eight times the slowest relaxation time) is integrated
    first and discarded, so retained samples are effectively stationary.
    The seed fully determines the realization for a given backend.
    """

    dt: float
    duration: float
    seed: int
    n_segments: int = 200
    signal: SignalWaveform = field(default_factory=SignalWaveform.zero)
    burn_in: float | None = None
    store_state: bool = False
    method: str = METHOD_EULER

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"dt must be a positive finite number, got {self.dt}")
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ConfigError(f"duration must be a positive finite number, got {self.duration}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        if int(self.n_segments) != self.n_segments or self.n_segments < 1:
            raise ConfigError(f"n_segments must be a positive integer, got {self.n_segments}")
        if self.method not in (METHOD_EULER, METHOD_EXACT):
            raise ConfigError(f"method must be {METHOD_EULER!r} or {METHOD_EXACT!r}, got {self.method!r}")
        if self.burn_in is not None and self.burn_in < 0.0:
            raise ConfigError(f"burn_in must be >= 0, got {self.burn_in}")
        if not isinstance(self.signal, SignalWaveform):
            raise ConfigError("signal must be a SignalWaveform")

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "duration": self.duration,
            "seed": int(self.seed),
            "n_segments": int(self.n_segments),
            "signal": self.signal.to_dict(),
            "burn_in": self.burn_in,
            "store_state": self.store_state,
            "method": self.method,
        }


@dataclass(frozen=True)
class SimulationRun:
    """Detected-quadrature time series with its provenance.

    ``t0`` is the time of the first retained sample (the waveform clock
    starts at zero there; the discarded transient has negative times).
    """

    d_s: np.ndarray
    params: SensorParams
    config: SimulationConfig
    input_psds: dict
    t0: float
    backend: str
    b_c: np.ndarray | None = None
    b_s: np.ndarray | None = None

    @property
    def dt(self) -> float:
        return self.config.dt

    @property
    def n_samples(self) -> int:
        return int(self.d_s.size)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    def dump(self, path: str | Path) -> None:
        """Write the series as little-endian float64 with a JSON sidecar."""
        path = Path(path)
        path.write_bytes(self.d_s.astype("<f8").tobytes())
        sidecar = {
            "format": "float64-le",
            "n_samples": self.n_samples,
            "dt": self.dt,
            "t0": self.t0,
            "psd_convention": PSD_CONVENTION,
            "backend": self.backend,
            "params": params_to_dict(self.params),
            "config": self.config.to_dict(),
            "input_psds": self.input_psds,
        }
        Path(str(path) + ".json").write_text(
            json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def load_timeseries(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read back a dumped time series and its sidecar."""
    path = Path(path)
    meta = json.loads(Path(str(path) + ".json").read_text(encoding="utf-8"))
    data = np.frombuffer(path.read_bytes(), dtype="<f8")
    if data.size != meta["n_samples"]:
        raise ConfigError(
            f"sidecar announces {meta['n_samples']} samples, file holds {data.size}"
        )
    return data, meta


def _stream(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed=[int(seed), int(stream_id)]))


def spectral_comparison_config(params: SensorParams, n_segments: int, seed: int) -> SimulationConfig:
    """Simulation settings sized for a PSD comparison at ``n_segments``.

    The step resolves the fastest relaxation rate with a wide margin and
    the segment length is long enough to resolve both the slowest rate
    (the narrowest spectral feature) and the sensing band itself, keeping
    windowing bias well below the statistical scatter.
    """
    rate_min, rate_fast = relaxation_rates(params)
    dt = 0.04 / rate_fast
    t_segment = max(12.0 / rate_min, 80.0 / params.kappa_prime)
    nper = 1 << max(int(math.ceil(math.log2(t_segment / dt))), 4)
    duration = (n_segments + 1) * (nper // 2) * dt
    return SimulationConfig(dt=dt, duration=duration, seed=seed, n_segments=n_segments)


def simulate(params: SensorParams, config: SimulationConfig) -> SimulationRun:
    """Integrate the quadrature Langevin system and record the detector.

    The default Euler-Maruyama method advances the full 2x2 system; each
    step draws bin-averaged samples of the five white inputs, and the
    detected quadrature combines the cavity output with the very same
    input sample plus the detection vacuum.  ``method="exact"`` instead
    uses the exact one-step relaxation of the decoupled measured
    quadrature (valid only when the self-phase-modulation coupling is
    cancelled) as a discretization-bias cross-check.
    """
    rate_min, rate_max = relaxation_rates(params)
    if config.dt * rate_max >= _DT_MARGIN:
        raise ConfigError(
            f"dt = {config.dt} too coarse for fastest relaxation rate {rate_max} "
            f"(need dt < {_DT_MARGIN / rate_max})"
        )
    burn = config.burn_in if config.burn_in is not None else 8.0 / rate_min
    n_burn = int(math.ceil(burn / config.dt)) if burn > 0.0 else 0
    n_out = int(config.duration / config.dt)
    if n_out < 1:
        raise ConfigError("duration shorter than one step")
    n_total = n_burn + n_out

    if config.method == METHOD_EXACT:
        d, b_s = _run_exact(params, config, n_total)
        b_c = None
    else:
        d, b_c, b_s = _run_euler(params, config, n_total)

    run = SimulationRun(
        d_s=d[n_burn:].copy(),
        params=params,
        config=config,
        input_psds=input_noise_psds(params),
        t0=0.0,
        backend=active_backend(),
        b_c=b_c[n_burn:].copy() if b_c is not None else None,
        b_s=b_s[n_burn:].copy() if b_s is not None else None,
    )
    return run


def _output_coefficients(params: SensorParams) -> tuple[float, float, float]:
    sqrt_eta = math.sqrt(params.eta)
    p_bs = sqrt_eta * math.sqrt(2.0 * params.kappa_prime)
    q_as = -sqrt_eta
    q_us = math.sqrt(1.0 - params.eta)
    return p_bs, q_as, q_us


def _run_euler(params: SensorParams, config: SimulationConfig, n_total: int):
    drift = drift_matrix(params)
    m = drift.matrix
    dt = config.dt
    psds = input_noise_psds(params)
    sig_ac = math.sqrt(psds["a_c"] / dt)
    sig_as = math.sqrt(psds["a_s"] / dt)
    sig_vc = math.sqrt(psds["v_c"] / dt)
    sig_vs = math.sqrt(psds["v_s"] / dt)
    sig_u = math.sqrt(psds["u_s"] / dt)
    c_a = math.sqrt(2.0 * params.kappa_prime)
    c_v = math.sqrt(2.0 * params.kappa_double_prime)
    p_bs, q_as, q_us = _output_coefficients(params)

    g_ac = _stream(config.seed, STREAM_A_C)
    g_as = _stream(config.seed, STREAM_A_S)
    g_v = _stream(config.seed, STREAM_V)
    g_u = _stream(config.seed, STREAM_U)

    out_d = np.empty(n_total)
    store = config.store_state
    out_bc = np.empty(n_total if store else 0)
    out_bs = np.empty(n_total if store else 0)
    empty = np.empty(0)

    n_burn = n_total - int(config.duration / config.dt)
    zero_signal = config.signal.kind == "zero"
    bc = 0.0
    bs = 0.0
    for i0 in range(0, n_total, _CHUNK):
        i1 = min(i0 + _CHUNK, n_total)
        n = i1 - i0
        a_c = sig_ac * g_ac.standard_normal(n)
        a_s = sig_as * g_as.standard_normal(n)
        v = g_v.standard_normal(2 * n)
        v_c = sig_vc * v[0::2]
        v_s = sig_vs * v[1::2]
        u_s = sig_u * g_u.standard_normal(n)
        if zero_signal:
            xi_drive = np.zeros(n)
        else:
            t = (np.arange(i0, i1) - n_burn) * dt
            xi_drive = drift.signal_coupling * config.signal.evaluate(t)
        bc, bs = euler_maruyama_loop(
            bc, bs, m[0, 0], m[0, 1], m[1, 0], m[1, 1], dt,
            a_c, a_s, v_c, v_s, u_s, xi_drive,
            p_bs, q_as, q_us, c_a, c_v,
            out_d[i0:i1],
            out_bc[i0:i1] if store else empty,
            out_bs[i0:i1] if store else empty,
            store,
        )
    if store:
        return out_d, out_bc, out_bs
    return out_d, None, None


def _run_exact(params: SensorParams, config: SimulationConfig, n_total: int):
    if not params.is_spm_cancelled:
        raise ConfigError(
            "exact method needs the self-phase-modulation coupling cancelled "
            "(k_s = 2 * gamma_spm * n_photons); use method='euler' otherwise"
        )
    drift = drift_matrix(params)
    lam = drift.matrix[1, 1]  # relaxation rate of the measured quadrature
    dt = config.dt
    decay = math.exp(-lam * dt)
    psds = input_noise_psds(params)
    s_as, s_vs, s_u = psds["a_s"], psds["v_s"], psds["u_s"]

    # Per-step stochastic integrals of the measured-quadrature drives:
    # the bin average of a_s is correlated with its exponentially
    # filtered integral, so the pair is sampled jointly.
    var0 = s_as * dt
    var1 = s_as * (1.0 - decay * decay) / (2.0 * lam)
    cov01 = s_as * (1.0 - decay) / lam
    gain01 = cov01 / var0
    resid = math.sqrt(max(var1 - cov01 * cov01 / var0, 0.0))
    sig_abar = math.sqrt(s_as / dt)
    sig_i1v = math.sqrt(s_vs * (1.0 - decay * decay) / (2.0 * lam))
    sig_u = math.sqrt(s_u / dt)
    c_a = math.sqrt(2.0 * params.kappa_prime)
    c_v = math.sqrt(2.0 * params.kappa_double_prime)
    sig_gain = (1.0 - decay) / lam
    p_bs, q_as, q_us = _output_coefficients(params)

    g_as = _stream(config.seed, STREAM_A_S)
    g_v = _stream(config.seed, STREAM_V)
    g_u = _stream(config.seed, STREAM_U)

    out_d = np.empty(n_total)
    store = config.store_state
    out_bs = np.empty(n_total if store else 0)
    empty = np.empty(0)

    n_burn = n_total - int(config.duration / config.dt)
    zero_signal = config.signal.kind == "zero"
    bs = 0.0
    for i0 in range(0, n_total, _CHUNK):
        i1 = min(i0 + _CHUNK, n_total)
        n = i1 - i0
        za = g_as.standard_normal(2 * n)
        a_bar = sig_abar * za[0::2]
        i1_a = gain01 * (a_bar * dt) + resid * za[1::2]
        zv = g_v.standard_normal(2 * n)
        i1_v = sig_i1v * zv[1::2]
        u_s = sig_u * g_u.standard_normal(n)
        if zero_signal:
            sig_term = np.zeros(n)
        else:
            t = (np.arange(i0, i1) - n_burn) * dt
            sig_term = drift.signal_coupling * sig_gain * config.signal.evaluate(t)
        w_drive = c_a * i1_a + c_v * i1_v + sig_term
        bs = exact_relax_loop(
            bs, decay, a_bar, w_drive, u_s,
            p_bs, q_as, q_us,
            out_d[i0:i1],
            out_bs[i0:i1] if store else empty,
            store,
        )
    if store:
        return out_d, out_bs
    return out_d, None


def estimate_psd(run: SimulationRun, omega_grid, xi_referred: bool = False) -> SpectrumCurve:
    """Segment-averaged periodogram of the detected quadrature.

    Hann window, 50% overlap, double-sided density convention (a vacuum
    input estimates to 1/2).  With ``xi_referred=True`` the estimate is
    divided by the squared model gain, expressing it in units of the
    sensed frequency perturbation.
    """
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise GridError("omega_grid must be a non-empty 1-d array")
    if grid.size > 1 and not np.all(np.diff(grid) > 0.0):
        raise GridError("omega_grid must be strictly increasing")
    if grid[0] < 0.0:
        raise GridError("omega_grid must be non-negative")
    dt = run.dt
    nyquist = math.pi / dt
    if grid[-1] > nyquist * (1.0 + 1e-12):
        raise GridError(f"omega_grid exceeds the Nyquist frequency {nyquist}")

    n = run.n_samples
    n_seg = run.config.n_segments
    nperseg = int(2 * n // (n_seg + 1))
    nperseg -= nperseg % 2
    if nperseg < 16:
        raise GridError(
            f"run of {n} samples cannot support {n_seg} half-overlapping segments"
        )

    freqs, pxx = _scipy_signal.welch(
        run.d_s,
        fs=1.0 / dt,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend=False,
        return_onesided=False,
        scaling="density",
    )
    pos = freqs >= 0.0
    omega_native = 2.0 * math.pi * freqs[pos]
    psd_native = pxx[pos]
    order = np.argsort(omega_native)
    omega_native = omega_native[order]
    psd_native = psd_native[order]
    if nperseg % 2 == 0:
        # Two-sided output stores the Nyquist bin at -fs/2; mirror it so
        # interpolation covers the full [0, pi/dt] range.
        i_ny = int(np.argmin(freqs))
        omega_native = np.append(omega_native, nyquist)
        psd_native = np.append(psd_native, pxx[i_ny])

    values = np.interp(grid, omega_native, psd_native)
    if xi_referred:
        gain = frequency_response(run.params, grid).gain
        values = values / np.abs(gain) ** 2
    return SpectrumCurve(
        omegas=grid,
        values=values,
        normalization=NORMALIZATION_RAW,
        scenario="simulated",
        params=params_to_dict(run.params),
    )


def measure_gain(
    params: SensorParams,
    probe_omega: float,
    probe_amplitude: float,
    config: SimulationConfig,
) -> float:
    """Estimate the signal-gain magnitude by coherent demodulation.

    Injects a sinusoidal frequency perturbation, demodulates the
    detected quadrature at the probe frequency over an integer number of
    periods, and returns the amplitude ratio.  The noise floor is read
    from nearby orthogonal demodulation bins; an amplitude-SNR below 10
    raises :class:`SnrError`.
    """
    if probe_omega <= 0.0:
        raise RangeError(f"probe_omega must be > 0, got {probe_omega}")
    if probe_amplitude <= 0.0:
        raise RangeError(f"probe_amplitude must be > 0, got {probe_amplitude}")
    cfg = replace(config, signal=SignalWaveform.sinusoid(probe_amplitude, probe_omega))
    run = simulate(params, cfg)

    n = run.n_samples
    dt = run.dt
    period = 2.0 * math.pi / probe_omega
    n_periods = int(n * dt / period)
    if n_periods < 4:
        raise ConfigError(
            f"run covers only {n_periods} probe periods; need at least 4"
        )
    n_demod = min(int(round(n_periods * period / dt)), n)
    t = run.t0 + dt * np.arange(n_demod)
    d = run.d_s[:n_demod]

    base = d * np.exp(-1j * probe_omega * t)
    z_probe = 2.0 * np.mean(base)

    # Noise floor from bin-spaced offsets (orthogonal over the window),
    # skipping the two bins adjacent to the probe to avoid its leakage.
    d_omega = 2.0 * math.pi / (n_demod * dt)
    step = np.exp(-1j * d_omega * t)
    offsets = []
    cur_up = base.copy()
    cur_dn = base.copy()
    step_conj = np.conj(step)
    for k in range(1, 11):
        cur_up = cur_up * step
        cur_dn = cur_dn * step_conj
        if k >= 3:
            offsets.append(2.0 * np.mean(cur_up))
            offsets.append(2.0 * np.mean(cur_dn))
    noise_floor = math.sqrt(float(np.mean(np.abs(np.array(offsets)) ** 2)))
    snr = abs(z_probe) / noise_floor if noise_floor > 0.0 else math.inf
    if snr < 10.0:
        raise SnrError(
            f"probe-bin amplitude SNR {snr:.2f} < 10; raise the probe amplitude "
            "or the run duration"
        )
    return float(abs(z_probe) / probe_amplitude)
