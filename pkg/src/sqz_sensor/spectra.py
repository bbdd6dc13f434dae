"""Closed-form sensitivity spectral densities of the squeezed-probe sensor.

Every function returns the double-sided spectral density of the detected
sine-quadrature noise referred to the sensed eigenfrequency perturbation
(units of (rad/s)^2 * s in SI mode), except :func:`sum_noise_psd` which
is the un-referred detected noise.  The closed forms assume the
self-phase-modulation coupling is cancelled by the sine parametric gain;
the general solver in :mod:`sqz_sensor.dynamics` covers everything else.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .core import (
    NORMALIZATION_KP_OVER_N,
    NORMALIZATION_RAW,
    SCENARIO_DOUBLE_SQUEEZE_OPTIMAL,
    SCENARIO_INPUT_SQUEEZE,
    SCENARIO_NO_SQUEEZE,
    SCENARIO_SNL,
    Scenario,
    SensorParams,
    SpectrumCurve,
    params_to_dict,
)
from .errors import DoubleNormalizationError, RangeError


def _shape_match(omega, values):
    """Return a float for scalar input, the array otherwise."""
    if np.ndim(omega) == 0:
        return float(values)
    return values


def sum_noise_psd(params: SensorParams, omega):
    """Spectral density of the detected-quadrature sum noise.

    Combines the filtered input squeezed noise, the intrinsic-loss
    vacuum, and the detection vacuum behind the efficiency beamsplitter.
    """
    w2 = np.square(np.asarray(omega, dtype=float))
    kp, kpp, kc = params.kappa_prime, params.kappa_double_prime, params.k_c
    kappa = params.kappa
    em2r = math.exp(-2.0 * params.r_squeeze)
    lorentz = ((w2 + (kp - kpp - kc) ** 2) * em2r + 4.0 * kp * kpp) / (w2 + (kappa + kc) ** 2)
    values = 0.5 * params.eta * (lorentz + params.epsilon_sq)
    return _shape_match(omega, values)


def measurement_psd_raw(params: SensorParams, omega):
    """Sensitivity spectral density for an arbitrary cosine gain k_c.

    This is the sum noise divided by the squared gain magnitude; the
    cavity response cancels out of the ratio, leaving a quadratic in
    omega.  Requires ``|k_c| < kappa`` for stability.
    """
    if abs(params.k_c) >= params.kappa:
        raise RangeError(f"|k_c| = {abs(params.k_c)} must be < kappa = {params.kappa}")
    w2 = np.square(np.asarray(omega, dtype=float))
    kp, kpp, kc = params.kappa_prime, params.kappa_double_prime, params.k_c
    em2r = math.exp(-2.0 * params.r_squeeze)
    eps2 = params.epsilon_sq
    values = (
        (em2r + eps2) * w2
        + (kp - kpp - kc) ** 2 * em2r
        + 4.0 * kp * kpp
        + eps2 * (params.kappa + kc) ** 2
    ) / (8.0 * kp * params.n_photons)
    return _shape_match(omega, values)


def no_squeeze_psd(params: SensorParams, omega):
    """Sensitivity spectral density with a coherent probe and no internal gain."""
    w2 = np.square(np.asarray(omega, dtype=float))
    values = (w2 + params.kappa ** 2) / (8.0 * params.kappa_prime * params.eta * params.n_photons)
    return _shape_match(omega, values)


def input_squeeze_psd(params: SensorParams, omega):
    """Sensitivity spectral density with input squeezing only (k_c = 0)."""
    w2 = np.square(np.asarray(omega, dtype=float))
    kp, kpp = params.kappa_prime, params.kappa_double_prime
    em2r = math.exp(-2.0 * params.r_squeeze)
    eps2 = params.epsilon_sq
    inner = ((em2r + eps2) * w2 + (kp - kpp) ** 2 * em2r + eps2 * params.kappa ** 2) / (4.0 * kp)
    values = 0.5 * (inner + kpp) / params.n_photons
    return _shape_match(omega, values)


def double_squeeze_optimal_psd(params: SensorParams, omega):
    """Sensitivity spectral density at the loss-optimal internal gain.

    The optimum of the k_c-dependent terms is frequency independent, so
    the whole spectrum keeps the quadratic-in-omega form with its floor
    set by the balance of input squeezing against output losses.
    """
    w2 = np.square(np.asarray(omega, dtype=float))
    kp, kpp = params.kappa_prime, params.kappa_double_prime
    em2r = math.exp(-2.0 * params.r_squeeze)
    e2r = math.exp(2.0 * params.r_squeeze)
    eps2 = params.epsilon_sq
    values = 0.5 * (
        (em2r + eps2) * w2 / (4.0 * kp)
        + eps2 * kp / (1.0 + eps2 * e2r)
        + kpp
    ) / params.n_photons
    return _shape_match(omega, values)


def snl(params: SensorParams, omega):
    """Shot-noise-limit envelope |omega| / (4 N).

    Best sensitivity reachable with a coherent probe and no internal
    squeezing, optimizing the resonator bandwidth at each frequency.
    """
    values = np.abs(np.asarray(omega, dtype=float)) / (4.0 * params.n_photons)
    return _shape_match(omega, values)


def closed_form_psd(scenario: Scenario, params: SensorParams, omega):
    """Dispatch to the closed form matching ``scenario``.

    Raises :class:`ScenarioMismatchError` when the parameters contradict
    the scenario (for example a nonzero k_c in the input-squeeze case).
    """
    scenario.check(params)
    if scenario.tag == SCENARIO_NO_SQUEEZE:
        return no_squeeze_psd(params, omega)
    if scenario.tag == SCENARIO_INPUT_SQUEEZE:
        return input_squeeze_psd(params, omega)
    if scenario.tag == SCENARIO_DOUBLE_SQUEEZE_OPTIMAL:
        return double_squeeze_optimal_psd(params, omega)
    return measurement_psd_raw(params, omega)


LOSSLESS_INPUT_ONLY = "input_only"
LOSSLESS_DOUBLE = "double"


def lossless_resonator_psd(kind: str, params: SensorParams, omega):
    """Spectral densities for a resonator without intrinsic loss.

    ``kind="input_only"`` keeps input squeezing only; ``kind="double"``
    adds the optimal internal gain.  The two agree for all frequencies
    exactly when exp(-2r) equals the output-loss factor epsilon^2.
    """
    if params.kappa_double_prime != 0.0:
        raise RangeError(
            f"lossless forms require kappa_double_prime = 0, got {params.kappa_double_prime}"
        )
    w2 = np.square(np.asarray(omega, dtype=float))
    kappa = params.kappa
    em2r = math.exp(-2.0 * params.r_squeeze)
    eps2 = params.epsilon_sq
    pref = 1.0 / (8.0 * kappa * params.n_photons)
    if kind == LOSSLESS_INPUT_ONLY:
        values = pref * (em2r + eps2) * (w2 + kappa ** 2)
    elif kind == LOSSLESS_DOUBLE:
        values = pref * ((em2r + eps2) * w2 + 4.0 * kappa ** 2 * eps2 * em2r / (em2r + eps2))
    else:
        raise RangeError(f"kind must be {LOSSLESS_INPUT_ONLY!r} or {LOSSLESS_DOUBLE!r}, got {kind!r}")
    return _shape_match(omega, values)


def apply_external_antisqueeze(epsilon_ext_sq: float, r_anti: float):
    """Effective loss factor after anti-squeezing ahead of the loss source.

    Amplifying the measured quadrature by exp(2 R) before a downstream
    loss stage suppresses that stage's referred noise by exp(-2 R).
    """
    if epsilon_ext_sq < 0.0:
        raise RangeError(f"epsilon_ext_sq must be >= 0, got {epsilon_ext_sq}")
    if r_anti < 0.0:
        raise RangeError(f"r_anti must be >= 0, got {r_anti}")
    return epsilon_ext_sq * math.exp(-2.0 * r_anti)


def two_stage_epsilon_sq(eta_coupling: float, eta_detection: float, r_anti: float = 0.0) -> float:
    """Combined loss factor for a coupling stage followed by detection.

    The anti-squeezer sits between the two stages, so only the detection
    part is suppressed.  Callers decide how to split a total efficiency
    into ``eta_coupling * eta_detection``.  Referred to the signal, the
    downstream stage contributes ``(1 - eta_d) / (eta_d * eta_c)``; with
    no anti-squeezing the two stages compose to the loss factor of the
    product efficiency.
    """
    for name, eta in (("eta_coupling", eta_coupling), ("eta_detection", eta_detection)):
        if not 0.0 < eta <= 1.0:
            raise RangeError(f"{name} must be in (0, 1], got {eta}")
    eps_c = (1.0 - eta_coupling) / eta_coupling
    eps_ext = (1.0 - eta_detection) / (eta_detection * eta_coupling)
    return eps_c + apply_external_antisqueeze(eps_ext, r_anti)


def effective_eta(epsilon_sq: float) -> float:
    """Quantum efficiency equivalent to a given loss factor."""
    if epsilon_sq < 0.0:
        raise RangeError(f"epsilon_sq must be >= 0, got {epsilon_sq}")
    return 1.0 / (1.0 + epsilon_sq)


def normalize_curve(curve: SpectrumCurve, params: SensorParams) -> SpectrumCurve:
    """Express a raw curve in units of kappa' / N with frequencies in kappa'.

    Values are multiplied by N / kappa', frequencies divided by kappa'.
    """
    if curve.normalization != NORMALIZATION_RAW:
        raise DoubleNormalizationError("curve is already normalized")
    return replace(
        curve,
        omegas=curve.omegas / params.kappa_prime,
        values=curve.values * (params.n_photons / params.kappa_prime),
        normalization=NORMALIZATION_KP_OVER_N,
    )


def denormalize_curve(curve: SpectrumCurve, params: SensorParams) -> SpectrumCurve:
    """Inverse of :func:`normalize_curve`."""
    if curve.normalization != NORMALIZATION_KP_OVER_N:
        raise DoubleNormalizationError("curve is not normalized")
    return replace(
        curve,
        omegas=curve.omegas * params.kappa_prime,
        values=curve.values * (params.kappa_prime / params.n_photons),
        normalization=NORMALIZATION_RAW,
    )


def scenario_curve(scenario: Scenario, params: SensorParams, omegas) -> SpectrumCurve:
    """Sample a scenario's closed form on a frequency grid."""
    params_m = scenario.materialize(params)
    w = np.asarray(omegas, dtype=float)
    values = closed_form_psd(scenario, params_m, w)
    return SpectrumCurve(
        omegas=w,
        values=values,
        normalization=NORMALIZATION_RAW,
        scenario=scenario.tag,
        params=params_to_dict(params_m),
    )


def snl_curve(params: SensorParams, omegas) -> SpectrumCurve:
    """Sample the shot-noise-limit envelope on a frequency grid."""
    w = np.asarray(omegas, dtype=float)
    return SpectrumCurve(
        omegas=w,
        values=snl(params, w),
        normalization=NORMALIZATION_RAW,
        scenario=SCENARIO_SNL,
        params=params_to_dict(params),
    )
