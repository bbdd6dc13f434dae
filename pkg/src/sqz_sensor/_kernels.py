"""Time-stepping kernels for the Langevin integrator.

These sequential recurrences are the only hot loops in the package.  They
are compiled with numba when it is importable; the environment variable
``SQZ_SENSOR_BACKEND`` overrides the choice:

* unset or ``auto``: numba if available, plain Python otherwise;
* ``numba``: require the compiled path, raise if numba is missing;
* ``numpy``: force the plain-Python fallback (same code, much slower).

Both paths execute the same function body, so they agree to floating
point round-off.  ``benchmarks/benchmark_kernels.py`` compares them.
"""

from __future__ import annotations

import os

from .errors import ConfigError

ENV_BACKEND = "SQZ_SENSOR_BACKEND"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via SQZ_SENSOR_BACKEND=numpy
    HAS_NUMBA = False


def _euler_maruyama_loop(bc, bs, mcc, mcs, msc, mss, dt,
                         a_c, a_s, v_c, v_s, u_s, xi_drive,
                         p_bs, q_as, q_us, c_a, c_v,
                         out_d, out_bc, out_bs, store):
    # Noise arrays hold bin-averaged white-noise samples (variance
    # PSD/dt).  The detected sample combines the bin average of the
    # intracavity state, taken as the midpoint of the step, with the
    # same a_s sample that drives the cavity over the bin; an endpoint
    # state would bias the interference term at first order in dt.
    n = a_s.shape[0]
    for i in range(n):
        f_c = c_a * a_c[i] + c_v * v_c[i]
        f_s = c_a * a_s[i] + c_v * v_s[i] + xi_drive[i]
        bc_next = bc + dt * (f_c - mcc * bc - mcs * bs)
        bs_next = bs + dt * (f_s - msc * bc - mss * bs)
        out_d[i] = p_bs * 0.5 * (bs + bs_next) + q_as * a_s[i] + q_us * u_s[i]
        if store:
            out_bc[i] = bc
            out_bs[i] = bs
        bc = bc_next
        bs = bs_next
    return bc, bs


def _exact_relax_loop(bs, decay, a_bar, w_drive, u_s,
                      p_bs, q_as, q_us, out_d, out_bs, store):
    # Exact one-step relaxation of the decoupled measured quadrature:
    # the per-step drive increments in w_drive already carry the exact
    # within-step filtering and their correlation with a_bar.  The
    # detector uses the same midpoint state average as the default path.
    n = a_bar.shape[0]
    for i in range(n):
        bs_next = decay * bs + w_drive[i]
        out_d[i] = p_bs * 0.5 * (bs + bs_next) + q_as * a_bar[i] + q_us * u_s[i]
        if store:
            out_bs[i] = bs
        bs = bs_next
    return bs


if HAS_NUMBA:
    _euler_maruyama_jit = njit(cache=True)(_euler_maruyama_loop)
    _exact_relax_jit = njit(cache=True)(_exact_relax_loop)


def active_backend() -> str:
    """Resolve the kernel backend from the environment."""
    env = os.environ.get(ENV_BACKEND, "auto").strip().lower()
    if env in ("", "auto"):
        return "numba" if HAS_NUMBA else "numpy"
    if env == "numba":
        if not HAS_NUMBA:
            raise ConfigError(f"{ENV_BACKEND}=numba requested but numba is not importable")
        return "numba"
    if env == "numpy":
        return "numpy"
    raise ConfigError(f"unknown {ENV_BACKEND} value {env!r} (use auto, numba, or numpy)")


def euler_maruyama_loop(*args):
    if active_backend() == "numba":
        return _euler_maruyama_jit(*args)
    return _euler_maruyama_loop(*args)


def exact_relax_loop(*args):
    if active_backend() == "numba":
        return _exact_relax_jit(*args)
    return _exact_relax_loop(*args)
