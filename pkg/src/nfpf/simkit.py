"""Independent numerical oracle: fixed-step RK4 integration, reconstruction
gap measurement and FFT peak picking.

Deliberately shares nothing with the normal-form reconstruction beyond the
model type, so it can arbitrate its accuracy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import DivergenceError, IntegrationAccuracyWarning
from .normalform import invert_initial_condition, reconstruct_response
from .sysmodel import QuadraticModel

__all__ = ["Trajectory", "integrate", "reconstruction_error", "dominant_frequencies"]

SELF_CHECK_TOL = 1e-8
PEAK_THRESHOLD = 0.05


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step trajectory: times (T,), states (n, T), step dt."""

    times: np.ndarray
    states: np.ndarray
    dt: float
    warning: str | None = None

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states contain non-finite values")
        self.times.setflags(write=False)
        self.states.setflags(write=False)

    @property
    def n(self) -> int:
        return self.states.shape[0]


def _rk4(f, x0, dt, steps):
    n = x0.shape[0]
    out = np.empty((n, steps + 1))
    out[:, 0] = x0
    x = x0.copy()
    for j in range(steps):
        k1 = f(x)
        k2 = f(x + 0.5 * dt * k1)
        k3 = f(x + 0.5 * dt * k2)
        k4 = f(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError((j + 1) * dt)
        out[:, j + 1] = x
    return out


def integrate(model, x0, dt, t_end, self_check=True) -> Trajectory:
    """Integrate a QuadraticModel or raw vector field with classical RK4.

    The grid is j*dt for j = 0..round(t_end/dt).  With ``self_check`` a
    half-step rerun is compared on the shared points; a gap above 1e-8
    attaches an :class:`IntegrationAccuracyWarning` to the trajectory.

    Raises :class:`DivergenceError` when the state leaves the finite range.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end <= 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    f = model.rhs if isinstance(model, QuadraticModel) else model
    x0 = np.asarray(x0, dtype=float)
    steps = max(1, int(round(t_end / dt)))
    states = _rk4(f, x0, dt, steps)
    times = np.arange(steps + 1) * dt

    note = None
    if self_check:
        fine = _rk4(f, x0, 0.5 * dt, 2 * steps)
        gap = float(np.max(np.abs(states - fine[:, ::2])))
        if gap > SELF_CHECK_TOL:
            note = (
                f"step-halving self check gap {gap:.3e} exceeds "
                f"{SELF_CHECK_TOL:g}; consider a smaller dt"
            )
            warnings.warn(note, IntegrationAccuracyWarning, stacklevel=2)
    return Trajectory(times=times, states=states, dt=float(dt), warning=note)


def reconstruction_error(model, basis, nf, x0, t_end, dt=0.005):
    """Max-norm gap between the 2nd-order reconstruction and RK4.

    Returns ``(max_gap, gap_curve)`` over the shared grid.
    """
    traj = integrate(model, x0, dt, t_end)
    z0 = invert_initial_condition(basis, nf, x0)
    recon = reconstruct_response(basis, nf, z0, traj.times)
    gap_curve = np.max(np.abs(recon - traj.states), axis=0)
    return float(gap_curve.max()), gap_curve


def dominant_frequencies(traj: Trajectory, k: int, threshold=PEAK_THRESHOLD):
    """FFT magnitude peaks of state k above ``threshold`` of the maximum.

    The mean is removed first; peaks are local maxima of the one-sided
    magnitude spectrum, returned as (freq_hz, relative_amplitude) sorted by
    frequency.  Frequency resolution is 1/t_end.  Requires a uniform grid
    with at least 256 samples.
    """
    times = traj.times
    if times.size < 256:
        raise ValueError(f"trajectory too short for spectral analysis: {times.size} < 256 samples")
    steps = np.diff(times)
    if np.max(np.abs(steps - traj.dt)) > 1e-9 * traj.dt:
        raise ValueError("trajectory grid is not uniform")

    signal = traj.states[k] - traj.states[k].mean()
    mags = np.abs(np.fft.rfft(signal))
    freqs = np.fft.rfftfreq(times.size, traj.dt)
    peak_mag = float(mags[1:].max(initial=0.0))
    if peak_mag == 0.0:
        return []
    idx, _ = find_peaks(mags, height=threshold * peak_mag)
    return [(float(freqs[i]), float(mags[i] / peak_mag)) for i in idx]
