"""Decay-rate extraction and derived sweeps.

Rates come from weighted least squares on the log of a power trace, with
weights proportional to the trace (shot-noise-like weighting).  The
residual periodogram exposes small oscillations riding on a fitted decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .disorder import DisorderModel, average_observable
from .physics import BETA_DEFAULT, EnsembleSpec, Units, od_to_atom_number
from .pulses import (
    atom_dynamics,
    collective_rate_at_switchoff,
    propagate_pulse,
    synthesize_pulse,
    time_grid,
)
from .spectra import transfer_bidirectional, transfer_unidirectional

_UNITS = Units()
SETTLE_DELAY = _UNITS.time_from_si(1e-9)       # skip the switch-off transient
WINDOW_LONG = _UNITS.time_from_si(30e-9)       # default fit window
WINDOW_SHORT = _UNITS.time_from_si(15e-9)      # fit window for fast decays
WINDOW_SHORT_OD = 20.7                         # switch point between the two
DURATION_150NS = _UNITS.time_from_si(150e-9)
RISE_FALL_850PS = _UNITS.time_from_si(850e-12)


@dataclass(frozen=True)
class DecayFit:
    """Exponential fit A exp(-rate (t - window[0])) of a power trace.

    amplitude is the model value at the window start; residuals are on the
    original power scale, sampled on t.
    """

    rate: float
    amplitude: float
    window: tuple
    rms_residual: float
    t: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"fitted rate must be positive, got {self.rate}")
        if not self.window[1] > self.window[0]:
            raise ValueError("fit window must be increasing")
        if self.rms_residual < 0:
            raise ValueError("rms_residual must be non-negative")

    def model(self, t):
        return self.amplitude * np.exp(-self.rate * (np.asarray(t) - self.window[0]))


def fit_pulse_decay(t, power, t_off, window_len, settle_delay=SETTLE_DELAY,
                    min_points=8) -> DecayFit:
    """Fit A exp(-rate t) to a power trace after switch-off.

    The window starts at the first sample after t_off + settle_delay and
    runs for window_len.  The fit is linear in log(power) with weights
    proportional to the trace; non-positive samples inside the window are
    rejected (shorten the window instead).
    """
    t = np.asarray(t, dtype=float)
    power = np.asarray(power, dtype=float)
    if t.shape != power.shape:
        raise ValueError("time and power traces must have matching shapes")
    start = float(t_off) + float(settle_delay)
    i0 = int(np.searchsorted(t, start, side="right"))
    i1 = int(np.searchsorted(t, start + float(window_len), side="right"))
    if i1 - i0 < min_points:
        raise ValueError(
            f"fit window [{start:.4g}, {start + window_len:.4g}] holds "
            f"{i1 - i0} samples; need >= {min_points}"
        )
    x = t[i0:i1]
    y = power[i0:i1]
    if np.any(y <= 0):
        raise ValueError("non-positive samples in the fit window; shorten the window")
    xs = x - x[0]
    slope, intercept = np.polyfit(xs, np.log(y), 1, w=np.sqrt(y))
    rate = -float(slope)
    if rate <= 0:
        raise ValueError(f"trace does not decay over the window (fitted rate {rate:.3g})")
    amplitude = float(math.exp(intercept))
    residuals = y - amplitude * np.exp(-rate * xs)
    rms = float(np.sqrt(np.mean(residuals ** 2)))
    return DecayFit(rate, amplitude, (float(x[0]), float(x[-1])), rms, x.copy(), residuals)


@dataclass(frozen=True)
class ResidualSpectrum:
    """Hann-windowed periodogram of fit residuals.

    frequency is angular, in Gamma0; peak_frequency is NaN when no peak is
    found above min_frequency.
    """

    frequency: np.ndarray
    psd: np.ndarray
    peak_frequency: float
    peak_prominence: float
    min_frequency: float


def residual_spectrum(fit: DecayFit, min_frequency=None) -> ResidualSpectrum:
    """Power spectral density of the fit residuals, with peak finding.

    The fit window must hold at least four periods of min_frequency
    (default: exactly the four-period limit of the window).
    """
    res = fit.residuals
    t = fit.t
    n = res.size
    window = float(t[-1] - t[0])
    if window <= 0 or n < 8:
        raise ValueError("residual trace too short for a periodogram")
    limit = 4.0 * 2.0 * math.pi / window
    if min_frequency is None:
        min_frequency = limit
    elif min_frequency < limit:
        raise ValueError(
            f"window holds fewer than 4 periods of min_frequency {min_frequency:.4g} "
            f"(limit {limit:.4g})"
        )
    dt = float(t[1] - t[0])
    taper = np.hanning(n)
    spec = np.fft.rfft(res * taper)
    freq = 2.0 * math.pi * np.fft.rfftfreq(n, d=dt)
    psd = (np.abs(spec) ** 2) * (2.0 * dt / np.sum(taper ** 2))

    band = freq >= min_frequency
    peak_freq, prominence = math.nan, 0.0
    if np.any(band):
        peaks, props = find_peaks(psd[band], prominence=0.0)
        if peaks.size:
            best = int(np.argmax(props["prominences"]))
            peak_freq = float(freq[band][peaks[best]])
            prominence = float(props["prominences"][best])
    return ResidualSpectrum(freq, psd, peak_freq, prominence, float(min_frequency))


@dataclass(frozen=True)
class DirectionalDecay:
    """Forward and backward decay fits at one carrier detuning."""

    detuning: float
    forward: DecayFit
    backward: DecayFit


def backward_decay_sweep(od, detunings, beta=BETA_DEFAULT, n_configs=64, seed=0,
                         duration=DURATION_150NS, rise_fall=RISE_FALL_850PS,
                         photon_number=1.0, span=1024.0, grid_points=2 ** 14,
                         forward_window=WINDOW_SHORT, backward_window=WINDOW_LONG,
                         fit_cycles=2.0, settle_delay=SETTLE_DELAY, n_workers=1):
    """Disorder-averaged forward/backward decay rates versus detuning.

    For each carrier detuning, the pulse is propagated through the
    two-way transmission and reflection of every random configuration,
    the power traces are averaged, and each direction is fitted with the
    initial-rate protocol under its own window cap (forward decays are
    collective and fast, backward light decays near the intrinsic rate).
    Power traces are symmetric under detuning sign flip, so sweeping
    positive detunings covers |delta|.
    """
    n_atoms = od_to_atom_number(od, beta)
    model = DisorderModel(n_atoms=n_atoms, beta_mean=beta, seed=seed)
    t = time_grid(span, grid_points)
    results = []
    for carrier in detunings:
        pulse = synthesize_pulse(t, duration, rise_fall, carrier_detuning=float(carrier),
                                 photon_number=photon_number)
        delta = pulse.detunings()

        def both_directions(ens, _pulse=pulse, _delta=delta):
            t_spec, r_spec = transfer_bidirectional(_delta, ens)
            forward = propagate_pulse(_pulse, t_spec).power()
            backward = propagate_pulse(_pulse, r_spec).power()
            return np.stack([forward, backward])

        mean, _ = average_observable(model, n_configs, both_directions, n_workers=n_workers)
        fwd = fit_initial_decay(pulse.t, mean[0], pulse.switch_off, forward_window,
                                settle_delay, fit_cycles)
        bwd = fit_initial_decay(pulse.t, mean[1], pulse.switch_off, backward_window,
                                settle_delay, fit_cycles)
        results.append(DirectionalDecay(float(carrier), fwd, bwd))
    return results


@dataclass(frozen=True)
class CollectiveDecayPoint:
    """Pulse decay fit and collective rate at switch-off for one OD."""

    od: float
    n_atoms: int
    pulse_fit: DecayFit
    gamma_coll: float


def fit_initial_decay(t, power, t_off, window_cap, settle_delay=SETTLE_DELAY,
                      fit_cycles=2.0, passes=3, bootstrap_window=0.3,
                      min_points=20) -> DecayFit:
    """Initial decay rate: the fit window adapts to ~fit_cycles decay times.

    A short bootstrap window pins the flash decay first, then the window
    is refitted at fit_cycles / rate (never longer than window_cap, never
    shorter than min_points samples).  For slow decays the cap binds and
    this reduces to a plain windowed fit; for fast collective decays it
    keeps the window on the initial flash instead of the later ringing
    structure.
    """
    dt = float(np.asarray(t)[1] - np.asarray(t)[0])
    floor = min_points * dt
    window = min(float(window_cap), max(float(bootstrap_window), floor))
    fit = fit_pulse_decay(t, power, t_off, window, settle_delay, min_points=min_points)
    for _ in range(passes - 1):
        window = min(float(window_cap), max(fit_cycles / fit.rate, floor))
        fit = fit_pulse_decay(t, power, t_off, window, settle_delay, min_points=min_points)
    return fit


def collective_decay_vs_od(od_values, detuning, beta=BETA_DEFAULT,
                           duration=DURATION_150NS, rise_fall=RISE_FALL_850PS,
                           photon_number=2.0, span=1024.0, grid_points=2 ** 15,
                           window_long=WINDOW_LONG, window_short=WINDOW_SHORT,
                           window_short_od=WINDOW_SHORT_OD, fit_cycles=2.0,
                           settle_delay=SETTLE_DELAY, rate_settle=0.02):
    """Forward pulse decay rate and collective rate across an OD sweep.

    Uses the forward cascade (position independent).  The fit window is
    capped at window_long (window_short above window_short_od, where the
    decays are much faster) and then adapted to ~fit_cycles decay times so
    the fit tracks the initial flash decay; fit_cycles=None keeps the
    fixed-window fit.
    """
    t = time_grid(span, grid_points)
    pulse = synthesize_pulse(t, duration, rise_fall, carrier_detuning=float(detuning),
                             photon_number=photon_number)
    delta = pulse.detunings()
    points = []
    for od in od_values:
        ens = EnsembleSpec.from_od(od, beta)
        out = propagate_pulse(pulse, transfer_unidirectional(delta, ens))
        cap = window_long if od <= window_short_od else window_short
        if fit_cycles is None:
            fit = fit_pulse_decay(out.t, out.power(), pulse.switch_off, cap, settle_delay)
        else:
            fit = fit_initial_decay(out.t, out.power(), pulse.switch_off, cap,
                                    settle_delay, fit_cycles)
        traj = atom_dynamics(pulse, ens, trace_atoms=())
        gamma = collective_rate_at_switchoff(traj, pulse.switch_off, rate_settle)
        points.append(CollectiveDecayPoint(float(od), ens.n_atoms, fit, gamma))
    return points
