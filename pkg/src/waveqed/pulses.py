"""Pulse synthesis and FFT propagation through a transfer spectrum.

Field envelopes are complex baseband amplitudes relative to a carrier at
detuning Delta_c from the atomic resonance; |envelope|^2 is a photon flux
in natural time, so the envelope energy integral counts photons.  The
transform convention pairs u(delta) = integral u(t) exp(-i delta t) dt with
its inverse, which makes the Lorentzian 1/(1/2 + i delta) a causal decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .physics import EnsembleSpec
from .spectra import TransferSpectrum, _is_power_of_two, _single_atom_t

# Raised-cosine (cos^2 amplitude) edge geometry: fractions of the full ramp
# at which the instantaneous power crosses 10%, 50% and 90%.
_EDGE_X10 = math.asin(0.1 ** 0.25) / (math.pi / 2)
_EDGE_X50 = math.asin(0.5 ** 0.25) / (math.pi / 2)
_EDGE_X90 = math.asin(0.9 ** 0.25) / (math.pi / 2)
_EDGE_1090 = _EDGE_X90 - _EDGE_X10

MIN_EDGE_SAMPLES = 8          # grid samples required across a nonzero rise_fall
PADDING_FACTOR = 4.0          # time window must cover this many pulse durations
PADDING_TAIL = 20.0           # plus this much decay tail, in 1/Gamma0
ALIAS_BAND = 0.01             # outermost fraction of the frequency window
ALIAS_TOL = 1e-6              # spectral energy fraction allowed in that band
ENERGY_FLOOR = 1e-12          # stored-energy fraction below which rates are masked


def time_grid(span, n):
    """Uniform time grid of n samples whose conjugate detunings span [-span, span).

    The sample step is pi/span, so pulses on this grid pair with media
    evaluated on ``PulseWaveform.detunings()``.
    """
    if not _is_power_of_two(int(n)):
        raise ValueError(f"grid length must be a power of two, got {n}")
    return np.arange(int(n)) * (math.pi / float(span))


def _validate_time_grid(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or not _is_power_of_two(t.size):
        raise ValueError(f"time grid length must be a power of two, got shape {t.shape}")
    steps = np.diff(t)
    if t.size > 1 and (steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0)):
        raise ValueError("time grid must be uniform and increasing")
    return t


@dataclass(frozen=True)
class PulseWaveform:
    """Complex baseband field envelope on a uniform time grid.

    photon_number is the pulse energy in units of hbar*omega; the envelope
    is normalized so that sum(|envelope|^2) * dt reproduces it.  switch_off
    marks the instant the trailing edge completes (None if unknown).
    """

    t: np.ndarray
    envelope: np.ndarray
    carrier_detuning: float
    photon_number: float
    switch_off: float | None = None

    def __post_init__(self):
        t = _validate_time_grid(self.t)
        envelope = np.asarray(self.envelope, dtype=complex)
        if envelope.shape != t.shape:
            raise ValueError("time grid and envelope must have matching shapes")
        if self.photon_number < 0:
            raise ValueError("photon_number must be non-negative")
        dt = t[1] - t[0]
        energy = float(np.sum(np.abs(envelope) ** 2) * dt)
        if abs(energy - self.photon_number) > 1e-9 * max(self.photon_number, 1e-300):
            raise ValueError(
                f"envelope energy {energy} inconsistent with photon_number {self.photon_number}"
            )
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "envelope", envelope)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def detunings(self):
        """Ascending absolute detunings conjugate to the time grid."""
        return self.carrier_detuning + 2.0 * math.pi * np.fft.fftshift(
            np.fft.fftfreq(self.t.size, d=self.dt)
        )

    def power(self):
        """Instantaneous photon flux |envelope|^2."""
        return np.abs(self.envelope) ** 2

    def energy(self) -> float:
        return float(np.sum(self.power()) * self.dt)


def synthesize_pulse(t_grid, duration, rise_fall, carrier_detuning=0.0,
                     photon_number=1.0, start=1.0) -> PulseWaveform:
    """Boxcar pulse with raised-cosine edges, normalized to a photon number.

    duration is the separation of the 50% power points; rise_fall is the
    10-90% width of the power ramps (the full cos^2 amplitude ramp is about
    2.11x longer).  rise_fall = 0 gives an ideal boxcar; a nonzero
    rise_fall must be resolved by at least MIN_EDGE_SAMPLES grid steps.
    The grid must also cover PADDING_FACTOR * duration + PADDING_TAIL so
    slow decays do not wrap around in the transforms.
    """
    t = _validate_time_grid(t_grid)
    duration = float(duration)
    rise_fall = float(rise_fall)
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if rise_fall < 0:
        raise ValueError(f"rise_fall must be non-negative, got {rise_fall}")
    if rise_fall >= duration:
        raise ValueError(f"rise_fall {rise_fall} must be shorter than duration {duration}")
    dt = t[1] - t[0]
    if rise_fall > 0 and rise_fall < MIN_EDGE_SAMPLES * dt:
        raise ValueError(
            f"rise_fall {rise_fall} under-resolved: needs >= {MIN_EDGE_SAMPLES} samples "
            f"of dt = {dt:.3e}"
        )
    window = t[-1] - t[0] + dt
    needed = PADDING_FACTOR * duration + PADDING_TAIL
    if window < needed:
        raise ValueError(
            f"time window {window:.3g} too short; need >= {needed:.3g} "
            f"({PADDING_FACTOR}x duration + {PADDING_TAIL} tail)"
        )

    if rise_fall > 0:
        ramp = rise_fall / _EDGE_1090
        on = start - _EDGE_X50 * ramp                      # leading ramp begins
        off = start + duration - (1.0 - _EDGE_X50) * ramp  # trailing ramp begins
        if off < on + ramp:
            raise ValueError("edges overlap: duration too short for rise_fall")
        env = np.zeros(t.size)
        rising = (t >= on) & (t < on + ramp)
        env[rising] = np.sin(0.5 * math.pi * (t[rising] - on) / ramp) ** 2
        env[(t >= on + ramp) & (t < off)] = 1.0
        falling = (t >= off) & (t < off + ramp)
        env[falling] = np.cos(0.5 * math.pi * (t[falling] - off) / ramp) ** 2
        footprint = (on, off + ramp)
    else:
        env = ((t >= start) & (t < start + duration)).astype(float)
        footprint = (start, start + duration)
    if footprint[0] < t[0] or footprint[1] > t[-1]:
        raise ValueError("pulse footprint does not fit inside the time grid")

    energy = float(np.sum(env ** 2) * dt)
    if energy <= 0:
        raise ValueError("pulse footprint contains no grid samples")
    env = env.astype(complex) * math.sqrt(photon_number / energy)
    return PulseWaveform(t, env, float(carrier_detuning), float(photon_number),
                         switch_off=float(footprint[1]))


def _spectrum_fft_order(pulse: PulseWaveform):
    return np.fft.fft(pulse.envelope)


def _check_alias(pulse: PulseWaveform, spectrum):
    power = np.abs(spectrum) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return
    omega = 2.0 * math.pi * np.fft.fftfreq(pulse.t.size, d=pulse.dt)
    outer = np.abs(omega) >= (1.0 - ALIAS_BAND) * (math.pi / pulse.dt)
    fraction = float(np.sum(power[outer]) / total)
    if fraction > ALIAS_TOL:
        raise ValueError(
            f"aliasing guard: {fraction:.3e} of the spectral energy sits in the "
            f"outermost {ALIAS_BAND:.0%} of the frequency window (limit {ALIAS_TOL:g})"
        )


def propagate_pulse(pulse: PulseWaveform, medium: TransferSpectrum) -> PulseWaveform:
    """Transmit a pulse through a medium response.

    out(t) = F^{-1}[ u(delta) * T(delta) ] with the pulse spectrum centered
    at its carrier detuning, so the medium must be sampled exactly on
    ``pulse.detunings()``.  The operation is linear and grid-exact: scaling
    the input scales the output, and circular time shifts commute with it.
    """
    expected = pulse.detunings()
    if medium.delta.shape != expected.shape or not np.allclose(
        medium.delta, expected, rtol=0.0, atol=1e-9 * (abs(expected[0]) + abs(expected[-1]) + 1.0)
    ):
        raise ValueError(
            "grid mismatch: medium must be sampled on pulse.detunings() "
            f"(medium spans [{medium.delta[0]:.6g}, {medium.delta[-1]:.6g}], "
            f"pulse expects [{expected[0]:.6g}, {expected[-1]:.6g}])"
        )
    spectrum = _spectrum_fft_order(pulse)
    _check_alias(pulse, spectrum)
    response = np.fft.ifftshift(medium.amplitude)
    out = np.fft.ifft(spectrum * response)
    energy = float(np.sum(np.abs(out) ** 2) * pulse.dt)
    return PulseWaveform(pulse.t, out, pulse.carrier_detuning, energy,
                         switch_off=pulse.switch_off)


@dataclass(frozen=True)
class AtomTrajectorySet:
    """Per-atom excited-state dynamics plus derived ensemble traces.

    energy is the total stored excitation E(t) = sum_n p_n(t) over all
    atoms of the ensemble; gamma_coll = -dE/dt / E is NaN wherever E falls
    below ENERGY_FLOOR of its maximum (mask in ``valid``).  traces holds
    p_n(t) for the atoms listed in atom_indices, sampled on trace_t (a
    possibly strided copy of t).
    """

    t: np.ndarray
    energy: np.ndarray
    gamma_coll: np.ndarray
    valid: np.ndarray
    trace_t: np.ndarray
    traces: np.ndarray
    atom_indices: np.ndarray


def atom_dynamics(pulse: PulseWaveform, ensemble: EnsembleSpec,
                  trace_atoms=None, trace_stride=1) -> AtomTrajectorySet:
    """Excited-state probability of each atom driven by a pulse.

    p_n(t) = | F^{-1}[ u(delta) * phi_n(delta) ] |^2 with the cascade
    amplitudes phi_n of spectra.excitation_amplitudes, normalized so p_n is
    a probability for the pulse photon number (linear regime).  The
    collective rate trace uses a centered finite difference of E(t).

    trace_atoms selects which atoms to store (0-based; None = all, () =
    none); trace_stride subsamples the stored traces in time.
    """
    spectrum = _spectrum_fft_order(pulse)
    _check_alias(pulse, spectrum)
    delta = pulse.carrier_detuning + 2.0 * math.pi * np.fft.fftfreq(pulse.t.size, d=pulse.dt)
    n_atoms = ensemble.n_atoms
    if trace_atoms is None:
        selected = np.arange(n_atoms)
    else:
        selected = np.asarray(sorted(set(int(a) for a in trace_atoms)), dtype=int)
        if selected.size and (selected[0] < 0 or selected[-1] >= n_atoms):
            raise ValueError(f"trace_atoms out of range for {n_atoms} atoms")
    stride = int(trace_stride)
    if stride < 1:
        raise ValueError("trace_stride must be >= 1")
    trace_t = pulse.t[::stride]
    traces = np.empty((selected.size, trace_t.size))
    keep = {int(a): row for row, a in enumerate(selected)}

    energy = np.zeros(pulse.t.size)
    prefix = np.ones(pulse.t.size, dtype=complex)
    for n in range(n_atoms):
        t_n = _single_atom_t(delta, ensemble.beta[n], ensemble.shift[n])
        phi = 1j * prefix * (t_n - 1.0) / math.sqrt(ensemble.beta[n])
        p_n = np.abs(np.fft.ifft(spectrum * phi)) ** 2
        energy += p_n
        if n in keep:
            traces[keep[n]] = p_n[::stride]
        prefix *= t_n

    de_dt = np.gradient(energy, pulse.dt)
    valid = energy >= ENERGY_FLOOR * float(np.max(energy))
    gamma = np.full(pulse.t.size, np.nan)
    gamma[valid] = -de_dt[valid] / energy[valid]
    return AtomTrajectorySet(pulse.t, energy, gamma, valid, trace_t, traces, selected)


def collective_rate_at_switchoff(traj: AtomTrajectorySet, t_off, settle_delay=0.02) -> float:
    """Collective decay rate -dE/E evaluated at t_off + settle_delay.

    The small settle delay skips the switch-off edge transient; it must be
    short against the fastest collective decay of interest.
    """
    target = float(t_off) + float(settle_delay)
    if target < traj.t[0] or target > traj.t[-1]:
        raise ValueError(f"evaluation time {target} outside the trace window")
    idx = int(np.searchsorted(traj.t, target))
    idx = min(idx, traj.t.size - 1)
    if not traj.valid[idx]:
        raise ValueError("stored energy below floor at the requested time")
    return float(traj.gamma_coll[idx])
