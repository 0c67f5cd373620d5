"""Core conventions and single-emitter response of a waveguide-coupled atom array.

Everything internal runs in natural units: the intrinsic decay rate Gamma0
equals 1, times are measured in 1/Gamma0 and angular detunings in Gamma0.
SI values cross the boundary only through :class:`Units`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GAMMA0_HZ = 5.2e6       # intrinsic linewidth Gamma0/2pi of the probed transition
BETA_DEFAULT = 0.55e-2  # mean guided-mode coupling ratio per atom


@dataclass(frozen=True)
class Units:
    """Conversions between natural units (Gamma0 = 1) and SI.

    A time of 1 in natural units is 1/Gamma0 = 1/(2 pi gamma0_hz) seconds;
    an angular rate of 1 in natural units oscillates at gamma0_hz cycles
    per second.
    """

    gamma0_hz: float = GAMMA0_HZ

    def __post_init__(self):
        if not self.gamma0_hz > 0:
            raise ValueError(f"gamma0_hz must be positive, got {self.gamma0_hz}")

    @property
    def gamma0_rad_per_s(self) -> float:
        return 2.0 * math.pi * self.gamma0_hz

    def time_to_si(self, t_natural):
        """Time in 1/Gamma0 -> seconds."""
        return t_natural / self.gamma0_rad_per_s

    def time_from_si(self, t_seconds):
        """Seconds -> time in 1/Gamma0."""
        return t_seconds * self.gamma0_rad_per_s

    def frequency_to_hz(self, rate_natural):
        """Angular rate or detuning in Gamma0 -> ordinary frequency in Hz."""
        return rate_natural * self.gamma0_hz

    def frequency_from_hz(self, f_hz):
        """Ordinary frequency in Hz -> angular rate in Gamma0."""
        return f_hz / self.gamma0_hz


def _as_beta_array(beta, n=None):
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if n is not None and beta.size == 1:
        beta = np.full(n, beta[0])
    if np.any(beta <= 0.0) or np.any(beta > 0.5):
        raise ValueError("coupling ratio beta must lie in (0, 0.5]")
    return beta


@dataclass(frozen=True)
class EnsembleSpec:
    """A discrete chain of two-level emitters coupled to one guided mode.

    beta  : per-atom ratio of the guided-mode emission rate to the total
            rate Gamma0, each in (0, 0.5]; 0.5 means fully waveguide
            coupled (one half per propagation direction).
    phase : theta_n = 2 k x_n mod 2pi.  Only the bidirectional model reads
            it; the forward cascade is position independent.
    shift : optional per-atom resonance offset in Gamma0 (inhomogeneous
            broadening knob), zero by default.
    """

    beta: np.ndarray
    phase: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        beta = _as_beta_array(self.beta)
        phase = np.atleast_1d(np.asarray(self.phase, dtype=float))
        shift = np.atleast_1d(np.asarray(self.shift, dtype=float))
        if beta.size < 1:
            raise ValueError("ensemble needs at least one atom")
        if phase.size == 1 and beta.size > 1:
            phase = np.full(beta.size, phase[0])
        if shift.size == 1 and beta.size > 1:
            shift = np.full(beta.size, shift[0])
        if not (beta.size == phase.size == shift.size):
            raise ValueError(
                f"beta/phase/shift lengths differ: {beta.size}, {phase.size}, {shift.size}"
            )
        phase = np.mod(phase, 2.0 * math.pi)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "shift", shift)

    @property
    def n_atoms(self) -> int:
        return self.beta.size

    @classmethod
    def uniform(cls, n_atoms, beta=BETA_DEFAULT, phase=0.0, shift=0.0):
        """Ensemble of n_atoms identical emitters."""
        n_atoms = int(n_atoms)
        if n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {n_atoms}")
        return cls(
            beta=np.full(n_atoms, float(beta)),
            phase=np.full(n_atoms, float(phase)),
            shift=np.full(n_atoms, float(shift)),
        )

    @classmethod
    def from_od(cls, od, beta=BETA_DEFAULT, phase=0.0, shift=0.0):
        """Uniform ensemble sized to a resonant optical depth."""
        return cls.uniform(od_to_atom_number(od, beta), beta=beta, phase=phase, shift=shift)


def single_atom_coefficients(delta, beta=BETA_DEFAULT):
    """Amplitude transmission and reflection of one emitter.

    t(delta) = 1 - beta / (1/2 + i delta)
    r(delta) = -beta / (1/2 + i delta)

    with Gamma0 = 1, so t - r = 1 identically.  Accepts scalar or array
    detunings.
    """
    beta = np.asarray(beta, dtype=float)
    if np.any(beta <= 0.0) or np.any(beta > 0.5):
        raise ValueError("coupling ratio beta must lie in (0, 0.5]")
    r = -beta / (0.5 + 1j * np.asarray(delta, dtype=float))
    return 1.0 + r, r


def od_to_atom_number(od, beta=BETA_DEFAULT) -> int:
    """Number of atoms giving resonant power transmission exp(-od).

    Calibrated through |t(0)|^(2N) = (1 - 2 beta)^(2N) = exp(-od), i.e.
    N = round(-od / (2 ln(1 - 2 beta))).  beta = 0.5 is rejected (the
    logarithm is singular there).
    """
    od = float(od)
    beta = float(beta)
    if od < 0:
        raise ValueError(f"optical depth must be non-negative, got {od}")
    if not 0.0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 0.5) for the OD calibration")
    return int(round(-od / (2.0 * math.log1p(-2.0 * beta))))


def resonant_od(n_atoms, beta=BETA_DEFAULT) -> float:
    """Resonant optical depth of n_atoms identical emitters, -2N ln(1-2beta)."""
    if not 0.0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 0.5) for the OD calibration")
    return -2.0 * int(n_atoms) * math.log1p(-2.0 * beta)
