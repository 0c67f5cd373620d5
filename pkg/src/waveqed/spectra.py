"""Frequency-domain ensemble response.

Forward cascade product, bidirectional scattering recursion with positional
phases, per-atom excitation amplitudes, and the fiber-ring dressing of a
medium response.  All detunings are angular, in units of Gamma0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .physics import EnsembleSpec

RECURSION_EPS = 1e-12  # denominator-modulus floor flagged as degenerate


class DegenerateDenominatorWarning(UserWarning):
    """A scattering denominator dropped below the configured epsilon.

    The value is still computed in complex arithmetic; the warning flags
    Bragg-ordered near-resonant configurations (or unphysical ring-gain
    parameters) where the formulas become numerically singular.
    """


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _validate_grid(values, name="detuning grid"):
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not _is_power_of_two(values.size):
        raise ValueError(f"{name} length must be a power of two, got {values.size}")
    if values.size > 1:
        steps = np.diff(values)
        if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError(f"{name} must be uniform and increasing")
    return values


def detuning_grid(span, n):
    """Uniform FFT-style grid of n detunings covering [-span, span).

    n must be a power of two; the grid contains 0 and has spacing 2*span/n.
    """
    if not _is_power_of_two(int(n)):
        raise ValueError(f"grid length must be a power of two, got {n}")
    n = int(n)
    step = 2.0 * float(span) / n
    return (np.arange(n) - n // 2) * step


@dataclass(frozen=True)
class TransferSpectrum:
    """Complex amplitude response sampled on a uniform detuning grid."""

    delta: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        delta = _validate_grid(self.delta)
        amplitude = np.asarray(self.amplitude, dtype=complex)
        if amplitude.shape != delta.shape:
            raise ValueError("delta and amplitude must have matching shapes")
        peak = float(np.max(np.abs(amplitude)))
        if peak > 1.0 + 1e-9:
            raise ValueError(f"passive response requires |amplitude| <= 1, got max {peak}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "amplitude", amplitude)

    @property
    def spacing(self) -> float:
        if self.delta.size < 2:
            return 0.0
        return float(self.delta[1] - self.delta[0])

    def power(self):
        return np.abs(self.amplitude) ** 2


def _single_atom_t(delta, beta, shift):
    return 1.0 - beta / (0.5 + 1j * (delta - shift))


def transfer_unidirectional(delta, ensemble: EnsembleSpec) -> TransferSpectrum:
    """Forward amplitude transmission of the cascade.

    t_N(delta) = prod_j (1 - beta_j / (1/2 + i (delta - shift_j)))

    Independent of the positional phases.  For a uniform ensemble the
    product collapses to a single power.
    """
    delta = _validate_grid(delta)
    beta, shift = ensemble.beta, ensemble.shift
    if np.ptp(beta) == 0.0 and np.ptp(shift) == 0.0:
        amp = _single_atom_t(delta, beta[0], shift[0]) ** ensemble.n_atoms
    else:
        amp = np.ones(delta.size, dtype=complex)
        for b, s in zip(beta, shift):
            amp *= _single_atom_t(delta, b, s)
    return TransferSpectrum(delta, amp)


def excitation_amplitudes(delta, ensemble: EnsembleSpec):
    """Steady-state excitation amplitude of each atom in the forward cascade.

    phi_n(delta) = i (prod_{j<n} t_j) (t_n - 1) / sqrt(beta_n)

    normalized so that |phi_n|^2 maps an input photon flux onto an
    excited-state probability (see pulses.atom_dynamics).  Successive
    amplitudes satisfy phi_{n+1}/phi_n = t for a uniform ensemble.

    Returns an array of shape (n_atoms,) for scalar detuning, otherwise
    (n_atoms, len(delta)).
    """
    d = np.atleast_1d(np.asarray(delta, dtype=float))
    scalar = np.ndim(delta) == 0
    out = np.empty((ensemble.n_atoms, d.size), dtype=complex)
    prefix = np.ones(d.size, dtype=complex)
    for j, (b, s) in enumerate(zip(ensemble.beta, ensemble.shift)):
        t_j = _single_atom_t(d, b, s)
        out[j] = 1j * prefix * (t_j - 1.0) / math.sqrt(b)
        prefix = prefix * t_j
    return out[:, 0] if scalar else out


@dataclass(frozen=True)
class BidirectionalState:
    """Per-atom field ratios of the two-way scattering recursion.

    t[n] is the forward amplitude ratio across atom n+1; s[n] is the
    backward-to-forward ratio just before atom n+1, with the excitation
    from one side only enforced by s[N] = 0.  Intended for small
    ensembles; memory grows as n_atoms * grid size.
    """

    t: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        if self.s.shape[0] != self.t.shape[0] + 1:
            raise ValueError("s must have one more row than t")
        if np.any(self.s[-1] != 0):
            raise ValueError("open boundary requires s[N] = 0")


def _recursion(delta, ensemble, eps, keep_state):
    delta = _validate_grid(delta)
    n_atoms = ensemble.n_atoms
    base = 0.5 + 1j * delta
    s = np.zeros(delta.size, dtype=complex)
    t_prod = np.ones(delta.size, dtype=complex)
    t_rows = np.empty((n_atoms, delta.size), dtype=complex) if keep_state else None
    s_rows = np.zeros((n_atoms + 1, delta.size), dtype=complex) if keep_state else None
    degenerate = 0
    min_den = math.inf
    for n in range(n_atoms - 1, -1, -1):
        b = ensemble.beta[n]
        e_plus = complex(np.exp(1j * ensemble.phase[n]))
        # ratio = (beta_n + beta_n s e^{-i theta}) / (1/2 + i(delta-shift) + ...)
        ratio = (b * e_plus.conjugate()) * s
        den = ratio + base if ensemble.shift[n] == 0.0 else ratio + base - 1j * ensemble.shift[n]
        if eps > 0:
            den_mod = np.abs(den)
            small_min = float(den_mod.min())
            if small_min < eps:
                degenerate += int(np.count_nonzero(den_mod < eps))
                min_den = min(min_den, small_min)
        ratio += b
        ratio /= den
        t_n = 1.0 - ratio
        # s_n = (t_n - 1) e^{i theta} + s_{n+1} t_n, and (t_n - 1) = -ratio
        s *= t_n
        ratio *= e_plus
        s -= ratio
        t_prod *= t_n
        if keep_state:
            t_rows[n] = t_n
            s_rows[n] = s
    if degenerate:
        warnings.warn(
            f"{degenerate} grid point(s) with scattering denominator below "
            f"{eps:g} (min |den| = {min_den:.3e})",
            DegenerateDenominatorWarning,
            stacklevel=3,
        )
    state = BidirectionalState(t_rows, s_rows) if keep_state else None
    return delta, t_prod, s, state


def transfer_bidirectional(delta, ensemble: EnsembleSpec, eps=RECURSION_EPS):
    """Ensemble transmission and reflection from the two-way recursion.

    Solving from the far end (open boundary, excitation from one side)
    down to the first atom:

        t_n = 1 - (beta_n + beta_n s_{n+1} e^{-i theta_n})
                  / (1/2 + i delta + beta_n s_{n+1} e^{-i theta_n})
        s_n = (t_n - 1) e^{i theta_n} + s_{n+1} t_n

    with theta_n the stored positional phase.  Returns the pair
    (transmission, reflection) = (prod_n t_n, s_1) as TransferSpectrum.
    Degenerate denominators (modulus < eps) trigger a
    DegenerateDenominatorWarning; the values are still computed.
    """
    delta, t_prod, s, _ = _recursion(delta, ensemble, eps, keep_state=False)
    return TransferSpectrum(delta, t_prod), TransferSpectrum(delta, s)


def bidirectional_state(delta, ensemble: EnsembleSpec, eps=RECURSION_EPS) -> BidirectionalState:
    """Materialized per-atom recursion ratios (for small ensembles)."""
    _, _, _, state = _recursion(delta, ensemble, eps, keep_state=True)
    return state


@dataclass(frozen=True)
class CavitySpec:
    """Fiber ring resonator enclosing the medium.

    t_rt   : roundtrip amplitude transmission of the passive ring, in (0, 1].
    t_c    : coupler through-transmission amplitude, |t_c| <= 1.  The printed
             ring response is passive only for real t_c.
    tau_rt : roundtrip delay in 1/Gamma0.
    phi0   : static roundtrip phase at zero detuning, radians.
    """

    t_rt: float
    t_c: complex
    tau_rt: float
    phi0: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.t_rt <= 1.0:
            raise ValueError(f"t_rt must lie in (0, 1], got {self.t_rt}")
        if abs(self.t_c) > 1.0 + 1e-12:
            raise ValueError(f"|t_c| must not exceed 1, got {abs(self.t_c)}")
        if not self.tau_rt > 0:
            raise ValueError(f"tau_rt must be positive, got {self.tau_rt}")


def transfer_cavity(t_medium: TransferSpectrum, cavity: CavitySpec, eps=RECURSION_EPS) -> TransferSpectrum:
    """Ring-resonator dressing of a medium response.

    amplitude(delta) = (t_rt t_N e^{i Phi} - t_c) / (t_rt t_c t_N e^{i Phi} - 1)

    with the frequency-dependent roundtrip phase Phi = phi0 - delta * tau_rt.
    The sign of the delta term follows this package's transform convention
    (the one that makes the atomic Lorentzian causal), so the time-domain
    response carries echoes delayed by multiples of tau_rt.  Denominator
    moduli below eps raise a diagnostic warning (unphysical gain
    configuration); passive parameters keep |amplitude| at or below one.
    """
    loop = cavity.t_rt * t_medium.amplitude * np.exp(
        1j * (cavity.phi0 - t_medium.delta * cavity.tau_rt)
    )
    den = cavity.t_c * loop - 1.0
    small = np.abs(den) < eps
    if np.any(small):
        warnings.warn(
            f"{int(np.count_nonzero(small))} grid point(s) with ring denominator "
            f"below {eps:g}; parameters are at or past the gain threshold",
            DegenerateDenominatorWarning,
            stacklevel=2,
        )
    with np.errstate(invalid="ignore", divide="ignore"):
        amplitude = (loop - cavity.t_c) / den
    return TransferSpectrum(t_medium.delta, amplitude)
