"""Collective radiative dynamics of a 1-D waveguide-coupled atom array."""

from .physics import (
    BETA_DEFAULT,
    GAMMA0_HZ,
    EnsembleSpec,
    Units,
    od_to_atom_number,
    resonant_od,
    single_atom_coefficients,
)
from .spectra import (
    BidirectionalState,
    CavitySpec,
    DegenerateDenominatorWarning,
    TransferSpectrum,
    bidirectional_state,
    detuning_grid,
    excitation_amplitudes,
    transfer_bidirectional,
    transfer_cavity,
    transfer_unidirectional,
)
from .pulses import (
    AtomTrajectorySet,
    PulseWaveform,
    atom_dynamics,
    collective_rate_at_switchoff,
    propagate_pulse,
    synthesize_pulse,
    time_grid,
)
from .disorder import DisorderModel, average_observable, sample_configuration
from .fitting import (
    CollectiveDecayPoint,
    DecayFit,
    DirectionalDecay,
    ResidualSpectrum,
    backward_decay_sweep,
    collective_decay_vs_od,
    fit_initial_decay,
    fit_pulse_decay,
    residual_spectrum,
)

__version__ = "0.1.0"

from .scenarios import (  # noqa: E402  (scenarios imports __version__)
    ConfigError,
    ScenarioConfig,
    config_from_dict,
    config_to_dict,
    emit_config,
    parse_config,
    run_scenario,
    scenario_defaults,
)

__all__ = [
    "BETA_DEFAULT",
    "GAMMA0_HZ",
    "EnsembleSpec",
    "Units",
    "od_to_atom_number",
    "resonant_od",
    "single_atom_coefficients",
    "BidirectionalState",
    "CavitySpec",
    "DegenerateDenominatorWarning",
    "TransferSpectrum",
    "bidirectional_state",
    "detuning_grid",
    "excitation_amplitudes",
    "transfer_bidirectional",
    "transfer_cavity",
    "transfer_unidirectional",
    "AtomTrajectorySet",
    "PulseWaveform",
    "atom_dynamics",
    "collective_rate_at_switchoff",
    "propagate_pulse",
    "synthesize_pulse",
    "time_grid",
    "DisorderModel",
    "average_observable",
    "sample_configuration",
    "CollectiveDecayPoint",
    "DecayFit",
    "DirectionalDecay",
    "ResidualSpectrum",
    "backward_decay_sweep",
    "collective_decay_vs_od",
    "fit_initial_decay",
    "fit_pulse_decay",
    "residual_spectrum",
    "ConfigError",
    "ScenarioConfig",
    "config_from_dict",
    "config_to_dict",
    "emit_config",
    "parse_config",
    "run_scenario",
    "scenario_defaults",
    "__version__",
]
