import math
from fractions import Fraction

import numpy as np
import pytest

from waveqed import (
    EnsembleSpec,
    Units,
    od_to_atom_number,
    resonant_od,
    single_atom_coefficients,
)


class TestUnits:
    def test_lifetime_scale(self):
        units = Units()
        # one natural time unit is 1/Gamma0 ~ 30.6 ns at the default linewidth
        assert units.time_to_si(1.0) == pytest.approx(1.0 / (2 * math.pi * 5.2e6))

    def test_round_trip_exact(self):
        units = Units(gamma0_hz=5.2e6)
        for t in (1.0, 3.7e-9, 152.4, 1e6):
            assert units.time_from_si(units.time_to_si(t)) == pytest.approx(t, rel=1e-14)
            assert units.frequency_from_hz(units.frequency_to_hz(t)) == pytest.approx(t, rel=1e-14)

    def test_detuning_map(self):
        units = Units()
        # 48.1 Gamma0 corresponds to ~250 MHz
        assert units.frequency_to_hz(48.1) == pytest.approx(250e6, rel=2e-3)

    def test_rejects_nonpositive_linewidth(self):
        with pytest.raises(ValueError):
            Units(gamma0_hz=0.0)


class TestSingleAtom:
    def test_resonance_values(self):
        t, r = single_atom_coefficients(0.0, 0.0055)
        assert t == pytest.approx(0.989)
        assert r == pytest.approx(-0.011)

    def test_full_coupling_extinction(self):
        t, r = single_atom_coefficients(0.0, 0.5)
        assert t == pytest.approx(0.0)
        assert r == pytest.approx(-1.0)

    def test_detuned_value_against_exact_arithmetic(self):
        # |t|^2 = ((1/2-beta)^2 + delta^2) / (1/4 + delta^2) evaluated with
        # rational arithmetic at delta=10, beta=0.0055
        beta = Fraction(55, 10000)
        expected = float(((Fraction(1, 2) - beta) ** 2 + 100) / (Fraction(1, 4) + 100))
        t, r = single_atom_coefficients(10.0, 0.0055)
        assert abs(t) ** 2 == pytest.approx(expected, rel=1e-14)
        assert 1.0 - abs(t) ** 2 - abs(r) ** 2 >= 0.0

    def test_t_minus_r_is_one(self):
        rng = np.random.default_rng(0)
        delta = rng.uniform(-50, 50, 100)
        beta = rng.uniform(1e-4, 0.5, 100)
        t, r = single_atom_coefficients(delta, beta)
        assert np.allclose(t - r, 1.0, rtol=0, atol=1e-14)

    def test_loss_fraction_in_unit_interval(self):
        rng = np.random.default_rng(1)
        delta = rng.uniform(-100, 100, 500)
        for beta in (0.001, 0.0055, 0.2, 0.5):
            t, r = single_atom_coefficients(delta, beta)
            loss = 1.0 - np.abs(t) ** 2 - np.abs(r) ** 2
            assert np.all(loss >= -1e-14)
            assert np.all(loss <= 1.0)
            if beta == 0.5:
                assert np.allclose(loss, 0.0, atol=1e-14)

    def test_transmission_monotone_in_detuning(self):
        delta = np.linspace(0.0, 60.0, 400)
        t, _ = single_atom_coefficients(delta, 0.0055)
        assert np.all(np.diff(np.abs(t)) > 0)

    def test_rejects_bad_beta(self):
        for beta in (0.0, -0.1, 0.500001, 1.0):
            with pytest.raises(ValueError):
                single_atom_coefficients(0.0, beta)


class TestAtomNumberCalibration:
    def test_zero_od(self):
        assert od_to_atom_number(0.0, 0.0055) == 0

    def test_reference_points(self):
        assert od_to_atom_number(19.3, 0.0055) == 872
        assert od_to_atom_number(14.0, 0.0055) == 633
        assert od_to_atom_number(26.0, 0.0055) == 1175

    def test_resonant_transmission_consistency(self):
        # |t(0)|^(2N) should reproduce exp(-19.3) at the percent level
        n = od_to_atom_number(19.3, 0.0055)
        t0, _ = single_atom_coefficients(0.0, 0.0055)
        assert abs(t0) ** (2 * n) == pytest.approx(math.exp(-19.3), rel=0.01)

    def test_identity_with_resonant_od(self):
        for n in (1, 17, 872, 5000):
            for beta in (0.001, 0.0055, 0.1):
                assert od_to_atom_number(resonant_od(n, beta), beta) == n

    def test_rejects_singular_and_invalid(self):
        with pytest.raises(ValueError):
            od_to_atom_number(10.0, 0.5)
        with pytest.raises(ValueError):
            od_to_atom_number(-1.0, 0.0055)


class TestEnsembleSpec:
    def test_uniform_constructor(self):
        ens = EnsembleSpec.uniform(5, beta=0.01, phase=0.3)
        assert ens.n_atoms == 5
        assert np.all(ens.beta == 0.01)
        assert np.all(ens.phase == 0.3)
        assert np.all(ens.shift == 0.0)

    def test_from_od(self):
        ens = EnsembleSpec.from_od(19.3)
        assert ens.n_atoms == 872

    def test_phases_wrapped(self):
        ens = EnsembleSpec(beta=[0.01, 0.01], phase=[7.0, -1.0], shift=[0.0, 0.0])
        assert np.all((ens.phase >= 0) & (ens.phase < 2 * math.pi))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            EnsembleSpec(beta=[0.01, 0.01], phase=[0.0, 0.0, 0.0], shift=[0.0, 0.0])

    def test_beta_range_enforced(self):
        with pytest.raises(ValueError):
            EnsembleSpec.uniform(3, beta=0.6)
        with pytest.raises(ValueError):
            EnsembleSpec.uniform(0)
