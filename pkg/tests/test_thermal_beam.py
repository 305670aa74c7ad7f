import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest

from errors import DomainError, SeriesConvergenceError, ValidationError
from thermal_beam import (
    BeamThermalConfig, center_pi_energy, hyp1f2, hyp1f2_integral, mc_thermal_rabi, peak_theta,
    thermal_average_cos, thermal_pi_infidelity, thermal_rabi_curve, thermal_rabi_pdown,
)
from ion_physics import UNITS, doppler_limit_temperature


def mp_hyp1f2(a, b, c, x):
    with mpmath.workdps(50):
        return float(mpmath.hyp1f2(a, b, c, x))


class TestHypergeometric:
    @pytest.mark.parametrize("kappa", [0.5, 2.5, 25.0, 250.0])
    @pytest.mark.parametrize("x", [-0.1, -2.5, -9.9, 3.0])
    def test_series_matches_mpmath(self, kappa, x):
        assert hyp1f2(kappa, 0.5, 1.0 + kappa, x) == pytest.approx(mp_hyp1f2(kappa, 0.5, 1.0 + kappa, x),
                                                                   rel=1e-12, abs=1e-12)

    @pytest.mark.parametrize("kappa", [2.5, 24.85])
    @pytest.mark.parametrize("theta", [4.0, 12.0, 30.0])
    def test_integral_form_matches_mpmath(self, kappa, theta):
        expected = mp_hyp1f2(kappa, 0.5, 1.0 + kappa, -theta * theta)
        assert hyp1f2_integral(kappa, theta) == pytest.approx(expected, abs=1e-10)

    def test_series_and_integral_agree_at_switch(self):
        theta = math.sqrt(10.0)
        assert hyp1f2(7.0, 0.5, 8.0, -10.0) == pytest.approx(hyp1f2_integral(7.0, theta), abs=1e-11)

    def test_zero_argument(self):
        assert hyp1f2(3.0, 0.5, 4.0, 0.0) == 1.0

    def test_rejects_non_positive_integer_parameters(self):
        with pytest.raises(ValidationError):
            hyp1f2(1.0, 0.0, 2.0, -1.0)
        with pytest.raises(ValidationError):
            hyp1f2(1.0, 0.5, -3.0, -1.0)

    def test_rejects_huge_argument(self):
        with pytest.raises(ValidationError):
            hyp1f2(1.0, 0.5, 2.0, -1e5)

    def test_term_cap(self):
        with pytest.raises(SeriesConvergenceError):
            hyp1f2(1.0, 0.5, 2.0, -9.0, max_terms=3)

    def test_cold_ion_average_is_plain_cosine(self):
        assert thermal_average_cos(1.3, math.inf) == math.cos(2.6)


class TestThermalRabi:
    def test_nominal_g(self, nominal_beam):
        assert nominal_beam.g == pytest.approx(49.70, abs=0.05)

    def test_zero_temperature_is_undamped(self, barium):
        cold = BeamThermalConfig(waist=8.5e-6, temperature=0.0, mass=barium.mass,
                                 trap_omega=UNITS.hz_to_angular(32.4e3))
        assert math.isinf(cold.g)
        for theta in (0.2, math.pi / 2, 2.0, 5.0):
            assert thermal_rabi_pdown(theta, cold) == pytest.approx(math.sin(theta) ** 2, abs=1e-15)
        assert peak_theta(cold) == math.pi / 2

    def test_large_g_approaches_rabi_flopping(self, make_beam):
        beam = make_beam(1e7)
        assert thermal_rabi_pdown(math.pi / 2, beam) == pytest.approx(1.0, abs=1e-6)

    def test_zero_area_transfers_nothing(self, nominal_beam):
        assert thermal_rabi_pdown(0.0, nominal_beam) == 0.0
        with pytest.raises(ValidationError):
            thermal_rabi_pdown(-0.1, nominal_beam)

    def test_unknown_profile(self, nominal_beam):
        with pytest.raises(ValidationError):
            thermal_rabi_pdown(1.0, nominal_beam, profile="tophat")

    def test_beam_validation(self, barium):
        with pytest.raises(DomainError):
            BeamThermalConfig(waist=0.0, temperature=1e-3, mass=barium.mass, trap_omega=1e5)

    def test_peak_moves_outward_when_hot(self, make_beam):
        theta = peak_theta(make_beam(5.0))
        assert theta > math.pi / 2
        beam = make_beam(5.0)
        assert thermal_rabi_pdown(theta, beam) >= thermal_rabi_pdown(math.pi / 2, beam)

    @pytest.mark.parametrize("g", [5.0, 49.7, 500.0])
    @pytest.mark.parametrize("profile", ["waist", "intensity"])
    def test_peak_is_a_zero_of_the_slope(self, make_beam, g, profile):
        beam = make_beam(g)
        kappa = g / (2.0 if profile == "waist" else 4.0)
        with mpmath.workdps(40):
            slope = mpmath.diff(lambda t: mpmath.hyp1f2(kappa, 0.5, 1 + kappa, -t * t),
                                peak_theta(beam, profile))
        assert abs(float(slope)) < 1e-10

    def test_center_energy_matches_for_a_cold_ion(self, barium):
        cold = BeamThermalConfig(waist=8.5e-6, temperature=0.0, mass=barium.mass,
                                 trap_omega=UNITS.hz_to_angular(32.4e3))
        assert center_pi_energy(38e-9, peak_theta(cold)) == pytest.approx(38e-9, rel=1e-15)

    def test_center_energy_lies_below_the_first_maximum(self, make_beam):
        nominal = 38e-9 / center_pi_energy(38e-9, peak_theta(make_beam(49.7)))
        hot = 38e-9 / center_pi_energy(38e-9, peak_theta(make_beam(5.0)))
        assert 1.005 < nominal < 1.05
        assert hot > nominal
        curve = thermal_rabi_curve([center_pi_energy(38e-9, peak_theta(make_beam(49.7)))], 38e-9,
                                   make_beam(49.7))
        assert curve[0] == pytest.approx(thermal_rabi_pdown(math.pi / 2, make_beam(49.7)), rel=1e-12)

    def test_infidelity_falls_with_g(self, make_beam):
        values = [thermal_pi_infidelity(make_beam(g)) for g in (5.0, 50.0, 500.0)]
        assert values[0] > values[1] > values[2] > 0

    def test_doppler_cooled_fast_trap_is_nearly_perfect(self, barium):
        beam = BeamThermalConfig(waist=8.5e-6, temperature=doppler_limit_temperature(barium),
                                 mass=barium.mass, trap_omega=UNITS.hz_to_angular(200e3))
        assert thermal_pi_infidelity(beam) < 1e-5

    def test_curve_peaks_at_pi_energy(self, nominal_beam):
        energies = np.array([0.0, 19e-9, 38e-9, 57e-9])
        curve = thermal_rabi_curve(energies, 38e-9, nominal_beam)
        assert curve[0] == 0.0
        assert curve[2] == pytest.approx(thermal_rabi_pdown(peak_theta(nominal_beam), nominal_beam))
        assert curve[2] > curve[1] and curve[2] > curve[3]

    def test_curve_rejects_bad_pi_energy(self, nominal_beam):
        with pytest.raises(ValidationError):
            thermal_rabi_curve([1e-9], 0.0, nominal_beam)


class TestMonteCarlo:
    def test_zero_area(self, nominal_beam):
        assert tuple(mc_thermal_rabi(0.0, nominal_beam, 1000, seed=1)) == (0.0, 0.0)

    def test_seeded_result_is_reproducible(self, nominal_beam):
        a = mc_thermal_rabi(math.pi, nominal_beam, 100_000, seed=7)
        b = mc_thermal_rabi(math.pi, nominal_beam, 100_000, seed=7)
        assert a == b

    def test_isotropic_secondary_axis_matches(self, nominal_beam):
        twin = replace(nominal_beam, secondary_omega=nominal_beam.trap_omega)
        assert mc_thermal_rabi(math.pi, twin, 50_000, seed=3) == mc_thermal_rabi(math.pi, nominal_beam, 50_000, seed=3)

    def test_rejects_bad_sample_count(self, nominal_beam):
        with pytest.raises(ValidationError):
            mc_thermal_rabi(math.pi, nominal_beam, 0, seed=1)

    def test_quick_agreement_with_series(self, make_beam):
        beam = make_beam(50.0)
        estimate = mc_thermal_rabi(math.pi, beam, 200_000, seed=11)
        assert abs(estimate.value - thermal_rabi_pdown(math.pi / 2, beam)) < 4 * estimate.stderr + 1e-12

    def test_intensity_profile_agreement(self, make_beam):
        beam = make_beam(20.0)
        estimate = mc_thermal_rabi(2.0, beam, 200_000, seed=5, profile="intensity")
        analytic = thermal_rabi_pdown(1.0, beam, profile="intensity")
        assert abs(estimate.value - analytic) < 4 * estimate.stderr

    @pytest.mark.slow
    @pytest.mark.parametrize("g", [5.0, 50.0, 500.0])
    @pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 2, math.pi, 2 * math.pi])
    def test_million_sample_agreement(self, make_beam, g, theta):
        beam = make_beam(g)
        estimate = mc_thermal_rabi(2.0 * theta, beam, 1_000_000, seed=2024)
        assert abs(estimate.value - thermal_rabi_pdown(theta, beam)) < 3 * estimate.stderr + 1e-12
