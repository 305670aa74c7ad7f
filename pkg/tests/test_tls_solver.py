import math
from dataclasses import replace

import numpy as np
import pytest

from errors import ValidationError
from ion_physics import UNITS
from pulse_physics import Envelope, PulseParams, rosen_zener_exact, rosen_zener_fidelity
from tls_solver import (
    DEFAULT_TOL, BeamPair, DriveProfile, integrate_tls, lightshift_fidelity, pulse_drive,
    transfer_probability, zero_envelope,
)

FWHM = 16.4e-12
NOMINAL_ENERGIES = BeamPair(sigma_minus=14e-9, pi=24e-9)
NOMINAL_WAISTS = BeamPair(sigma_minus=20e-6, pi=8.5e-6)


def pulse(area: float, delta_tau: float, envelope=Envelope.SECH) -> PulseParams:
    return PulseParams(envelope=envelope, fwhm=FWHM, area=area, detuning_qubit=delta_tau / FWHM)


def nominal_pulse() -> PulseParams:
    return PulseParams(fwhm=FWHM, area=math.pi, detuning_qubit=UNITS.hz_to_angular(150e6))


@pytest.mark.parametrize("area", [math.pi / 2, math.pi, 1.5 * math.pi])
@pytest.mark.parametrize("delta_tau", [0.0, 0.001, 0.01, 0.5, 1.0])
def test_sech_pulse_matches_exact_rosen_zener(area, delta_tau):
    p = pulse(area, delta_tau)
    final = integrate_tls(pulse_drive(p))
    assert transfer_probability(final) == pytest.approx(rosen_zener_exact(p), abs=1e-3)
    assert np.vdot(final, final).real == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("area", [math.pi / 2, math.pi, 1.5 * math.pi])
@pytest.mark.parametrize("delta_tau", [0.0, 0.001, 0.01])
def test_small_detuning_matches_closed_form(area, delta_tau):
    p = pulse(area, delta_tau)
    assert transfer_probability(integrate_tls(pulse_drive(p))) == pytest.approx(
        rosen_zener_fidelity(p), abs=1e-3)


def test_resonant_sech_squared_pi_pulse():
    p = pulse(math.pi, 0.0, Envelope.SECH_SQUARED)
    assert transfer_probability(integrate_tls(pulse_drive(p))) == pytest.approx(1.0, abs=1e-8)


def test_zero_area_leaves_state_alone():
    final = integrate_tls(pulse_drive(pulse(0.0, 0.3)))
    assert transfer_probability(final) == pytest.approx(0.0, abs=1e-12)


def test_starting_down_flips_up():
    final = integrate_tls(pulse_drive(pulse(math.pi, 0.0)), initial=(0.0, 1.0))
    assert abs(final[0]) ** 2 == pytest.approx(1.0, abs=1e-8)


def test_tolerance_range():
    drive = pulse_drive(pulse(math.pi, 0.0))
    with pytest.raises(ValidationError):
        integrate_tls(drive, tol=1e-3)
    with pytest.raises(ValidationError):
        integrate_tls(drive, tol=1e-14)


def test_initial_state_must_be_normalized():
    with pytest.raises(ValidationError):
        integrate_tls(pulse_drive(pulse(math.pi, 0.0)), initial=(1.0, 1.0))


def test_span_must_cover_the_pulse():
    with pytest.raises(ValidationError):
        DriveProfile(zero_envelope, zero_envelope, 0.0, (-5 * FWHM, 5 * FWHM), fwhm=FWHM)
    with pytest.raises(ValidationError):
        DriveProfile(zero_envelope, zero_envelope, 0.0, (0.0, 0.0))


def test_nominal_light_shift_fidelity(barium):
    fidelity = lightshift_fidelity(NOMINAL_ENERGIES, NOMINAL_WAISTS, barium, nominal_pulse())
    assert fidelity == pytest.approx(0.95, abs=0.02)


def test_without_light_shift_only_detuning_remains(barium):
    fidelity = lightshift_fidelity(NOMINAL_ENERGIES, NOMINAL_WAISTS, barium, nominal_pulse(), shift_scale=0.0)
    assert fidelity == pytest.approx(rosen_zener_exact(nominal_pulse()), abs=1e-6)


def test_more_sigma_minus_light_costs_fidelity(barium):
    weak = lightshift_fidelity(BeamPair(7e-9, 24e-9), NOMINAL_WAISTS, barium, nominal_pulse())
    strong = lightshift_fidelity(NOMINAL_ENERGIES, NOMINAL_WAISTS, barium, nominal_pulse())
    assert weak > strong


def test_no_sigma_minus_light_means_no_transfer(barium):
    assert lightshift_fidelity(BeamPair(0.0, 24e-9), NOMINAL_WAISTS, barium, nominal_pulse()) == 0.0


def test_negative_energy_is_rejected(barium):
    with pytest.raises(ValidationError):
        lightshift_fidelity(BeamPair(-1e-9, 24e-9), NOMINAL_WAISTS, barium, nominal_pulse())


def test_slightly_unnormalized_input_is_accepted():
    final = integrate_tls(pulse_drive(pulse(math.pi, 0.0)), initial=(1.0 + 1e-11, 0.0))
    assert np.vdot(final, final).real == pytest.approx(1.0, abs=1e-8)


def test_backward_integration_restores_the_initial_state():
    tol = 1e-12
    drive = pulse_drive(pulse(math.pi / 2, 0.3))
    initial = np.array([math.sqrt(0.3), 1j * math.sqrt(0.7)])
    final = integrate_tls(drive, initial=initial, tol=tol)
    back = integrate_tls(replace(drive, t_span=drive.t_span[::-1]), initial=final, tol=tol)
    assert np.max(np.abs(back - initial)) < 10 * DEFAULT_TOL


def constant_rabi_error(tol: float, omega: float = 2 * math.pi * 1e9, cycles: float = 10.25) -> float:
    duration = cycles * 2 * math.pi / omega
    drive = DriveProfile(lambda t: omega, zero_envelope, 0.0, (0.0, duration))
    exact = np.array([math.cos(omega * duration / 2), -1j * math.sin(omega * duration / 2)])
    return float(np.max(np.abs(integrate_tls(drive, tol=tol) - exact)))


def test_constant_drive_follows_the_rabi_formula():
    omega = 2 * math.pi * 1e9
    duration = 10.25 * 2 * math.pi / omega
    drive = DriveProfile(lambda t: omega, zero_envelope, 0.0, (0.0, duration))
    assert transfer_probability(integrate_tls(drive)) == pytest.approx(
        math.sin(omega * duration / 2) ** 2, abs=1e-8)


def test_error_shrinks_with_tolerance():
    errors = {tol: constant_rabi_error(tol) for tol in (1e-6, 1e-8, 1e-10)}
    for tol, error in errors.items():
        assert error < 100 * tol
    assert errors[1e-6] > errors[1e-8] > errors[1e-10]
