#!/usr/bin/env python3
"""
Two-Level Solver - Driven Qubit Schrodinger Integration

Integrates i dc/dt = H(t) c with

    H(t) = 1/2 [Omega(t) sigma_x + (delta + delta_2g(t)) sigma_z]

for a single ultrafast Raman pulse, using scipy's DOP853 adaptive
Runge-Kutta integrator. Used to check the closed-form Rosen-Zener result
and to compute how much the differential light shift of an unbalanced
sigma-minus beam degrades a calibrated pi pulse.

Amplitudes are ordered (c_up, c_down).
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from errors import IntegrationError, ValidationError
from ion_physics import IonSpecies
from pulse_physics import (
    FieldConfig, PulseParams, envelope_integral, envelope_shape, envelope_value,
    light_shift_prefactor, peak_field_squared, two_photon_rabi,
)

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
TOL_RANGE = (1e-12, 1e-6)
SPAN_FWHM = 20.0  # integrate over +/- this many pulse widths
NORM_SLACK = 100.0  # allowed norm error, in units of tol, on input and output

Envelope = Callable[[float], float]


class BeamPair(NamedTuple):
    """Per-beam setting for the sigma-minus and pi polarized beams"""
    sigma_minus: float
    pi: float


@dataclass(frozen=True)
class DriveProfile:
    """Time-dependent Rabi frequency and light shift of one pulse"""
    rabi_envelope: Envelope
    shift_envelope: Envelope
    static_delta: float
    t_span: Tuple[float, float]
    fwhm: Optional[float] = None

    def __post_init__(self):
        t0, t1 = self.t_span
        if not (math.isfinite(t0) and math.isfinite(t1)) or t0 == t1:
            raise ValidationError(f"t_span must be two distinct finite times, got {self.t_span}")
        if self.fwhm is not None:
            if not self.fwhm > 0:
                raise ValidationError(f"fwhm must be positive, got {self.fwhm}")
            if min(abs(t0), abs(t1)) < 10.0 * self.fwhm:
                raise ValidationError("t_span must cover at least +/- 10 pulse widths")

    @property
    def max_step(self) -> float:
        return self.fwhm / 4.0 if self.fwhm is not None else math.inf


def zero_envelope(t: float) -> float:
    return 0.0


def integrate_tls(p: DriveProfile, initial: Sequence[complex] = (1.0, 0.0),
                  tol: float = DEFAULT_TOL) -> np.ndarray:
    """
    Integrate the driven two-level Schrodinger equation over p.t_span

    Args:
        p: Drive profile
        initial: Initial amplitudes (c_up, c_down), normalized to within
            NORM_SLACK * tol; renormalized before integrating
        tol: Relative tolerance, also used for the absolute tolerance

    Returns:
        Final amplitudes as a complex array of shape (2,)

    Raises:
        ValidationError: tol out of range or unnormalized initial state
        IntegrationError: step-size underflow or norm drift beyond 100 * tol
    """
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ValidationError(f"tol must lie in [{TOL_RANGE[0]}, {TOL_RANGE[1]}], got {tol}")
    c0 = np.asarray(initial, dtype=complex)
    if c0.shape != (2,) or abs(np.vdot(c0, c0).real - 1.0) > NORM_SLACK * tol:
        raise ValidationError("initial state must be a normalized amplitude pair")
    c0 = c0 / np.linalg.norm(c0)

    def rhs(t, c):
        omega = p.rabi_envelope(t)
        detuning = p.static_delta + p.shift_envelope(t)
        return -0.5j * np.array([detuning * c[0] + omega * c[1],
                                 omega * c[0] - detuning * c[1]])

    sol = solve_ivp(rhs, p.t_span, c0, method="DOP853", rtol=tol, atol=tol,
                    max_step=p.max_step)
    if sol.status != 0:
        raise IntegrationError(f"TLS integration failed: {sol.message}")

    final = sol.y[:, -1]
    drift = abs(np.vdot(final, final).real - 1.0)
    logger.debug("DOP853: %d rhs evaluations, norm drift %.3g", sol.nfev, drift)
    if drift > NORM_SLACK * tol:
        raise IntegrationError(f"norm drifted by {drift:.3g} (tol {tol:g})")
    return final


def transfer_probability(final: np.ndarray) -> float:
    """|c_down|^2 of a final amplitude pair"""
    return float(min(max(abs(final[1]) ** 2, 0.0), 1.0))


def pulse_drive(pulse: PulseParams, shift: Envelope = zero_envelope,
                span_fwhm: float = SPAN_FWHM) -> DriveProfile:
    """Drive profile of a bare pulse with an optional light-shift envelope"""
    half = span_fwhm * pulse.fwhm
    return DriveProfile(
        rabi_envelope=lambda t: envelope_value(pulse, t),
        shift_envelope=shift,
        static_delta=pulse.detuning_qubit,
        t_span=(-half, half),
        fwhm=pulse.fwhm,
    )


def build_lightshift_drive(energies: BeamPair, waists: BeamPair, species: IonSpecies,
                           pulse: PulseParams, wavelength: float = 532e-9,
                           shift_scale: float = 1.0) -> DriveProfile:
    """
    Drive profile of a sigma-minus / pi Raman pulse with its light shift

    Omega(t) is calibrated to the pulse area; the light shift keeps the
    absolute scale set by the sigma-minus pulse energy and follows the same
    intensity envelope.

    Args:
        energies: Pulse energies (J) per beam
        waists: 1/e^2 intensity radii (m) per beam
        species: Ion species
        pulse: Envelope, FWHM, calibrated area and qubit splitting
        wavelength: Laser vacuum wavelength (m)
        shift_scale: Multiplier on the light shift (0 switches it off)
    """
    for value in energies:
        if value < 0:
            raise ValidationError(f"beam energy must be non-negative, got {value}")
    for value in waists:
        if not value > 0:
            raise ValidationError(f"beam waist must be positive, got {value}")

    e_sigma2 = peak_field_squared(energies.sigma_minus, waists.sigma_minus, pulse.envelope, pulse.fwhm)
    e_pi2 = peak_field_squared(energies.pi, waists.pi, pulse.envelope, pulse.fwhm)
    fields = FieldConfig.at_wavelength(species, wavelength,
                                       E_pi=math.sqrt(e_pi2), E_sigma_minus=math.sqrt(e_sigma2))

    raw = two_photon_rabi(fields, species)
    logger.debug("uncalibrated pulse area %.4g rad, calibrated to %.4g rad",
                 raw.magnitude * envelope_integral(pulse.envelope, pulse.fwhm), pulse.area)

    # pure sigma-minus light: |E_sigma+|^2 - |E_sigma-|^2 = -|E_sigma-|^2
    peak_shift = -light_shift_prefactor(fields.laser_detuning, species) * e_sigma2 * shift_scale

    return pulse_drive(pulse, shift=lambda t: peak_shift * envelope_shape(pulse.envelope, pulse.fwhm, t))


def lightshift_fidelity(energies: BeamPair, waists: BeamPair, species: IonSpecies,
                        pulse: PulseParams, wavelength: float = 532e-9,
                        shift_scale: float = 1.0, tol: float = DEFAULT_TOL) -> float:
    """
    Spin-flip probability of a calibrated pi pulse in the presence of its light shift

    Returns 0 when the sigma-minus beam carries no energy, since there is
    then no Raman coupling.
    """
    if energies.sigma_minus == 0 or energies.pi == 0:
        logger.warning("a Raman beam carries no energy; no two-photon coupling")
        return 0.0
    drive = build_lightshift_drive(energies, waists, species, pulse, wavelength, shift_scale)
    return transfer_probability(integrate_tls(drive, tol=tol))
