#!/usr/bin/env python3
"""
Pulse Physics - Closed-Form Single-Pulse Formulas

Rosen-Zener rotation fidelity, the far-detuned two-photon Rabi frequency
and differential light shift of a Raman pulse, the magic detuning where
the shift vanishes, and the temporal envelope definitions shared with the
ODE solver.

All frequencies are angular (rad/s); see ion_physics.UnitPolicy.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from errors import DomainError, PoleError, ValidationError
from ion_physics import (
    C_LIGHT, EPSILON_0, HBAR, IonSpecies, UNITS,
    omega_to_wavelength, wavelength_to_omega,
)

logger = logging.getLogger(__name__)

# Default |Delta| and |Delta - omega_FS| guard around the P-state resonances
POLE_GUARD = UNITS.hz_to_angular(1e9)
# Detunings inside this many guards of a resonance are accepted with a warning
NEAR_POLE_FACTOR = 10.0

# The literal sech^2 width constant of the closed-form fidelity
RZ_WIDTH_CONSTANT = 1.76

# FWHM / T for Omega = sech(t/T) and Omega = sech^2(t/T)
SECH_FWHM_RATIO = 2.0 * math.acosh(2.0)                 # 2.633916
SECH_SQUARED_FWHM_RATIO = 2.0 * math.acosh(math.sqrt(2.0))  # 1.762747

# Time-bandwidth product of a transform-limited sech^2 intensity pulse
SECH_TIME_BANDWIDTH = 0.315


class Envelope(str, Enum):
    """Temporal shape of the Rabi frequency Omega(t)"""
    SECH = "sech"
    SECH_SQUARED = "sech_squared"


@dataclass(frozen=True)
class PulseParams:
    """One laser pulse: envelope, FWHM of Omega(t), area and qubit detuning"""
    envelope: Envelope = Envelope.SECH
    fwhm: float = 16.4e-12
    area: float = math.pi
    detuning_qubit: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "envelope", Envelope(self.envelope))
        if not (self.fwhm > 0 and math.isfinite(self.fwhm)):
            raise ValidationError(f"pulse fwhm must be positive, got {self.fwhm}")
        if not (self.area >= 0 and math.isfinite(self.area)):
            raise ValidationError(f"pulse area must be non-negative, got {self.area}")

    @property
    def timescale(self) -> float:
        """T in Omega_0 * sech(t/T) or Omega_0 * sech^2(t/T)"""
        return self.fwhm / _fwhm_ratio(self.envelope)

    @property
    def peak_rabi(self) -> float:
        """Omega_0 such that the envelope integrates to the pulse area"""
        return self.area / envelope_integral(self.envelope, self.fwhm)


@dataclass(frozen=True)
class FieldConfig:
    """Complex rms field amplitudes per polarization and the laser detuning"""
    E_pi: complex = 0j
    E_sigma_plus: complex = 0j
    E_sigma_minus: complex = 0j
    laser_detuning: float = 0.0

    def __post_init__(self):
        if self.laser_detuning == 0 or not math.isfinite(self.laser_detuning):
            raise PoleError("laser_detuning must be non-zero and finite")

    @classmethod
    def at_wavelength(cls, species: IonSpecies, wavelength: float, **fields) -> "FieldConfig":
        """Field configuration for a laser at a vacuum wavelength (m)"""
        detuning = wavelength_to_omega(wavelength) - species.resonance_omega0
        return cls(laser_detuning=detuning, **fields)


class TwoPhotonRabi(NamedTuple):
    magnitude: float  # rad/s
    phase: float      # rad

    @property
    def value(self) -> complex:
        return self.magnitude * complex(math.cos(self.phase), math.sin(self.phase))


def _fwhm_ratio(envelope: Envelope) -> float:
    if Envelope(envelope) is Envelope.SECH:
        return SECH_FWHM_RATIO
    return SECH_SQUARED_FWHM_RATIO


def envelope_shape(envelope: Envelope, fwhm: float, t):
    """
    Unit-peak envelope shape s(t) with FWHM equal to fwhm

    Args:
        envelope: Envelope kind
        fwhm: Full width at half maximum of s(t) (s)
        t: Time or array of times (s)

    Returns:
        s(t), same shape as t
    """
    envelope = Envelope(envelope)
    x = np.asarray(t, dtype=float) / (fwhm / _fwhm_ratio(envelope))
    # sech via exp(-|x|) stays finite far in the tails
    e = np.exp(-np.abs(x))
    sech = 2.0 * e / (1.0 + e * e)
    shape = sech if envelope is Envelope.SECH else sech * sech
    return shape if np.ndim(t) else float(shape)


def envelope_integral(envelope: Envelope, fwhm: float) -> float:
    """Integral over all time of the unit-peak envelope shape"""
    envelope = Envelope(envelope)
    timescale = fwhm / _fwhm_ratio(envelope)
    if envelope is Envelope.SECH:
        return math.pi * timescale
    return 2.0 * timescale


def envelope_value(p: PulseParams, t):
    """Omega(t) in rad/s, normalized so that its integral equals p.area"""
    return p.peak_rabi * envelope_shape(p.envelope, p.fwhm, t)


def rosen_zener_fidelity(p: PulseParams) -> float:
    """
    Closed-form rotation fidelity sin^2(theta/2) sech^2(delta tau / 1.76)

    Args:
        p: Pulse parameters (area theta, FWHM tau, qubit detuning delta)

    Returns:
        Transfer probability in [0, 1]
    """
    x = p.detuning_qubit * p.fwhm / RZ_WIDTH_CONSTANT
    return math.sin(p.area / 2.0) ** 2 / math.cosh(x) ** 2


def rosen_zener_exact(p: PulseParams) -> float:
    """
    Exact Rosen-Zener transfer sin^2(theta/2) sech^2(pi delta T / 2)

    T is the timescale of a sech envelope with the pulse's FWHM. Only the
    sech envelope has this closed form.
    """
    if p.envelope is not Envelope.SECH:
        raise ValidationError("rosen_zener_exact requires the sech envelope")
    x = math.pi * p.detuning_qubit * p.timescale / 2.0
    return math.sin(p.area / 2.0) ** 2 / math.cosh(x) ** 2


def pulse_bandwidth(fwhm: float, time_bandwidth: float = SECH_TIME_BANDWIDTH) -> float:
    """Transform-limited spectral FWHM (Hz) of a pulse of the given duration"""
    if not fwhm > 0:
        raise ValidationError(f"pulse fwhm must be positive, got {fwhm}")
    return time_bandwidth / fwhm


def _check_poles(laser_detuning: float, species: IonSpecies, guard: float) -> None:
    for line, pole in (("P1/2", 0.0), ("P3/2", species.fine_structure_omega)):
        distance = abs(laser_detuning - pole)
        if distance < guard:
            raise PoleError(
                f"laser detuning {UNITS.angular_to_hz(laser_detuning):.4g} Hz is within "
                f"{UNITS.angular_to_hz(guard):.3g} Hz of the {line} resonance")
        if distance < NEAR_POLE_FACTOR * guard:
            logger.warning("laser detuning %.4g Hz lies %.3g Hz from the %s resonance; "
                           "couplings are dominated by that line",
                           UNITS.angular_to_hz(laser_detuning), UNITS.angular_to_hz(distance), line)


def rabi_prefactor(laser_detuning: float, species: IonSpecies,
                   guard: float = POLE_GUARD) -> float:
    """(sqrt(2)/(6 Delta)) (d/hbar)^2 (2 Delta/(Delta - w_FS) - 1), per (V/m)^2"""
    _check_poles(laser_detuning, species, guard)
    d2 = (species.dipole_moment / HBAR) ** 2
    delta, fs = laser_detuning, species.fine_structure_omega
    return math.sqrt(2.0) / (6.0 * delta) * d2 * (2.0 * delta / (delta - fs) - 1.0)


def light_shift_prefactor(laser_detuning: float, species: IonSpecies,
                          guard: float = POLE_GUARD) -> float:
    """(d/hbar)^2 / (6 Delta) (4 Delta/(Delta - w_FS) + 1), per (V/m)^2"""
    _check_poles(laser_detuning, species, guard)
    d2 = (species.dipole_moment / HBAR) ** 2
    delta, fs = laser_detuning, species.fine_structure_omega
    return d2 / (6.0 * delta) * (4.0 * delta / (delta - fs) + 1.0)


def two_photon_rabi(f: FieldConfig, s: IonSpecies, guard: float = POLE_GUARD) -> TwoPhotonRabi:
    """
    Two-photon Raman Rabi frequency between the Zeeman sublevels

    Args:
        f: Field amplitudes (V/m, rms) and laser detuning
        s: Ion species
        guard: Minimum distance (rad/s) from either P-state pole

    Returns:
        TwoPhotonRabi(magnitude in rad/s, phase in rad)
    """
    bilinear = (complex(f.E_pi).conjugate() * complex(f.E_sigma_minus)
                + complex(f.E_sigma_plus).conjugate() * complex(f.E_pi))
    omega = rabi_prefactor(f.laser_detuning, s, guard) * bilinear
    phase = math.atan2(omega.imag, omega.real) if omega != 0 else 0.0
    return TwoPhotonRabi(magnitude=abs(omega), phase=phase)


def differential_light_shift(f: FieldConfig, s: IonSpecies, guard: float = POLE_GUARD) -> float:
    """Differential light shift of the qubit splitting (rad/s)"""
    imbalance = abs(f.E_sigma_plus) ** 2 - abs(f.E_sigma_minus) ** 2
    return light_shift_prefactor(f.laser_detuning, s, guard) * imbalance


def magic_detuning(s: IonSpecies) -> float:
    """Delta* = omega_FS / 5, the root of 4 Delta / (Delta - omega_FS) + 1"""
    if not s.fine_structure_omega > 0:
        raise DomainError("fine-structure splitting must be positive")
    return s.fine_structure_omega / 5.0


def magic_wavelength(s: IonSpecies) -> float:
    """Vacuum wavelength (m) of the laser at the magic detuning"""
    return omega_to_wavelength(s.resonance_omega0 + magic_detuning(s))


def peak_field_squared(energy: float, waist: float, envelope: Envelope, fwhm: float) -> float:
    """
    Peak |E|^2 (rms, (V/m)^2) at the center of a Gaussian beam

    The pulse energy is spread over the unit-peak intensity envelope, so
    P_peak = energy / integral(shape) and I_0 = 2 P_peak / (pi w^2).

    Args:
        energy: Pulse energy (J)
        waist: 1/e^2 intensity radius (m)
        envelope: Intensity envelope kind
        fwhm: Intensity envelope FWHM (s)
    """
    if energy < 0:
        raise ValidationError(f"pulse energy must be non-negative, got {energy}")
    if not waist > 0:
        raise ValidationError(f"beam waist must be positive, got {waist}")
    peak_power = energy / envelope_integral(envelope, fwhm)
    intensity = 2.0 * peak_power / (math.pi * waist ** 2)
    return intensity / (C_LIGHT * EPSILON_0)

