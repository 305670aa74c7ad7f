#!/usr/bin/env python3
"""
Ion Physics Core - Constants, Species Data and Trap Geometry

Physical constants, ion species parameters, unit conventions and the
derived trap quantities (Lamb-Dicke parameter, thermal occupation) that
every other module consumes.

Unit policy: all frequencies are angular (rad/s), energies in joules,
lengths in meters, temperatures in kelvin. Only the command line speaks
ordinary Hz and converts at the boundary.
"""

import logging
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Dict, Optional, Union

import yaml
from scipy import constants

from errors import DomainError, UnknownSpeciesError, ValidationError

logger = logging.getLogger(__name__)

HBAR = constants.hbar
K_B = constants.k
C_LIGHT = constants.c
EPSILON_0 = constants.epsilon_0
AMU = constants.atomic_mass

DEFAULT_SPECIES_FILE = Path(__file__).parent / "species.yaml"

# Compiled-in fallback for species.yaml
BUILTIN_SPECIES = {
    "Ba138+": {
        "mass_u": 138.0,
        "s_p12_nm": 493.4,
        "s_p32_nm": 455.4,
        "p12_linewidth_hz": 20.1e6,
    },
}


@dataclass(frozen=True)
class UnitPolicy:
    """The single global unit convention"""
    frequency: str = "rad/s"
    energy: str = "J"
    length: str = "m"
    temperature: str = "K"

    @staticmethod
    def hz_to_angular(f_hz: float) -> float:
        return 2.0 * math.pi * f_hz

    @staticmethod
    def angular_to_hz(omega: float) -> float:
        return omega / (2.0 * math.pi)


UNITS = UnitPolicy()


def wavelength_to_omega(wavelength: float) -> float:
    """Angular optical frequency (rad/s) of a vacuum wavelength in meters"""
    if wavelength <= 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    return 2.0 * math.pi * C_LIGHT / wavelength


def omega_to_wavelength(omega: float) -> float:
    """Vacuum wavelength (m) of an angular optical frequency"""
    if omega <= 0:
        raise DomainError(f"optical frequency must be positive, got {omega}")
    return 2.0 * math.pi * C_LIGHT / omega


@dataclass(frozen=True)
class IonSpecies:
    """Atomic parameters of one ion species consumed by the pulse formulas"""
    name: str
    mass: float                  # kg
    resonance_omega0: float      # rad/s, S1/2 -> P1/2
    fine_structure_omega: float  # rad/s, P3/2 - P1/2 splitting
    dipole_moment: float         # C*m, S1/2 <-> P1/2
    linewidth: float = 0.0       # rad/s, total P1/2 decay rate

    def __post_init__(self):
        for attr in ("mass", "resonance_omega0", "fine_structure_omega", "dipole_moment"):
            value = getattr(self, attr)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"IonSpecies.{attr} must be positive and finite, got {value}")
        if self.linewidth < 0:
            raise DomainError(f"IonSpecies.linewidth must be non-negative, got {self.linewidth}")

    @property
    def mass_u(self) -> float:
        return self.mass / AMU

    def to_dict(self) -> dict:
        return asdict(self)


def dipole_from_linewidth(omega0: float, linewidth: float) -> float:
    """
    Transition dipole moment from a spontaneous decay rate

    Inverts Gamma = omega0^3 d^2 / (3 pi eps0 hbar c^3).

    Args:
        omega0: Transition angular frequency (rad/s)
        linewidth: Decay rate Gamma (rad/s)

    Returns:
        Dipole moment d in C*m
    """
    if omega0 <= 0 or linewidth <= 0:
        raise DomainError("omega0 and linewidth must be positive")
    return math.sqrt(3.0 * math.pi * EPSILON_0 * HBAR * C_LIGHT ** 3 * linewidth / omega0 ** 3)


def load_species_table(path: Optional[Union[str, Path]] = None) -> Dict[str, dict]:
    """
    Load the species table, merging a YAML file over the built-in entries

    Args:
        path: Species file; defaults to species.yaml next to this module

    Returns:
        Dictionary {species_name: raw entry}
    """
    table = {name: dict(entry) for name, entry in BUILTIN_SPECIES.items()}
    species_path = Path(path) if path is not None else DEFAULT_SPECIES_FILE

    try:
        with open(species_path, 'r') as f:
            loaded = yaml.safe_load(f) or {}
    except FileNotFoundError:
        if path is not None:
            raise ValidationError(f"species file not found: {species_path}")
        logger.warning("Species file %s not found, using built-in species", species_path)
        return table

    if not isinstance(loaded, dict):
        raise ValidationError(f"species file {species_path} must map names to entries")

    for name, entry in loaded.items():
        if not isinstance(entry, dict):
            raise ValidationError(f"species entry {name!r} must be a mapping")
        table[str(name)] = {key: float(value) for key, value in entry.items()}

    return table


def species_from_entry(name: str, entry: dict) -> IonSpecies:
    """Build an IonSpecies from one species-table entry"""
    try:
        mass_u = float(entry["mass_u"])
        p12_nm = float(entry["s_p12_nm"])
        p32_nm = float(entry["s_p32_nm"])
        linewidth_hz = float(entry["p12_linewidth_hz"])
    except KeyError as e:
        raise ValidationError(f"species {name!r} is missing field {e.args[0]!r}")

    if not 1.0 <= mass_u <= 300.0:
        raise DomainError(f"species {name!r} mass {mass_u} u outside [1, 300] u")
    if p32_nm >= p12_nm:
        raise DomainError(f"species {name!r}: P3/2 line must lie above P1/2")

    omega0 = wavelength_to_omega(p12_nm * 1e-9)
    omega_fs = wavelength_to_omega(p32_nm * 1e-9) - omega0
    linewidth = UNITS.hz_to_angular(linewidth_hz)

    return IonSpecies(
        name=name,
        mass=mass_u * AMU,
        resonance_omega0=omega0,
        fine_structure_omega=omega_fs,
        dipole_moment=dipole_from_linewidth(omega0, linewidth),
        linewidth=linewidth,
    )


def make_species(name: str, table: Optional[Dict[str, dict]] = None) -> IonSpecies:
    """
    Look up a named ion species

    Args:
        name: Species identifier, e.g. "Ba138+"
        table: Optional species table (defaults to load_species_table())

    Returns:
        Populated IonSpecies
    """
    species_table = table if table is not None else load_species_table()
    if name not in species_table:
        raise UnknownSpeciesError(name)
    return species_from_entry(name, species_table[name])


def lamb_dicke(k_eff: float, mass: float, omega: float) -> float:
    """
    Lamb-Dicke parameter eta = k_eff * sqrt(hbar / (2 m omega))

    Args:
        k_eff: Effective wavevector magnitude (rad/m)
        mass: Ion mass (kg)
        omega: Secular angular frequency (rad/s)

    Returns:
        Dimensionless eta
    """
    for label, value in (("k_eff", k_eff), ("mass", mass), ("omega", omega)):
        if not value > 0:
            raise DomainError(f"lamb_dicke: {label} must be positive, got {value}")
    return k_eff * math.sqrt(HBAR / (2.0 * mass * omega))


def sdk_k_eff(wavelength: float, crossing_angle: float = math.pi / 2) -> float:
    """
    |k1 - k2| for two beams of equal wavelength crossing at an angle

    Orthogonal beams (the default) give sqrt(2) * 2 pi / lambda.
    """
    if not 0 < crossing_angle <= math.pi:
        raise DomainError(f"crossing angle must lie in (0, pi], got {crossing_angle}")
    return 2.0 * (2.0 * math.pi / wavelength) * math.sin(crossing_angle / 2.0)


@dataclass(frozen=True)
class TrapParams:
    """Secular frequency and kick geometry; eta is derived at construction"""
    secular_omega: float
    k_eff: float
    mass: float
    lamb_dicke: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lamb_dicke", lamb_dicke(self.k_eff, self.mass, self.secular_omega))

    @classmethod
    def from_geometry(cls, species: IonSpecies, secular_omega: float,
                      wavelength: float = 532e-9,
                      crossing_angle: float = math.pi / 2) -> "TrapParams":
        return cls(secular_omega=secular_omega,
                   k_eff=sdk_k_eff(wavelength, crossing_angle),
                   mass=species.mass)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.secular_omega


def thermal_nbar(temperature: float, omega: float, bose: bool = False) -> float:
    """
    Mean phonon number of a thermal mode

    Uses the classical limit k_B T = nbar hbar omega unless bose=True, in
    which case the Bose-Einstein occupation is returned.

    Args:
        temperature: Temperature (K)
        omega: Mode angular frequency (rad/s)
        bose: Use 1/(exp(hbar omega / k_B T) - 1)

    Returns:
        Mean occupation nbar
    """
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature}")
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if temperature == 0:
        return 0.0
    if bose:
        return 1.0 / math.expm1(HBAR * omega / (K_B * temperature))
    return K_B * temperature / (HBAR * omega)


def nbar_to_temperature(nbar: float, omega: float, bose: bool = False) -> float:
    """Inverse of thermal_nbar"""
    if nbar < 0:
        raise DomainError(f"nbar must be non-negative, got {nbar}")
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if nbar == 0:
        return 0.0
    if bose:
        return HBAR * omega / (K_B * math.log1p(1.0 / nbar))
    return nbar * HBAR * omega / K_B


def doppler_limit_temperature(species: IonSpecies) -> float:
    """Doppler cooling limit T_D = hbar Gamma / (2 k_B) of the cooling line"""
    if not species.linewidth > 0:
        raise DomainError(f"species {species.name!r} has no linewidth")
    return HBAR * species.linewidth / (2.0 * K_B)


def thermal_position_spread(temperature: float, mass: float, omega: float) -> float:
    """sigma_ion = sqrt(k_B T / (m omega^2)) in meters"""
    if temperature < 0:
        raise DomainError(f"temperature must be non-negative, got {temperature}")
    if not (mass > 0 and omega > 0):
        raise DomainError("mass and omega must be positive")
    return math.sqrt(K_B * temperature / (mass * omega ** 2))
