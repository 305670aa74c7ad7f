"""Shared fixtures: nominal parameters for a Ba138+ ion at 2 pi x 32.4 kHz"""

import os
import sys

import pytest

# Add parent directory to path to import the toolkit modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from ion_physics import K_B, UNITS, TrapParams, make_species  # noqa: E402
from thermal_beam import BeamThermalConfig  # noqa: E402

TRAP_OMEGA = UNITS.hz_to_angular(32.4e3)
WAIST = 8.5e-6


@pytest.fixture
def barium():
    return make_species("Ba138+")


@pytest.fixture
def nominal_trap(barium):
    return TrapParams.from_geometry(barium, TRAP_OMEGA)


@pytest.fixture
def nominal_beam(barium):
    return BeamThermalConfig(waist=WAIST, temperature=0.5e-3, mass=barium.mass, trap_omega=TRAP_OMEGA)


def beam_with_g(g: float, mass: float, waist: float = WAIST,
                omega: float = TRAP_OMEGA) -> BeamThermalConfig:
    """Beam configuration whose temperature gives the requested g = w0^2 / (2 sigma^2)"""
    temperature = waist ** 2 * mass * omega ** 2 / (2.0 * g * K_B)
    return BeamThermalConfig(waist=waist, temperature=temperature, mass=mass, trap_omega=omega)


@pytest.fixture
def make_beam(barium):
    return lambda g: beam_with_g(g, barium.mass)
