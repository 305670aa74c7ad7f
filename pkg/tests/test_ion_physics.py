import math

import pytest

from errors import DomainError, UnknownSpeciesError, ValidationError
from ion_physics import (
    UNITS, IonSpecies, TrapParams, doppler_limit_temperature, lamb_dicke, load_species_table,
    make_species, nbar_to_temperature, omega_to_wavelength, sdk_k_eff, thermal_nbar,
    thermal_position_spread, wavelength_to_omega,
)

TRAP_OMEGA = UNITS.hz_to_angular(32.4e3)


def test_unit_conversion_is_two_pi():
    assert UNITS.hz_to_angular(1.0) == pytest.approx(2.0 * math.pi)
    assert UNITS.angular_to_hz(UNITS.hz_to_angular(32.4e3)) == pytest.approx(32.4e3, rel=1e-15)


def test_wavelength_round_trip():
    omega = wavelength_to_omega(532e-9)
    assert omega_to_wavelength(omega) == pytest.approx(532e-9, rel=1e-14)


def test_orthogonal_beams_kick_is_sqrt2_k():
    assert sdk_k_eff(532e-9) == pytest.approx(math.sqrt(2.0) * 2.0 * math.pi / 532e-9, rel=1e-14)


def test_nominal_lamb_dicke_parameter(nominal_trap):
    assert nominal_trap.lamb_dicke == pytest.approx(0.56, abs=0.01)
    assert nominal_trap.period == pytest.approx(30.864e-6, abs=1e-9)


def test_lamb_dicke_rejects_non_positive_inputs(barium):
    with pytest.raises(DomainError):
        lamb_dicke(0.0, barium.mass, TRAP_OMEGA)
    with pytest.raises(DomainError):
        TrapParams(secular_omega=-1.0, k_eff=1e7, mass=barium.mass)


def test_thermal_nbar_at_doppler_temperature():
    assert thermal_nbar(1.6e-3, TRAP_OMEGA) == pytest.approx(1029.0, abs=1.0)


def test_bose_occupation_is_half_below_classical():
    classical = thermal_nbar(1e-3, TRAP_OMEGA)
    bose = thermal_nbar(1e-3, TRAP_OMEGA, bose=True)
    assert classical - bose == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("bose", [False, True])
def test_nbar_temperature_inverse(bose):
    nbar = thermal_nbar(0.5e-3, TRAP_OMEGA, bose=bose)
    assert nbar_to_temperature(nbar, TRAP_OMEGA, bose=bose) == pytest.approx(0.5e-3, rel=1e-12)


def test_zero_temperature_edges():
    assert thermal_nbar(0.0, TRAP_OMEGA) == 0.0
    assert thermal_position_spread(0.0, 1e-25, TRAP_OMEGA) == 0.0
    with pytest.raises(DomainError):
        thermal_nbar(-1e-3, TRAP_OMEGA)


def test_doppler_limit_of_barium(barium):
    assert doppler_limit_temperature(barium) == pytest.approx(0.48e-3, rel=0.01)


def test_builtin_species_values(barium):
    assert barium.mass_u == pytest.approx(138.0)
    assert omega_to_wavelength(barium.resonance_omega0) == pytest.approx(493.4e-9, rel=1e-12)
    assert barium.fine_structure_omega > 0
    assert barium.dipole_moment > 0


def test_species_table_lists_all_shipped_ions():
    table = load_species_table()
    assert {"Ba138+", "Ca40+", "Sr88+", "Yb174+"} <= set(table)
    for name in table:
        assert make_species(name, table).linewidth > 0


def test_unknown_species_is_a_key_error():
    with pytest.raises(UnknownSpeciesError) as info:
        make_species("Xx999+")
    assert isinstance(info.value, KeyError)
    assert info.value.name == "Xx999+"


def test_species_file_overrides_and_validation(tmp_path):
    path = tmp_path / "species.yaml"
    path.write_text(
        "Heavy+:\n"
        "  mass_u: 500.0\n"
        "  s_p12_nm: 400.0\n"
        "  s_p32_nm: 390.0\n"
        "  p12_linewidth_hz: 1.0e+7\n"
        "Inverted+:\n"
        "  mass_u: 40.0\n"
        "  s_p12_nm: 390.0\n"
        "  s_p32_nm: 400.0\n"
        "  p12_linewidth_hz: 1.0e+7\n"
    )
    table = load_species_table(path)
    assert "Ba138+" in table
    with pytest.raises(DomainError):
        make_species("Heavy+", table)
    with pytest.raises(DomainError):
        make_species("Inverted+", table)


def test_missing_explicit_species_file(tmp_path):
    with pytest.raises(ValidationError):
        load_species_table(tmp_path / "absent.yaml")


def test_species_rejects_non_positive_mass():
    with pytest.raises(DomainError):
        IonSpecies(name="bad", mass=0.0, resonance_omega0=1.0, fine_structure_omega=1.0,
                   dipole_moment=1.0)
