#!/usr/bin/env python3
"""
Ultrafast Ion Toolkit - Command Line

Computes figure-ready curves, generates synthetic experiment data and fits
it. Every physics default comes from config.yaml; flags override single
values. Frequencies on the command line are ordinary Hz.

Usage:
    python ultrafast_ion.py rabi-curve --out data/rabi_curve.csv
    python ultrafast_ion.py revival --nbar 1059
    python ultrafast_ion.py synth --mode revival_scan --seed 1 --out data/revival.csv
    python ultrafast_ion.py fit revival data/revival.csv --out data/revival_fit.json
    python ultrafast_ion.py lightshift --sigma-energy-nj 14 --pi-energy-nj 24
    python ultrafast_ion.py magic --species Ba138+
"""

import argparse
import copy
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np
import yaml

from data_io import (
    REVIVAL_COLUMNS, columns_to_dataset, csv_text, fringe_columns, rabi_columns,
    read_csv, write_csv, write_report,
)
from errors import FitConvergenceError, UltrafastIonError, ValidationError
from estimation import (
    FringeDataset, RabiDataset, feldman_cousins_interval, fit_fringes, fit_rabi_curve,
    fit_revival, revival_points,
)
from ion_physics import (
    UNITS, IonSpecies, TrapParams, load_species_table, make_species, omega_to_wavelength,
)
from pulse_physics import Envelope, PulseParams, magic_detuning, magic_wavelength
from spin_motion import (
    RamseyConfig, ramsey_pup_analytic, ramsey_pup_mc, revival_half_width, revival_time,
    visibility_analytic, visibility_budget, visibility_model,
)
from synth_data import (
    ExperimentMode, ExperimentPlan, revival_detunings, revival_wait_times, simulate_experiment,
)
from thermal_beam import (
    BeamThermalConfig, center_pi_energy, energy_to_theta, mc_thermal_rabi, peak_theta,
    thermal_rabi_curve, thermal_rabi_pdown,
)
from tls_solver import BeamPair, lightshift_fidelity

logger = logging.getLogger(__name__)

PROJECT_DIR = Path(__file__).parent
DEFAULT_CONFIG_FILE = PROJECT_DIR / "config.yaml"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def default_config() -> dict:
    """Default configuration if config.yaml is not found"""
    return {
        'species': {'name': 'Ba138+', 'table': 'species.yaml'},
        'trap': {
            'secular_frequency_hz': 32400.0,
            'wavelength_nm': 532.0,
            'crossing_angle_deg': 90.0,
        },
        'pulse': {
            'envelope': 'sech',
            'fwhm_ps': 16.4,
            'qubit_splitting_hz': 1.5e8,
            'pi_energy_nj': 38.0,
        },
        'beams': {
            'sigma_minus_energy_nj': 14.0,
            'pi_energy_nj': 24.0,
            'sigma_minus_waist_um': 20.0,
            'pi_waist_um': 8.5,
            'rabi_waist_um': 8.5,
        },
        'thermal': {'temperature_mk': 0.5, 'profile': 'waist'},
        'ramsey': {
            'nbar': 1059.0,
            'eta': None,
            'offset_a': None,
            'amplitude_b': None,
            'window_us': 1.0,
            'step_us': 0.001,
            'detuning_span_hz': 1.0e5,
            'detuning_points': 201,
            'wait_us': 30.864,
        },
        'spam': {'visibility': 0.70, 'slack': 0.05},
        'budget': {
            'f_thermal': 0.97,
            'f_lightshift': 0.95,
            't2_us': 100.0,
            'sdk_fidelity': 0.92,
        },
        'experiment': {
            'repetitions': 1000,
            'seed': 1,
            'max_energy_nj': 129.0,
            'energy_step_nj': 1.0,
            'revival_points': 41,
            'revival_window_us': 1.0,
            'revival_detunings': 8,
            'visibility_offset': 0.05,
        },
        'fitting': {'confidence_level': 0.90, 'fc_sigma': 0.026, 'fc_bound': 1.0},
        'output': {'directory': 'data', 'format': 'csv'},
    }


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[str] = None) -> dict:
    """Load configuration from YAML, merged over the defaults"""
    config_path = Path(path) if path else DEFAULT_CONFIG_FILE
    try:
        with open(config_path, 'r') as f:
            user = yaml.safe_load(f) or {}
    except FileNotFoundError:
        logger.warning("config file %s not found, using defaults", config_path)
        return default_config()
    except yaml.YAMLError as e:
        raise ValidationError(f"cannot parse {config_path}: {e}")
    if not isinstance(user, dict):
        raise ValidationError(f"{config_path} must contain a mapping of sections")
    return _deep_merge(default_config(), user)


@dataclass
class RunConfig:
    """Parsed command, output target and the merged physics settings"""
    command: str
    settings: dict
    out: Optional[Path] = None
    fmt: str = "csv"
    seed: int = 1
    mc: Optional[int] = None
    _species: Optional[IonSpecies] = field(default=None, init=False, repr=False)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        settings = load_config(args.config)
        for key, value in vars(args).items():
            if "." in key and value is not None:
                section, name = key.split(".", 1)
                settings.setdefault(section, {})[name] = value
        seed = args.seed if args.seed is not None else int(settings['experiment']['seed'])
        fmt = args.format or settings['output']['format']
        if fmt not in ("csv", "json"):
            raise ValidationError(f"output format must be csv or json, got {fmt!r}")
        return cls(command=args.command, settings=settings,
                   out=Path(args.out) if args.out else None,
                   fmt=fmt, seed=seed, mc=getattr(args, "mc", None))

    def value(self, section: str, name: str) -> float:
        raw = self.settings[section][name]
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ValidationError(f"{section}.{name} must be a number, got {raw!r}")

    # --- physics objects --------------------------------------------------

    def species_table_path(self) -> Path:
        table_path = Path(self.settings['species']['table'])
        return table_path if table_path.is_absolute() else PROJECT_DIR / table_path

    def species(self) -> IonSpecies:
        if self._species is None:
            table = load_species_table(self.species_table_path())
            self._species = make_species(str(self.settings['species']['name']), table)
        return self._species

    @property
    def trap_omega(self) -> float:
        return UNITS.hz_to_angular(self.value('trap', 'secular_frequency_hz'))

    @property
    def wavelength(self) -> float:
        return self.value('trap', 'wavelength_nm') * 1e-9

    def trap(self) -> TrapParams:
        return TrapParams.from_geometry(self.species(), self.trap_omega, self.wavelength,
                                        math.radians(self.value('trap', 'crossing_angle_deg')))

    @property
    def eta(self) -> float:
        if self.settings['ramsey'].get('eta') is not None:
            return self.value('ramsey', 'eta')
        return self.trap().lamb_dicke

    @property
    def profile(self) -> str:
        return str(self.settings['thermal']['profile'])

    @property
    def pi_energy(self) -> float:
        return self.value('pulse', 'pi_energy_nj') * 1e-9

    def beam(self) -> BeamThermalConfig:
        return BeamThermalConfig(waist=self.value('beams', 'rabi_waist_um') * 1e-6,
                                 temperature=self.value('thermal', 'temperature_mk') * 1e-3,
                                 mass=self.species().mass, trap_omega=self.trap_omega)

    def pulse(self) -> PulseParams:
        return PulseParams(envelope=Envelope(self.settings['pulse']['envelope']),
                           fwhm=self.value('pulse', 'fwhm_ps') * 1e-12,
                           area=math.pi,
                           detuning_qubit=UNITS.hz_to_angular(self.value('pulse', 'qubit_splitting_hz')))

    def ramsey(self, qubit_delta: float = 0.0, wait_time: float = 0.0) -> RamseyConfig:
        return RamseyConfig(eta=self.eta, trap_omega=self.trap_omega, qubit_delta=qubit_delta,
                            wait_time=wait_time, nbar=self.value('ramsey', 'nbar'))

    def energy_grid(self) -> np.ndarray:
        top = self.value('experiment', 'max_energy_nj')
        step = self.value('experiment', 'energy_step_nj')
        if not step > 0 or top < 0:
            raise ValidationError("energy grid needs a positive step and non-negative maximum")
        return np.arange(int(round(top / step)) + 1) * step * 1e-9


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _status(run: RunConfig, message: str) -> None:
    """Status lines go to stdout unless data is being written there"""
    stream = sys.stdout if run.out is not None else sys.stderr
    print(message, file=stream)


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _emit_table(run: RunConfig, inputs: dict, columns: Dict[str, Sequence[float]]) -> None:
    if run.fmt == "json":
        text = write_report(run.out, run.command, inputs, {"columns": columns})
        if run.out is None:
            print(text)
    elif run.out is None:
        sys.stdout.write(csv_text(columns))
    else:
        write_csv(run.out, columns)
    if run.out is not None:
        _status(run, f"💾 Saved {run.command} data to {run.out}")


def _emit_report(run: RunConfig, inputs: dict, results: dict) -> None:
    text = write_report(run.out, run.command, inputs, results)
    if run.out is None:
        print(text)
    else:
        _status(run, f"💾 Saved {run.command} report to {run.out}")


def _first_peak(y: np.ndarray) -> int:
    for i in range(1, y.size - 1):
        if y[i] >= y[i - 1] and y[i] > y[i + 1]:
            return i
    return int(np.argmax(y))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_rabi_curve(run: RunConfig, args: argparse.Namespace) -> int:
    """Thermal Rabi flopping curve versus pulse energy"""
    beam = run.beam()
    energies = run.energy_grid()
    p_down = thermal_rabi_curve(energies, run.pi_energy, beam, run.profile)
    theta_peak = peak_theta(beam, run.profile)
    columns = {"energy_nj": energies / 1e-9, "p_down_analytic": p_down}

    if run.mc:
        estimates = [mc_thermal_rabi(2.0 * float(energy_to_theta(e, run.pi_energy, theta_peak)),
                                     beam, run.mc, _point_seed(run.seed, i), run.profile)
                     for i, e in enumerate(energies)]
        columns["p_down_mc"] = np.array([m.value for m in estimates])
        columns["stderr"] = np.array([m.stderr for m in estimates])

    peak = _first_peak(p_down)
    fidelity = thermal_rabi_pdown(theta_peak, beam, run.profile)
    _status(run, f"✅ First maximum at {energies[peak] / 1e-9:.1f} nJ, "
                 f"peak transfer {fidelity:.4f} (g = {beam.g:.4g})")
    inputs = {"temperature_mk": beam.temperature / 1e-3, "waist_um": beam.waist / 1e-6,
              "pi_energy_nj": run.pi_energy / 1e-9,
              "center_pi_energy_nj": center_pi_energy(run.pi_energy, theta_peak) / 1e-9,
              "mc": run.mc, "seed": run.seed}
    _emit_table(run, inputs, columns)
    return EXIT_OK


def cmd_revival(run: RunConfig, args: argparse.Namespace) -> int:
    """Visibility collapse and revival around the first trap period"""
    window = run.value('ramsey', 'window_us') * 1e-6
    step = run.value('ramsey', 'step_us') * 1e-6
    if not (window > 0 and step > 0):
        raise ValidationError("revival window and step must be positive")
    omega = run.trap_omega
    center = revival_time(omega)
    tau = center + np.linspace(-window, window, int(round(2.0 * window / step)) + 1)
    tau = tau[tau >= 0]

    a, b = run.settings['ramsey'].get('offset_a'), run.settings['ramsey'].get('amplitude_b')
    if (a is None) != (b is None):
        raise ValidationError("give both --A and --B or neither")
    if a is None:
        vis = np.array([visibility_analytic(run.ramsey(wait_time=float(t))) for t in tau])
    else:
        vis = np.array([visibility_model(run.ramsey(wait_time=float(t)), float(a), float(b))
                        for t in tau])

    half = revival_half_width(run.ramsey(wait_time=center))
    peak = int(np.argmax(vis))
    _status(run, f"✅ Revival maximum at {tau[peak] / 1e-6:.3f} us, "
                 f"FWHM {2.0 * half / 1e-6:.3f} us (eta = {run.eta:.4f})")
    inputs = {"trap_hz": UNITS.angular_to_hz(omega), "eta": run.eta,
              "nbar": run.value('ramsey', 'nbar'), "A": a, "B": b}
    _emit_table(run, inputs, {"tau_us": tau / 1e-6, "visibility": vis})
    return EXIT_OK


def cmd_ramsey_scan(run: RunConfig, args: argparse.Namespace) -> int:
    """Ramsey fringe P_up versus qubit detuning at a fixed wait time"""
    wait = run.value('ramsey', 'wait_us') * 1e-6
    center = run.value('pulse', 'qubit_splitting_hz')
    span = run.value('ramsey', 'detuning_span_hz')
    points = int(run.value('ramsey', 'detuning_points'))
    if points < 2:
        raise ValidationError("ramsey-scan needs at least 2 detuning points")
    detunings_hz = center + np.linspace(-span / 2.0, span / 2.0, points)

    configs = [run.ramsey(UNITS.hz_to_angular(float(d)), wait) for d in detunings_hz]
    columns = {"detuning_hz": detunings_hz,
               "p_up_analytic": np.array([ramsey_pup_analytic(cfg) for cfg in configs])}
    if run.mc:
        estimates = [ramsey_pup_mc(cfg, run.mc, _point_seed(run.seed, i))
                     for i, cfg in enumerate(configs)]
        columns["p_up_mc"] = np.array([m.value for m in estimates])
        columns["stderr"] = np.array([m.stderr for m in estimates])

    _status(run, f"✅ Fringe visibility {visibility_analytic(configs[0]):.4f} at {wait / 1e-6:.3f} us")
    inputs = {"wait_us": wait / 1e-6, "center_hz": center, "span_hz": span,
              "nbar": run.value('ramsey', 'nbar'), "eta": run.eta, "mc": run.mc, "seed": run.seed}
    _emit_table(run, inputs, columns)
    return EXIT_OK


def _plan(run: RunConfig, mode: ExperimentMode) -> ExperimentPlan:
    reps = int(run.value('experiment', 'repetitions'))
    common = dict(repetitions=reps, spam_visibility=run.value('spam', 'visibility'), seed=run.seed)
    if mode is ExperimentMode.RABI_CURVE:
        return ExperimentPlan(mode=mode, grid=run.energy_grid(), beam=run.beam(),
                              pi_energy=run.pi_energy, **common)

    center = UNITS.hz_to_angular(run.value('pulse', 'qubit_splitting_hz'))
    if mode is ExperimentMode.REVIVAL_SCAN:
        grid = revival_wait_times(run.trap_omega, run.value('experiment', 'revival_window_us') * 1e-6,
                                  int(run.value('experiment', 'revival_points')))
        detunings = revival_detunings(center, run.trap_omega,
                                      int(run.value('experiment', 'revival_detunings')))
    else:
        grid = np.array([run.value('ramsey', 'wait_us') * 1e-6])
        span = UNITS.hz_to_angular(run.value('ramsey', 'detuning_span_hz'))
        detunings = center + np.linspace(-span / 2.0, span / 2.0,
                                         int(run.value('ramsey', 'detuning_points')))
    return ExperimentPlan(mode=mode, grid=grid, detunings=detunings, ramsey=run.ramsey(),
                          sdk_fidelity=run.value('budget', 'sdk_fidelity'),
                          t2=run.value('budget', 't2_us') * 1e-6,
                          visibility_offset=run.value('experiment', 'visibility_offset'),
                          **common)


def cmd_synth(run: RunConfig, args: argparse.Namespace) -> int:
    """Synthetic projection-noise limited dataset"""
    mode = ExperimentMode(args.mode)
    dataset = simulate_experiment(_plan(run, mode))
    columns = rabi_columns(dataset) if isinstance(dataset, RabiDataset) else fringe_columns(dataset)
    _status(run, f"✅ Simulated {len(dataset)} {mode.value} points (seed {run.seed})")
    _emit_table(run, {"mode": mode.value, "seed": run.seed}, columns)
    return EXIT_OK


def _fit_revival(run: RunConfig, columns: Dict[str, np.ndarray]):
    if all(name in columns for name in REVIVAL_COLUMNS):
        tau = columns["tau_us"] * 1e-6
        vis, sig = columns["visibility"], columns["visibility_err"]
    else:
        dataset = columns_to_dataset(columns)
        if not isinstance(dataset, FringeDataset):
            raise ValidationError("revival fits need a fringe scan or a visibility table")
        tau, vis, sig = revival_points(fit_fringes(dataset))
    result = fit_revival(tau, vis, sig, eta=run.eta)
    _status(run, f"✅ tau_rev = {result.extras['tau_rev'] / 1e-6:.4f} us, "
                 f"nbar = {result['nbar']:.0f} +/- {result.error('nbar'):.0f}")
    return result.to_dict(), result.converged


def cmd_fit(run: RunConfig, args: argparse.Namespace) -> int:
    """Fit a dataset written by synth (or an experiment in the same format)"""
    columns = read_csv(args.input)

    if args.model == "revival":
        results, converged = _fit_revival(run, columns)
    elif args.model == "rabi":
        dataset = columns_to_dataset(columns)
        if not isinstance(dataset, RabiDataset):
            raise ValidationError("rabi fits need energy_nj, p_down and repetitions columns")
        result = fit_rabi_curve(dataset.energy, dataset.p_down, dataset.repetitions, run.beam(),
                                spam_visibility=run.value('spam', 'visibility'))
        _status(run, f"✅ E_pi = {result['pi_energy'] / 1e-9:.2f} nJ, "
                     f"T = {result['temperature'] / 1e-3:.3f} +/- {result.error('temperature') / 1e-3:.3f} mK")
        results, converged = result.to_dict(), result.converged
    else:
        dataset = columns_to_dataset(columns)
        if not isinstance(dataset, FringeDataset):
            raise ValidationError("fringe fits need tau_us, detuning_hz, p_up and repetitions columns")
        fits = fit_fringes(dataset)
        results = {"fringes": [{"tau_us": tau / 1e-6, **fit.to_dict()} for tau, fit in sorted(fits.items())]}
        converged = all(fit.converged for fit in fits.values())
        _status(run, f"✅ Fitted {len(fits)} fringes")

    _emit_report(run, {"model": args.model, "input": str(args.input), "eta": run.eta}, results)
    if not converged:
        raise FitConvergenceError(f"{args.model} fit did not converge")
    return EXIT_OK


def cmd_lightshift(run: RunConfig, args: argparse.Namespace) -> int:
    """Pi-pulse fidelity limited by the differential light shift"""
    energies = BeamPair(run.value('beams', 'sigma_minus_energy_nj') * 1e-9,
                        run.value('beams', 'pi_energy_nj') * 1e-9)
    waists = BeamPair(run.value('beams', 'sigma_minus_waist_um') * 1e-6,
                      run.value('beams', 'pi_waist_um') * 1e-6)
    scale = 0.0 if args.no_shift else 1.0
    fidelity = lightshift_fidelity(energies, waists, run.species(), run.pulse(),
                                   run.wavelength, shift_scale=scale)
    results = {"fidelity": fidelity}
    if energies.sigma_minus == 0 or energies.pi == 0:
        results["note"] = "a Raman beam carries no energy, so there is no two-photon coupling"
        _status(run, "⚠️  " + results["note"])
    _status(run, f"✅ F_lightshift = {fidelity:.4f}")
    inputs = {"sigma_energy_nj": energies.sigma_minus / 1e-9, "pi_energy_nj": energies.pi / 1e-9,
              "sigma_waist_um": waists.sigma_minus / 1e-6, "pi_waist_um": waists.pi / 1e-6,
              "wavelength_nm": run.wavelength / 1e-9, "fwhm_ps": run.pulse().fwhm / 1e-12,
              "species": run.species().name, "shift_scale": scale}
    _emit_report(run, inputs, results)
    return EXIT_OK


def cmd_magic(run: RunConfig, args: argparse.Namespace) -> int:
    """Laser detuning and wavelength that null the differential light shift"""
    species = run.species()
    results = {"magic_detuning_hz": UNITS.angular_to_hz(magic_detuning(species)),
               "magic_wavelength_nm": magic_wavelength(species) / 1e-9}
    _status(run, f"✅ {species.name}: magic wavelength {results['magic_wavelength_nm']:.1f} nm")
    _emit_report(run, {"species": species.name}, results)
    return EXIT_OK


def cmd_species(run: RunConfig, args: argparse.Namespace) -> int:
    """Print the species table"""
    table_path = run.species_table_path()
    table = load_species_table(table_path)
    rows = {name: make_species(name, table) for name in sorted(table)}
    if run.out is None and run.fmt == "csv":
        print(f"{'species':<10} {'mass_u':>10} {'S-P1/2 nm':>11} {'P fine THz':>11}")
        for name, s in rows.items():
            print(f"{name:<10} {s.mass_u:>10.3f} {omega_to_wavelength(s.resonance_omega0) / 1e-9:>11.3f} "
                  f"{UNITS.angular_to_hz(s.fine_structure_omega) / 1e12:>11.3f}")
        return EXIT_OK
    _emit_report(run, {"table": str(table_path)}, {name: s.to_dict() for name, s in rows.items()})
    return EXIT_OK


def cmd_budget(run: RunConfig, args: argparse.Namespace) -> int:
    """Product of the visibility-limiting factors at the revival"""
    tau = args.tau_us * 1e-6 if args.tau_us is not None else revival_time(run.trap_omega)
    inputs = {"v_spam": run.value('spam', 'visibility'),
              "f_thermal": run.value('budget', 'f_thermal'),
              "f_lightshift": run.value('budget', 'f_lightshift'),
              "tau_us": tau / 1e-6, "t2_us": run.value('budget', 't2_us')}
    total = visibility_budget(inputs["v_spam"], inputs["f_thermal"], inputs["f_lightshift"],
                              tau, inputs["t2_us"] * 1e-6)
    _status(run, f"✅ Expected revival visibility {total:.3f}")
    _emit_report(run, inputs, {"visibility": total})
    return EXIT_OK


def cmd_fc(run: RunConfig, args: argparse.Namespace) -> int:
    """Feldman-Cousins interval for a bounded Gaussian measurement"""
    sigma = run.value('fitting', 'fc_sigma')
    bound = run.value('fitting', 'fc_bound')
    cl = run.value('fitting', 'confidence_level')
    interval = feldman_cousins_interval(args.measured, sigma, bound, cl)
    _status(run, f"✅ {args.measured:g} -> [{interval.lower:.4f}, {interval.upper:.4f}] at {cl:.0%} CL")
    _emit_report(run, {"measured": args.measured, "sigma": sigma, "bound": bound, "cl": cl},
                 {"lower": interval.lower, "upper": interval.upper})
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _count(text: str) -> int:
    """Sample counts accept scientific notation such as 1e6"""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value < 1 or value != int(value):
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return int(value)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML config file (default: config.yaml)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default=None,
                        help="output format for curves and datasets (default from config)")
    common.add_argument("--seed", type=int, default=None, help="integer random seed")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    common.add_argument("--species", dest="species.name", default=None, help="ion species name")
    common.add_argument("--trap-hz", dest="trap.secular_frequency_hz", type=float, default=None,
                        help="secular trap frequency omega/2pi (Hz)")
    return common


def _add_thermal_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--temperature-mk", dest="thermal.temperature_mk", type=float, default=None,
                   help="ion temperature (mK)")
    p.add_argument("--waist-um", dest="beams.rabi_waist_um", type=float, default=None,
                   help="beam 1/e^2 intensity radius (um)")
    p.add_argument("--pi-pulse-nj", dest="pulse.pi_energy_nj", type=float, default=None,
                   help="pulse energy of the first transfer maximum (nJ)")
    p.add_argument("--max-energy-nj", dest="experiment.max_energy_nj", type=float, default=None,
                   help="largest pulse energy of the sweep (nJ)")
    p.add_argument("--step-nj", dest="experiment.energy_step_nj", type=float, default=None,
                   help="pulse energy step (nJ)")
    p.add_argument("--profile", dest="thermal.profile", choices=["waist", "intensity"], default=None,
                   help="area falloff profile (dimensionless choice)")


def _add_ramsey_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nbar", dest="ramsey.nbar", type=float, default=None,
                   help="mean phonon number (dimensionless)")
    p.add_argument("--eta", dest="ramsey.eta", type=float, default=None,
                   help="Lamb-Dicke parameter (dimensionless; default from trap geometry)")
    p.add_argument("--wavelength-nm", dest="trap.wavelength_nm", type=float, default=None,
                   help="Raman laser wavelength (nm)")
    p.add_argument("--qubit-hz", dest="pulse.qubit_splitting_hz", type=float, default=None,
                   help="qubit splitting delta/2pi (Hz)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Ultrafast trapped-ion simulation and estimation toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Frequencies are ordinary Hz; energies nJ; lengths um; times us; temperatures mK.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    p = sub.add_parser("rabi-curve", parents=[common], help="thermal Rabi flopping curve")
    _add_thermal_flags(p)
    p.add_argument("--mc", type=_count, default=None,
                   help="also run Monte-Carlo with this many samples per point (count)")
    p.set_defaults(handler=cmd_rabi_curve)

    p = sub.add_parser("revival", parents=[common], help="visibility collapse and revival")
    _add_ramsey_flags(p)
    p.add_argument("--window-us", dest="ramsey.window_us", type=float, default=None,
                   help="half window around the revival (us)")
    p.add_argument("--step-us", dest="ramsey.step_us", type=float, default=None,
                   help="wait time step (us)")
    p.add_argument("--A", dest="ramsey.offset_a", type=float, default=None,
                   help="background visibility A (dimensionless)")
    p.add_argument("--B", dest="ramsey.amplitude_b", type=float, default=None,
                   help="revival amplitude B (dimensionless)")
    p.set_defaults(handler=cmd_revival)

    p = sub.add_parser("ramsey-scan", parents=[common], help="Ramsey fringe versus detuning")
    _add_ramsey_flags(p)
    p.add_argument("--wait-us", dest="ramsey.wait_us", type=float, default=None,
                   help="Ramsey wait time (us)")
    p.add_argument("--span-hz", dest="ramsey.detuning_span_hz", type=float, default=None,
                   help="detuning span around the qubit splitting (Hz)")
    p.add_argument("--points", dest="ramsey.detuning_points", type=_count, default=None,
                   help="number of detuning points (count)")
    p.add_argument("--mc", type=_count, default=None,
                   help="also run Monte-Carlo with this many samples per point (count)")
    p.set_defaults(handler=cmd_ramsey_scan)

    p = sub.add_parser("synth", parents=[common], help="synthetic experiment dataset")
    p.add_argument("--mode", choices=[m.value for m in ExperimentMode], default="rabi_curve",
                   help="experiment type")
    _add_thermal_flags(p)
    _add_ramsey_flags(p)
    p.add_argument("--repetitions", dest="experiment.repetitions", type=_count, default=None,
                   help="repetitions per point (count)")
    p.add_argument("--spam-visibility", dest="spam.visibility", type=float, default=None,
                   help="SPAM visibility (dimensionless, 0-1)")
    p.add_argument("--sdk-fidelity", dest="budget.sdk_fidelity", type=float, default=None,
                   help="spin-dependent kick fidelity (dimensionless, 0-1)")
    p.add_argument("--t2-us", dest="budget.t2_us", type=float, default=None,
                   help="coherence time T2 (us)")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("fit", parents=[common], help="fit a dataset and write a JSON report")
    p.add_argument("model", choices=["rabi", "fringe", "revival"], help="model to fit")
    p.add_argument("input", help="CSV dataset")
    p.add_argument("--waist-um", dest="beams.rabi_waist_um", type=float, default=None,
                   help="beam 1/e^2 intensity radius for Rabi fits (um)")
    p.add_argument("--spam-visibility", dest="spam.visibility", type=float, default=None,
                   help="SPAM visibility (dimensionless, 0-1)")
    p.add_argument("--eta", dest="ramsey.eta", type=float, default=None,
                   help="Lamb-Dicke parameter for revival fits (dimensionless)")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("lightshift", parents=[common], help="light-shift limited pi-pulse fidelity")
    p.add_argument("--sigma-energy-nj", dest="beams.sigma_minus_energy_nj", type=float, default=None,
                   help="sigma-minus pulse energy (nJ)")
    p.add_argument("--pi-energy-nj", dest="beams.pi_energy_nj", type=float, default=None,
                   help="pi polarized pulse energy (nJ)")
    p.add_argument("--sigma-waist-um", dest="beams.sigma_minus_waist_um", type=float, default=None,
                   help="sigma-minus beam waist (um)")
    p.add_argument("--pi-waist-um", dest="beams.pi_waist_um", type=float, default=None,
                   help="pi beam waist (um)")
    p.add_argument("--wavelength-nm", dest="trap.wavelength_nm", type=float, default=None,
                   help="laser wavelength (nm)")
    p.add_argument("--fwhm-ps", dest="pulse.fwhm_ps", type=float, default=None,
                   help="pulse FWHM (ps)")
    p.add_argument("--qubit-hz", dest="pulse.qubit_splitting_hz", type=float, default=None,
                   help="qubit splitting delta/2pi (Hz)")
    p.add_argument("--no-shift", action="store_true", help="switch the light shift off")
    p.set_defaults(handler=cmd_lightshift)

    p = sub.add_parser("magic", parents=[common], help="magic detuning and wavelength")
    p.set_defaults(handler=cmd_magic)

    p = sub.add_parser("species", parents=[common], help="print the species table")
    p.set_defaults(handler=cmd_species)

    p = sub.add_parser("budget", parents=[common], help="visibility budget at the revival")
    p.add_argument("--v-spam", dest="spam.visibility", type=float, default=None,
                   help="SPAM visibility (dimensionless, 0-1)")
    p.add_argument("--f-thermal", dest="budget.f_thermal", type=float, default=None,
                   help="thermal kick fidelity (dimensionless, 0-1)")
    p.add_argument("--f-lightshift", dest="budget.f_lightshift", type=float, default=None,
                   help="light-shift kick fidelity (dimensionless, 0-1)")
    p.add_argument("--tau-us", type=float, default=None,
                   help="wait time (us; default first revival)")
    p.add_argument("--t2-us", dest="budget.t2_us", type=float, default=None,
                   help="coherence time T2 (us)")
    p.set_defaults(handler=cmd_budget)

    p = sub.add_parser("fc", parents=[common], help="Feldman-Cousins interval")
    p.add_argument("--measured", type=float, required=True,
                   help="measured value (same units as the bound)")
    p.add_argument("--sigma", dest="fitting.fc_sigma", type=float, default=None,
                   help="measurement standard deviation (same units as the bound)")
    p.add_argument("--bound", dest="fitting.fc_bound", type=float, default=None,
                   help="physical upper bound (dimensionless for fidelities)")
    p.add_argument("--cl", dest="fitting.confidence_level", type=float, default=None,
                   help="confidence level (fraction, 0.5-1)")
    p.set_defaults(handler=cmd_fc)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        run = RunConfig.from_args(args)
        return args.handler(run, args)
    except ValidationError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (UltrafastIonError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
