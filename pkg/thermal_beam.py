#!/usr/bin/env python3
"""
Thermal Beam Sampling - Position-Spread Limited Rabi Flopping

A thermal ion samples different parts of the focused Raman beam from shot
to shot, so the pulse area it sees is reduced by exp(-(x^2 + y^2)/w0^2)
relative to the beam center. Averaged over a 2-D Gaussian position spread
the transfer probability has the closed form

    P_down(theta) = 1/2 (1 - 1F2[g/2; 1/2, 1 + g/2; -theta^2])

with theta half the center pulse area and g = w0^2 / (2 sigma_ion^2).
This module evaluates that form, provides a Monte-Carlo position-sampling
oracle for it, and maps pulse energy to pulse area.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from errors import DomainError, SeriesConvergenceError, ValidationError
from ion_physics import thermal_position_spread

logger = logging.getLogger(__name__)

MAX_SERIES_TERMS = 10_000
SERIES_X_LIMIT = 1e4
SERIES_RTOL = 1e-15

# Above this theta^2 the alternating series loses too many digits to
# cancellation and the integral representation is used instead
SERIES_THETA2_SWITCH = 10.0

MC_CHUNK = 1 << 16

PROFILES = {"waist": 2.0, "intensity": 4.0}  # g / kappa for each beam profile


@dataclass(frozen=True)
class BeamThermalConfig:
    """Beam waist and thermal state of the ion; sigma_ion and g are derived"""
    waist: float
    temperature: float
    mass: float
    trap_omega: float
    secondary_omega: Optional[float] = None
    sigma_ion: float = field(init=False)
    g: float = field(init=False)

    def __post_init__(self):
        if not self.waist > 0:
            raise DomainError(f"beam waist must be positive, got {self.waist}")
        if self.secondary_omega is not None and not self.secondary_omega > 0:
            raise DomainError("secondary_omega must be positive when given")
        sigma = thermal_position_spread(self.temperature, self.mass, self.trap_omega)
        object.__setattr__(self, "sigma_ion", sigma)
        g = math.inf if sigma == 0 else self.waist ** 2 / (2.0 * sigma ** 2)
        object.__setattr__(self, "g", g)

    @property
    def sigma_secondary(self) -> float:
        """Position spread along the second transverse axis"""
        if self.secondary_omega is None:
            return self.sigma_ion
        return thermal_position_spread(self.temperature, self.mass, self.secondary_omega)

    def with_temperature(self, temperature: float) -> "BeamThermalConfig":
        return replace(self, temperature=temperature)


class McEstimate(NamedTuple):
    value: float
    stderr: float


def hyp1f2(a: float, b: float, c: float, x: float,
           max_terms: int = MAX_SERIES_TERMS,
           x_limit: float = SERIES_X_LIMIT) -> float:
    """
    Generalized hypergeometric function 1F2[a; b, c; x] by its power series

    Terms follow the recursion t_{k+1} = t_k (a+k) x / ((b+k)(c+k)(k+1))
    and are summed with math.fsum once the tail is negligible.

    Args:
        a, b, c: Parameters; b and c must not be non-positive integers
        x: Argument, |x| <= x_limit
        max_terms: Iteration cap
        x_limit: Largest accepted |x|

    Returns:
        The series value

    Raises:
        ValidationError: b or c is a non-positive integer, or |x| too large
        SeriesConvergenceError: the tail did not fall below tolerance
    """
    for name, value in (("b", b), ("c", c)):
        if value <= 0 and float(value).is_integer():
            raise ValidationError(f"hyp1f2: {name} = {value} is a non-positive integer")
    if not math.isfinite(x) or abs(x) > x_limit:
        raise ValidationError(f"hyp1f2: |x| = {abs(x)} exceeds series limit {x_limit}")
    if x == 0:
        return 1.0

    term = 1.0
    terms = [term]
    partial = 1.0
    for k in range(max_terms):
        ratio = (a + k) * x / ((b + k) * (c + k) * (k + 1))
        term *= ratio
        if term == 0.0:
            break
        terms.append(term)
        partial += term
        if abs(ratio) < 0.5 and abs(term) <= SERIES_RTOL * abs(partial):
            break
    else:
        raise SeriesConvergenceError(
            f"hyp1f2[{a}; {b}, {c}; {x}] did not converge in {max_terms} terms")

    logger.debug("hyp1f2[%g; %g, %g; %g] converged in %d terms", a, b, c, x, len(terms))
    return math.fsum(terms)


def hyp1f2_integral(kappa: float, theta: float) -> float:
    """
    1F2[kappa; 1/2, 1 + kappa; -theta^2] from its integral form

    Equals 2 kappa * integral_0^1 s^(2 kappa - 1) cos(2 theta s) ds, which
    has no cancellation problem at large theta.
    """
    if not kappa > 0:
        raise ValidationError(f"kappa must be positive, got {kappa}")
    value, _ = integrate.quad(
        lambda s: s ** (2.0 * kappa - 1.0) * math.cos(2.0 * theta * s),
        0.0, 1.0, limit=400, epsabs=1e-15, epsrel=1e-13)
    return 2.0 * kappa * value


def _kappa(cfg: BeamThermalConfig, profile: str) -> float:
    if profile not in PROFILES:
        raise ValidationError(f"unknown beam profile {profile!r}; use one of {sorted(PROFILES)}")
    return cfg.g / PROFILES[profile]


def thermal_average_cos(theta: float, kappa: float) -> float:
    """<cos(2 theta u)> for u with density 2 kappa u^(2 kappa - 1) on [0, 1]"""
    if math.isinf(kappa):
        return math.cos(2.0 * theta)
    if theta * theta <= SERIES_THETA2_SWITCH:
        return hyp1f2(kappa, 0.5, 1.0 + kappa, -theta * theta)
    return hyp1f2_integral(kappa, theta)


def thermal_rabi_pdown(theta: float, cfg: BeamThermalConfig, profile: str = "waist",
                       kappa: Optional[float] = None) -> float:
    """
    Thermally averaged transfer probability for half-area theta

    Args:
        theta: Half of the beam-center pulse area (rad)
        cfg: Beam and thermal configuration
        profile: "waist" for exp(-r^2/w0^2) area falloff, "intensity" for
            exp(-2 r^2/w0^2)
        kappa: Override the first series parameter directly

    Returns:
        P_down in [0, 1]
    """
    if theta < 0:
        raise ValidationError(f"theta must be non-negative, got {theta}")
    if theta == 0:
        return 0.0
    k = _kappa(cfg, profile) if kappa is None else kappa
    p = 0.5 * (1.0 - thermal_average_cos(theta, k))
    return min(max(p, 0.0), 1.0)


def _local_area_factor(rng: np.random.Generator, n: int, cfg: BeamThermalConfig,
                       profile: str) -> np.ndarray:
    x = rng.normal(0.0, cfg.sigma_ion, n)
    y = rng.normal(0.0, cfg.sigma_secondary, n)
    falloff = PROFILES[profile] / 2.0
    return np.exp(-falloff * (x * x + y * y) / cfg.waist ** 2)


def mc_thermal_rabi(area: float, cfg: BeamThermalConfig, samples: int, seed: int,
                    profile: str = "waist") -> McEstimate:
    """
    Monte-Carlo transfer probability from sampled ion positions

    Positions are drawn per fixed-size chunk from SeedSequence(seed)
    children, so the result depends only on (seed, samples).

    Args:
        area: Beam-center pulse area (rad)
        cfg: Beam and thermal configuration
        samples: Number of position samples
        seed: Integer seed
        profile: Area falloff profile, see thermal_rabi_pdown

    Returns:
        McEstimate(mean, standard error)
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    if area < 0:
        raise ValidationError(f"area must be non-negative, got {area}")
    _kappa(cfg, profile)
    if area == 0:
        return McEstimate(0.0, 0.0)

    n_chunks = -(-samples // MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sums, squares = [], []
    for i, child in enumerate(children):
        n = min(MC_CHUNK, samples - i * MC_CHUNK)
        rng = np.random.default_rng(child)
        p = np.sin(0.5 * area * _local_area_factor(rng, n, cfg, profile)) ** 2
        sums.append(math.fsum(p))
        squares.append(math.fsum(p * p))

    mean = math.fsum(sums) / samples
    if samples == 1:
        return McEstimate(mean, 0.0)
    var = max(math.fsum(squares) / samples - mean * mean, 0.0) * samples / (samples - 1)
    return McEstimate(mean, math.sqrt(var / samples))


def peak_theta(cfg: BeamThermalConfig, profile: str = "waist") -> float:
    """
    Half-area theta at the first maximum of the thermal Rabi curve

    Equals pi/2 for a cold ion and moves outward as g decreases.
    """
    if math.isinf(cfg.g):
        return math.pi / 2.0
    kappa = _kappa(cfg, profile)

    # dP/dtheta = theta * 2 kappa / (1 + kappa) * 1F2[kappa + 1; 3/2, 2 + kappa; -theta^2]
    def slope(theta: float) -> float:
        return hyp1f2(kappa + 1.0, 1.5, 2.0 + kappa, -theta * theta)

    if slope(math.pi) < 0:
        return float(optimize.brentq(slope, 1e-3, math.pi, xtol=1e-15))
    logger.debug("no slope sign change below pi at kappa %g; searching the curve directly", kappa)
    result = optimize.minimize_scalar(
        lambda t: -thermal_rabi_pdown(t, cfg, profile),
        bounds=(1e-3, math.pi), method="bounded", options={"xatol": 1e-10})
    return float(result.x)


def thermal_pi_infidelity(cfg: BeamThermalConfig, profile: str = "waist") -> float:
    """1 minus the peak transfer of the thermal Rabi curve"""
    return 1.0 - thermal_rabi_pdown(peak_theta(cfg, profile), cfg, profile)


def pi_energy_from_area(area: float, calibration: float) -> float:
    """Pulse energy (J) for a pulse area given the energy per radian"""
    if not calibration > 0:
        raise ValidationError(f"calibration must be positive, got {calibration}")
    if area < 0:
        raise ValidationError(f"area must be non-negative, got {area}")
    return calibration * area


def energy_to_theta(energy, pi_energy: float, theta_peak: float):
    """Half-area theta for pulse energies, with the first peak at pi_energy"""
    if not pi_energy > 0:
        raise ValidationError(f"pi energy must be positive, got {pi_energy}")
    return theta_peak * np.asarray(energy, dtype=float) / pi_energy


def center_pi_energy(pi_energy: float, theta_peak: float) -> float:
    """
    Energy giving a pulse area of exactly pi at the beam center

    Differs from pi_energy, the first-maximum energy, whenever the thermal
    peak sits beyond theta = pi/2.
    """
    if not pi_energy > 0:
        raise ValidationError(f"pi energy must be positive, got {pi_energy}")
    if not theta_peak > 0:
        raise ValidationError(f"peak theta must be positive, got {theta_peak}")
    return pi_energy * (0.5 * math.pi) / theta_peak


def thermal_rabi_curve(energies: Sequence[float], pi_energy: float,
                       cfg: BeamThermalConfig, profile: str = "waist") -> np.ndarray:
    """
    Thermal Rabi flopping curve P_down versus pulse energy

    Args:
        energies: Pulse energies (J), non-negative
        pi_energy: Energy at the first transfer maximum (J)
        cfg: Beam and thermal configuration

    Returns:
        Array of P_down values
    """
    thetas = energy_to_theta(energies, pi_energy, peak_theta(cfg, profile))
    if np.any(thetas < 0):
        raise ValidationError("pulse energies must be non-negative")
    return np.array([thermal_rabi_pdown(float(t), cfg, profile) for t in np.atleast_1d(thetas)])
