#!/usr/bin/env python3
"""
Spin-Motion Dynamics - Coherent-State Branch Algebra

A spin-dependent kick flips the qubit and displaces the motional coherent
state by +/- i*eta in phase space. Coherent states stay coherent under
every operation used here (kicks and free harmonic evolution), so the
joint state is carried exactly as a short list of branches
(spin, alpha, weight) instead of a truncated Fock expansion.

Branch arrays carry optional trailing batch dimensions so that a whole
Monte-Carlo chunk of initial amplitudes evolves in one pass.
"""

import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple

import numpy as np
from scipy import special

from errors import NormalizationError, ValidationError
from thermal_beam import MC_CHUNK, McEstimate

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-8
IMAG_TOLERANCE = 1e-10
DROP_TOLERANCE = 1e-16  # kick terms with smaller coefficients are dropped


class Spin(IntEnum):
    UP = 0
    DOWN = 1


def displace(alpha, beta) -> Tuple[complex, complex]:
    """
    D(beta)|alpha> = phase * |alpha + beta>

    Args:
        alpha: Coherent amplitude (scalar or array)
        beta: Displacement (scalar or array)

    Returns:
        (alpha + beta, exp((beta alpha* - beta* alpha)/2))
    """
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    # exponent is purely imaginary: i * Im(beta alpha*)
    phase = np.exp(1j * np.imag(beta * np.conj(alpha)))
    new_alpha = alpha + beta
    if new_alpha.ndim == 0:
        return complex(new_alpha), complex(phase)
    return new_alpha, phase


def coherent_overlap(a, b):
    """<a|b> = exp(-|a|^2/2 - |b|^2/2 + a* b)"""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    value = np.exp(-0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(a) * b)
    return complex(value) if value.ndim == 0 else value


@dataclass(frozen=True, eq=False)
class SpinMotionState:
    """
    Superposition of spin-labelled coherent states

    spins has shape (n_branches,); alphas and weights have shape
    (n_branches, *batch).
    """
    spins: np.ndarray
    alphas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        spins = np.asarray(self.spins, dtype=np.int8)
        alphas = np.asarray(self.alphas, dtype=complex)
        weights = np.asarray(self.weights, dtype=complex)
        if spins.ndim != 1 or alphas.shape[:1] != spins.shape or alphas.shape != weights.shape:
            raise ValidationError("branch arrays must share the leading branch dimension")
        object.__setattr__(self, "spins", spins)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def coherent(cls, spin: Spin = Spin.UP, alpha=0j) -> "SpinMotionState":
        """Single branch |spin>|alpha>; alpha may be an array of samples"""
        alpha = np.asarray(alpha, dtype=complex)
        return cls(np.array([int(spin)]), alpha[np.newaxis], np.ones((1,) + alpha.shape, complex))

    @property
    def n_branches(self) -> int:
        return int(self.spins.size)

    @property
    def batch_shape(self) -> tuple:
        return self.alphas.shape[1:]

    def _projection(self, spin: Spin):
        idx = np.nonzero(self.spins == int(spin))[0]
        total = np.zeros(self.batch_shape, dtype=complex)
        for i in idx:
            for j in idx:
                total = total + (np.conj(self.weights[i]) * self.weights[j]
                                 * coherent_overlap(self.alphas[i], self.alphas[j]))
        return total

    def norm(self):
        """Norm functional; 1 for a normalized state"""
        return np.real(self._projection(Spin.UP) + self._projection(Spin.DOWN))


def apply_sdk(state: SpinMotionState, theta: float, eta: float) -> SpinMotionState:
    """
    Spin-dependent kick U(theta) = cos(theta/2) + i sin(theta/2)[D(i eta) s- + D(-i eta) s+]

    Every branch keeps a cos(theta/2) copy and gains a spin-flipped copy
    displaced by +i eta (up -> down) or -i eta (down -> up).

    Args:
        state: Input state
        theta: Kick rotation angle (rad)
        eta: Lamb-Dicke parameter

    Returns:
        New state with up to twice as many branches
    """
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    spins, alphas, weights = [], [], []

    if abs(c) > DROP_TOLERANCE:
        spins.append(state.spins)
        alphas.append(state.alphas)
        weights.append(state.weights * c)

    if abs(s) > DROP_TOLERANCE:
        kick = np.where(state.spins == Spin.UP, 1j * eta, -1j * eta)
        kick = kick.reshape((-1,) + (1,) * len(state.batch_shape))
        new_alpha, phase = displace(state.alphas, np.broadcast_to(kick, state.alphas.shape))
        spins.append(1 - state.spins)
        alphas.append(np.asarray(new_alpha))
        weights.append(state.weights * (1j * s) * phase)

    return SpinMotionState(np.concatenate(spins), np.concatenate(alphas), np.concatenate(weights))


@dataclass(frozen=True)
class RamseyConfig:
    """Kick size, trap frequency, qubit splitting, wait time and thermal occupation"""
    eta: float
    trap_omega: float
    qubit_delta: float
    wait_time: float
    nbar: float = 0.0

    def __post_init__(self):
        if self.eta < 0:
            raise ValidationError(f"eta must be non-negative, got {self.eta}")
        if self.wait_time < 0:
            raise ValidationError(f"wait_time must be non-negative, got {self.wait_time}")
        if self.nbar < 0:
            raise ValidationError(f"nbar must be non-negative, got {self.nbar}")
        if not self.trap_omega > 0:
            raise ValidationError(f"trap_omega must be positive, got {self.trap_omega}")

    @property
    def gamma(self) -> float:
        """Fringe phase delta*tau + eta^2 sin(omega tau)"""
        return (self.qubit_delta * self.wait_time
                + self.eta ** 2 * math.sin(self.trap_omega * self.wait_time))


def free_evolve(state: SpinMotionState, cfg: RamseyConfig) -> SpinMotionState:
    """Harmonic rotation alpha -> alpha e^{-i omega tau} plus the Zeeman spin phases"""
    rotation = np.exp(-1j * cfg.trap_omega * cfg.wait_time)
    half = 0.5 * cfg.qubit_delta * cfg.wait_time
    spin_phase = np.where(state.spins == Spin.UP, np.exp(1j * half), np.exp(-1j * half))
    spin_phase = spin_phase.reshape((-1,) + (1,) * len(state.batch_shape))
    return SpinMotionState(state.spins, state.alphas * rotation, state.weights * spin_phase)


def _measure(state: SpinMotionState, spin: Spin):
    norm = state.norm()
    drift = np.max(np.abs(norm - 1.0)) if np.size(norm) else 0.0
    if drift > NORM_TOLERANCE:
        raise NormalizationError(f"state norm deviates from 1 by {drift:.3g}")
    projection = state._projection(spin)
    residue = np.max(np.abs(np.imag(projection))) if np.size(projection) else 0.0
    if residue > IMAG_TOLERANCE:
        raise NormalizationError(f"projection has imaginary residue {residue:.3g}")
    p = np.clip(np.real(projection), 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def measure_up(state: SpinMotionState):
    """P_up traced over motion"""
    return _measure(state, Spin.UP)


def measure_down(state: SpinMotionState):
    """P_down traced over motion"""
    return _measure(state, Spin.DOWN)


def ramsey_sequence(state: SpinMotionState, cfg: RamseyConfig,
                    theta: float = math.pi / 2) -> SpinMotionState:
    """Kick, wait, kick"""
    state = apply_sdk(state, theta, cfg.eta)
    state = free_evolve(state, cfg)
    return apply_sdk(state, theta, cfg.eta)


def visibility_analytic(cfg: RamseyConfig) -> float:
    """Fringe visibility exp[-eta^2 (1 - cos omega tau)(2 nbar + 1)]"""
    exponent = cfg.eta ** 2 * (1.0 - math.cos(cfg.trap_omega * cfg.wait_time)) * (2.0 * cfg.nbar + 1.0)
    return math.exp(-exponent)


def ramsey_pup_analytic(cfg: RamseyConfig) -> float:
    """Thermal Ramsey P_up = 1/2 - 1/2 cos(gamma) V"""
    return 0.5 - 0.5 * math.cos(cfg.gamma) * visibility_analytic(cfg)


def _glauber_samples(rng: np.random.Generator, n: int, nbar: float) -> np.ndarray:
    scale = math.sqrt(nbar / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def ramsey_pup_mc(cfg: RamseyConfig, samples: int, seed: int) -> McEstimate:
    """
    Glauber-Sudarshan Monte-Carlo average of the branch-algebra Ramsey P_up

    Initial amplitudes are drawn from the thermal P distribution with
    <|alpha|^2> = nbar, in fixed-size chunks seeded from SeedSequence(seed).

    Args:
        cfg: Ramsey configuration
        samples: Number of sampled initial amplitudes
        seed: Integer seed

    Returns:
        McEstimate(mean, standard error)
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")

    n_chunks = -(-samples // MC_CHUNK)
    sums, squares = [], []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(n_chunks)):
        n = min(MC_CHUNK, samples - i * MC_CHUNK)
        alphas = _glauber_samples(np.random.default_rng(child), n, cfg.nbar)
        p = np.atleast_1d(measure_up(ramsey_sequence(SpinMotionState.coherent(Spin.UP, alphas), cfg)))
        sums.append(math.fsum(p))
        squares.append(math.fsum(p * p))

    mean = math.fsum(sums) / samples
    if samples == 1:
        return McEstimate(mean, 0.0)
    var = max(math.fsum(squares) / samples - mean * mean, 0.0) * samples / (samples - 1)
    return McEstimate(mean, math.sqrt(var / samples))


def ramsey_pup_quadrature(cfg: RamseyConfig, radial_nodes: int = 80,
                          phase_nodes: int = 64) -> float:
    """
    Deterministic thermal average: Gauss-Laguerre in |alpha|^2/nbar, uniform in phase

    Args:
        cfg: Ramsey configuration
        radial_nodes: Gauss-Laguerre order
        phase_nodes: Equally spaced phase samples

    Returns:
        Thermally averaged P_up
    """
    if cfg.nbar == 0:
        return float(measure_up(ramsey_sequence(SpinMotionState.coherent(Spin.UP, 0j), cfg)))
    x, w = special.roots_laguerre(radial_nodes)
    phases = 2.0 * math.pi * np.arange(phase_nodes) / phase_nodes
    alphas = np.sqrt(cfg.nbar * x)[:, np.newaxis] * np.exp(1j * phases)[np.newaxis, :]
    p = measure_up(ramsey_sequence(SpinMotionState.coherent(Spin.UP, alphas), cfg))
    return math.fsum((w[:, np.newaxis] * p / phase_nodes).ravel())


def visibility_model(cfg: RamseyConfig, A: float, B: float) -> float:
    """Observed revival envelope A + B exp[-eta^2 (1 - cos omega tau)(2 nbar + 1)]"""
    if A < 0 or B < 0:
        raise ValidationError(f"A and B must be non-negative, got A={A}, B={B}")
    return A + B * visibility_analytic(cfg)


def visibility_budget(v_spam: float, f_thermal: float, f_lightshift: float,
                      tau: float, t2: float) -> float:
    """
    Expected revival contrast V_SPAM * F_thermal * F_lightshift * exp(-tau/T2)

    Args:
        v_spam: SPAM visibility
        f_thermal: Thermal-beam kick fidelity
        f_lightshift: Light-shift limited kick fidelity
        tau: Wait time (s)
        t2: Coherence time (s); math.inf disables dephasing

    Returns:
        Total visibility
    """
    for name, value in (("v_spam", v_spam), ("f_thermal", f_thermal), ("f_lightshift", f_lightshift)):
        if not 0 < value <= 1:
            raise ValidationError(f"{name} must lie in (0, 1], got {value}")
    if not t2 > 0:
        raise ValidationError(f"t2 must be positive, got {t2}")
    if tau < 0:
        raise ValidationError(f"tau must be non-negative, got {tau}")
    return v_spam * f_thermal * f_lightshift * math.exp(-tau / t2)


def revival_time(omega: float, order: int = 1) -> float:
    """Wait time of the order-th motional revival, order * 2 pi / omega"""
    if not omega > 0:
        raise ValidationError(f"omega must be positive, got {omega}")
    if order < 0:
        raise ValidationError(f"revival order must be non-negative, got {order}")
    return 2.0 * math.pi * order / omega


def revival_half_width(cfg: RamseyConfig) -> float:
    """
    Half width at half maximum of a visibility revival

    Solves eta^2 (1 - cos omega dt)(2 nbar + 1) = ln 2. Returns math.inf if
    the visibility never falls to one half.
    """
    strength = cfg.eta ** 2 * (2.0 * cfg.nbar + 1.0)
    if strength == 0:
        return math.inf
    c = 1.0 - math.log(2.0) / strength
    if c <= -1.0:
        logger.warning("visibility never drops to one half (eta^2 (2 nbar + 1) = %.3g)", strength)
        return math.inf
    return math.acos(c) / cfg.trap_omega
