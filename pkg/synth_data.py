#!/usr/bin/env python3
"""
Synthetic Data - Projection-Noise Limited Experiment Simulation

Generates Rabi flopping curves and Ramsey fringe scans as an experiment
would record them: model probability, SPAM compression, then a binomial
draw over the repetitions. Every grid point is seeded from (seed, index)
so one point's random stream never depends on another's.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np

from errors import ValidationError
from estimation import FringeDataset, RabiDataset
from spin_motion import RamseyConfig, revival_time, visibility_analytic
from thermal_beam import BeamThermalConfig, thermal_rabi_curve

logger = logging.getLogger(__name__)


class ExperimentMode(str, Enum):
    RABI_CURVE = "rabi_curve"
    RAMSEY_SCAN = "ramsey_scan"
    REVIVAL_SCAN = "revival_scan"


@dataclass(frozen=True)
class ExperimentPlan:
    """
    What to simulate and how often

    For rabi_curve, grid holds pulse energies (J) and beam/pi_energy set the
    physics. For the Ramsey modes, grid holds wait times (s), detunings the
    qubit detunings (rad/s) scanned at every wait time, and ramsey the
    trap/kick parameters (its wait_time and qubit_delta are overwritten).

    repetitions=None returns the exact model probabilities.
    spam_errors=(eps_up_to_down, eps_down_to_up) replaces the symmetric
    spam_visibility compression when given.
    """
    mode: ExperimentMode
    grid: np.ndarray
    detunings: Optional[np.ndarray] = None
    repetitions: Optional[int] = 1000
    beam: Optional[BeamThermalConfig] = None
    pi_energy: float = 38e-9
    ramsey: Optional[RamseyConfig] = None
    spam_visibility: float = 0.70
    spam_errors: Optional[Tuple[float, float]] = None
    sdk_fidelity: float = 1.0
    t2: float = math.inf
    visibility_offset: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", ExperimentMode(self.mode))
        grid = np.atleast_1d(np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "grid", grid)
        if grid.size == 0:
            raise ValidationError("experiment grid is empty")
        if self.repetitions is not None and self.repetitions < 1:
            raise ValidationError(f"repetitions must be >= 1, got {self.repetitions}")
        if not 0 < self.spam_visibility <= 1:
            raise ValidationError(f"spam_visibility must lie in (0, 1], got {self.spam_visibility}")
        if self.spam_errors is not None:
            if len(self.spam_errors) != 2 or any(not 0 <= e < 0.5 for e in self.spam_errors):
                raise ValidationError("spam_errors must be two rates in [0, 0.5)")
        if not 0 < self.sdk_fidelity <= 1:
            raise ValidationError(f"sdk_fidelity must lie in (0, 1], got {self.sdk_fidelity}")
        if not self.t2 > 0:
            raise ValidationError(f"t2 must be positive, got {self.t2}")
        if self.visibility_offset < 0:
            raise ValidationError("visibility_offset must be non-negative")

        if self.mode is ExperimentMode.RABI_CURVE:
            if self.beam is None:
                raise ValidationError("rabi_curve plans need a beam configuration")
            if np.any(grid < 0):
                raise ValidationError("pulse energies must be non-negative")
        else:
            if self.ramsey is None:
                raise ValidationError(f"{self.mode.value} plans need a Ramsey configuration")
            detunings = np.atleast_1d(np.asarray(self.detunings, dtype=float)) \
                if self.detunings is not None else np.zeros(0)
            if detunings.size == 0:
                raise ValidationError("Ramsey plans need at least one detuning")
            if np.any(grid < 0):
                raise ValidationError("wait times must be non-negative")
            object.__setattr__(self, "detunings", detunings)

    @property
    def sampled(self) -> bool:
        return self.repetitions is not None


def revival_wait_times(trap_omega: float, window: float = 1e-6, points: int = 41,
                       order: int = 1) -> np.ndarray:
    """Wait times spanning +/- window around the order-th revival"""
    center = revival_time(trap_omega, order)
    return np.linspace(center - window, center + window, points)


def revival_detunings(center: float, trap_omega: float, count: int = 8) -> np.ndarray:
    """Detunings (rad/s) stepping the fringe phase by 2 pi / count at the revival"""
    step = 2.0 * math.pi / (count * revival_time(trap_omega))
    return center + step * (np.arange(count) - (count - 1) / 2.0)


def apply_spam(p, plan: ExperimentPlan, recorded: str = "down"):
    """Observed probability of the recorded outcome ("up" or "down") given its true probability"""
    p = np.asarray(p, dtype=float)
    if plan.spam_errors is None:
        return 0.5 + plan.spam_visibility * (p - 0.5)
    up_to_down, down_to_up = plan.spam_errors
    if recorded == "down":
        false_positive, false_negative = up_to_down, down_to_up
    else:
        false_positive, false_negative = down_to_up, up_to_down
    return p * (1.0 - false_negative) + (1.0 - p) * false_positive


def _model_probabilities(plan: ExperimentPlan):
    if plan.mode is ExperimentMode.RABI_CURVE:
        return thermal_rabi_curve(plan.grid, plan.pi_energy, plan.beam)

    taus = np.repeat(plan.grid, plan.detunings.size)
    deltas = np.tile(plan.detunings, plan.grid.size)
    p = np.empty(taus.size)
    for i, (tau, delta) in enumerate(zip(taus, deltas)):
        cfg = replace(plan.ramsey, wait_time=float(tau), qubit_delta=float(delta))
        contrast = (plan.visibility_offset
                    + plan.sdk_fidelity * math.exp(-tau / plan.t2) * visibility_analytic(cfg))
        p[i] = 0.5 - 0.5 * math.cos(cfg.gamma) * min(contrast, 1.0)
    return taus, deltas, p


def _draw(p_obs: np.ndarray, plan: ExperimentPlan) -> np.ndarray:
    if not plan.sampled:
        return p_obs
    counts = np.empty(p_obs.size)
    for i, p in enumerate(p_obs):
        rng = np.random.default_rng(np.random.SeedSequence([plan.seed, i]))
        counts[i] = rng.binomial(plan.repetitions, float(np.clip(p, 0.0, 1.0)))
    return counts / plan.repetitions


def simulate_experiment(plan: ExperimentPlan) -> Union[RabiDataset, FringeDataset]:
    """
    Simulate one dataset

    Args:
        plan: Experiment plan

    Returns:
        RabiDataset for rabi_curve plans, FringeDataset otherwise
    """
    reps = plan.repetitions if plan.sampled else 1
    if plan.mode is ExperimentMode.RABI_CURVE:
        p_obs = apply_spam(_model_probabilities(plan), plan)
        logger.debug("simulating %d Rabi points at %s repetitions", p_obs.size, plan.repetitions)
        return RabiDataset(energy=plan.grid, p_down=_draw(p_obs, plan),
                           repetitions=np.full(plan.grid.size, reps))

    taus, deltas, p = _model_probabilities(plan)
    p_obs = apply_spam(p, plan, recorded="up")
    logger.debug("simulating %d Ramsey points at %s repetitions", p_obs.size, plan.repetitions)
    return FringeDataset(wait_time=taus, detuning=deltas, p_up=_draw(p_obs, plan),
                         repetitions=np.full(taus.size, reps))
