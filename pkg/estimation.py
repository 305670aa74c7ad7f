#!/usr/bin/env python3
"""
Parameter Estimation - Fringe, Rabi-Curve and Revival Fits

Weighted least-squares recovery of physical parameters from measured (or
synthetic) transition probabilities:

- fit_fringe: offset + amplitude/2 cos(delta tau + phase) per wait time
- fit_rabi_curve: pi-pulse energy and ion temperature from a thermal Rabi curve
- fit_revival: trap frequency and mean phonon number from the revival envelope
- feldman_cousins_interval: confidence interval for a parameter bounded above
- spam_correct: divide out the SPAM visibility

Nonlinear fits use scipy's Levenberg-Marquardt with central-difference
Jacobians in a smoothly reparameterized space; uncertainties come from the
Jacobian in physical parameters at the optimum.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from errors import DegenerateDesignError, SpamInconsistencyError, ValidationError
from spin_motion import RamseyConfig, revival_time, visibility_model
from thermal_beam import (
    BeamThermalConfig, center_pi_energy, peak_theta, thermal_rabi_curve, thermal_rabi_pdown,
)

logger = logging.getLogger(__name__)

NANOJOULE = 1e-9
MILLIKELVIN = 1e-3

MIN_FRINGE_POINTS = 4
MIN_RABI_POINTS = 6
MIN_REVIVAL_POINTS = 8
REVIVAL_STARTS = 8

# one-sided 90% normal quantile for temperature upper bounds
UPPER_BOUND_Z = float(special.ndtri(0.90))

FC_GRID_POINTS = 2001
FC_GRID_SIGMAS = 8.0

# singular values below this fraction of the largest count as rank loss
RANK_RTOL = 1e-8


@dataclass(frozen=True)
class FringeDataset:
    """Ramsey scan records (wait time, detuning, P_up, repetitions)"""
    wait_time: np.ndarray
    detuning: np.ndarray
    p_up: np.ndarray
    repetitions: np.ndarray

    def __post_init__(self):
        arrays = {name: np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
                  for name in ("wait_time", "detuning", "p_up", "repetitions")}
        sizes = {a.size for a in arrays.values()}
        if len(sizes) != 1:
            raise ValidationError("fringe dataset columns must have equal length")
        if arrays["p_up"].size == 0:
            raise ValidationError("fringe dataset is empty")
        if np.any((arrays["p_up"] < 0) | (arrays["p_up"] > 1)):
            raise ValidationError("p_up values must lie in [0, 1]")
        if np.any(arrays["repetitions"] < 1):
            raise ValidationError("repetitions must be >= 1")
        for name, value in arrays.items():
            object.__setattr__(self, name, value)

    def __len__(self) -> int:
        return int(self.p_up.size)

    def wait_times(self) -> np.ndarray:
        return np.unique(self.wait_time)

    def groups(self) -> Dict[float, "FringeDataset"]:
        """Split into one dataset per wait time"""
        return {float(t): self.select(self.wait_time == t) for t in self.wait_times()}

    def select(self, mask: np.ndarray) -> "FringeDataset":
        return FringeDataset(self.wait_time[mask], self.detuning[mask],
                             self.p_up[mask], self.repetitions[mask])


@dataclass(frozen=True)
class RabiDataset:
    """Rabi flopping records (pulse energy, P_down, repetitions)"""
    energy: np.ndarray
    p_down: np.ndarray
    repetitions: np.ndarray

    def __post_init__(self):
        arrays = {name: np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
                  for name in ("energy", "p_down", "repetitions")}
        if len({a.size for a in arrays.values()}) != 1:
            raise ValidationError("Rabi dataset columns must have equal length")
        if arrays["p_down"].size == 0:
            raise ValidationError("Rabi dataset is empty")
        if np.any((arrays["p_down"] < 0) | (arrays["p_down"] > 1)):
            raise ValidationError("p_down values must lie in [0, 1]")
        if np.any(arrays["energy"] < 0):
            raise ValidationError("pulse energies must be non-negative")
        if np.any(arrays["repetitions"] < 1):
            raise ValidationError("repetitions must be >= 1")
        for name, value in arrays.items():
            object.__setattr__(self, name, value)

    def __len__(self) -> int:
        return int(self.p_down.size)


@dataclass
class FitResult:
    """Point estimates, 1-sigma uncertainties and covariance of one fit"""
    names: List[str]
    values: np.ndarray
    stderr: np.ndarray
    covariance: np.ndarray
    residual: float
    converged: bool
    extras: Dict[str, float] = field(default_factory=dict)
    gradient: Optional[np.ndarray] = None

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def error(self, name: str) -> float:
        return float(self.stderr[self.names.index(name)])

    def to_dict(self) -> dict:
        return {
            "parameters": {name: {"value": float(v), "stderr": _finite_or_none(e)}
                           for name, v, e in zip(self.names, self.values, self.stderr)},
            "covariance": [[_finite_or_none(c) for c in row] for row in self.covariance],
            "residual": float(self.residual),
            "converged": bool(self.converged),
            **{key: _finite_or_none(value) for key, value in self.extras.items()},
        }


def _finite_or_none(value):
    value = float(value)
    return value if math.isfinite(value) else None


def binomial_sigma(p, repetitions):
    """Projection-noise standard deviation with a 1/(4N) variance floor"""
    p = np.asarray(p, dtype=float)
    n = np.asarray(repetitions, dtype=float)
    return np.sqrt(np.maximum(p * (1.0 - p), 0.25 / n) / n)


def central_jacobian(fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                     rel_step: float = 1e-6,
                     lower: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Central-difference Jacobian of a vector function

    Falls back to a forward difference for any coordinate within one step
    of its lower bound.
    """
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x), dtype=float)
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        step = np.zeros_like(x)
        step[i] = h
        if lower is not None and x[i] - h < lower[i]:
            jac[:, i] = (np.asarray(fun(x + step)) - f0) / h
        else:
            jac[:, i] = (np.asarray(fun(x + step)) - np.asarray(fun(x - step))) / (2.0 * h)
    return jac


def _covariance(jac: np.ndarray) -> Tuple[np.ndarray, bool]:
    """(J^T J)^-1 and whether the design was of full rank"""
    jtj = jac.T @ jac
    rank = np.linalg.matrix_rank(jac, tol=RANK_RTOL * np.linalg.norm(jac, 2))
    if rank < jac.shape[1]:
        cov = np.linalg.pinv(jtj)
        null = np.abs(np.diag(cov)) == 0
        cov[null, :] = np.inf
        cov[:, null] = np.inf
        return cov, False
    cov = np.linalg.inv(jtj)
    return 0.5 * (cov + cov.T), True


def _stderr(cov: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(np.diag(cov), 0.0, None))


def _lm(residuals: Callable[[np.ndarray], np.ndarray], x0: np.ndarray,
        tol: float = 1e-14, max_nfev: int = 2000):
    return optimize.least_squares(
        residuals, x0, jac=lambda x: central_jacobian(residuals, x), method="lm",
        xtol=tol, ftol=tol, gtol=tol, max_nfev=max_nfev)


def _sorted(*columns: np.ndarray) -> List[np.ndarray]:
    """Columns reordered by a lexicographic sort over all of them"""
    order = np.lexsort(tuple(reversed(columns)))
    return [np.asarray(c)[order] for c in columns]


# ---------------------------------------------------------------------------
# Fringe fit
# ---------------------------------------------------------------------------

def fit_fringe(detunings: Sequence[float], p_up: Sequence[float], repetitions: Sequence[float],
               wait_time: float) -> FitResult:
    """
    Weighted fit of p(delta) = offset + amplitude/2 cos(delta tau + phase)

    The model is linear in (offset, a, b) with a cos(delta tau) + b sin(delta tau),
    so the fit is a single weighted linear least-squares solve.

    Args:
        detunings: Qubit detunings (rad/s)
        p_up: Measured probabilities
        repetitions: Repetitions per point
        wait_time: Ramsey wait time tau (s), sets the fringe period

    Returns:
        FitResult with amplitude (peak-to-trough visibility, >= 0), phase, offset
    """
    delta, p, n = _sorted(np.asarray(detunings, float), np.asarray(p_up, float),
                          np.asarray(repetitions, float))
    if delta.size < MIN_FRINGE_POINTS:
        raise DegenerateDesignError(f"fringe fit needs >= {MIN_FRINGE_POINTS} points, got {delta.size}")
    if np.ptp(delta) == 0:
        raise DegenerateDesignError("fringe detunings are all equal")
    if not wait_time > 0:
        raise DegenerateDesignError("fringe fit needs a positive wait time")

    phase_arg = delta * wait_time
    design = np.column_stack([np.ones_like(phase_arg), np.cos(phase_arg), np.sin(phase_arg)])
    sigma = binomial_sigma(p, n)
    weighted = design / sigma[:, np.newaxis]
    if np.linalg.matrix_rank(design, tol=RANK_RTOL * np.linalg.norm(design, 2)) < 3:
        raise DegenerateDesignError("fringe detunings do not sample the fringe phase")

    coef, *_ = np.linalg.lstsq(weighted, p / sigma, rcond=None)
    cov_lin = np.linalg.inv(weighted.T @ weighted)
    offset, a, b = coef
    r = math.hypot(a, b)
    amplitude = 2.0 * r
    phase = math.atan2(-b, a) if r > 0 else 0.0

    # propagate (offset, a, b) -> (amplitude, phase, offset)
    if r > 0:
        g = np.array([[0.0, 2.0 * a / r, 2.0 * b / r],
                      [0.0, b / r ** 2, -a / r ** 2],
                      [1.0, 0.0, 0.0]])
        cov = g @ cov_lin @ g.T
    else:
        amp_var = 2.0 * (cov_lin[1, 1] + cov_lin[2, 2])
        cov = np.diag([amp_var, np.inf, cov_lin[0, 0]])

    resid = (design @ coef - p) / sigma
    jac = np.column_stack([0.5 * np.cos(phase_arg + phase), -0.5 * amplitude * np.sin(phase_arg + phase),
                           np.ones_like(phase_arg)]) / sigma[:, np.newaxis]
    return FitResult(names=["amplitude", "phase", "offset"],
                     values=np.array([amplitude, phase, offset]),
                     stderr=_stderr(cov), covariance=cov, residual=float(np.sum(resid ** 2)),
                     converged=True, extras={"wait_time": wait_time}, gradient=jac.T @ resid)


def fit_fringes(dataset: FringeDataset) -> Dict[float, FitResult]:
    """Fit every wait time of a Ramsey scan"""
    results = {}
    for tau, group in dataset.groups().items():
        results[tau] = fit_fringe(group.detuning, group.p_up, group.repetitions, tau)
    return results


def revival_points(fits: Dict[float, FitResult]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(wait_time, visibility, sigma) arrays from per-fringe fits"""
    taus = np.array(sorted(fits))
    vis = np.array([fits[t]["amplitude"] for t in taus])
    sig = np.array([fits[t].error("amplitude") for t in taus])
    return taus, vis, sig


# ---------------------------------------------------------------------------
# Rabi curve fit
# ---------------------------------------------------------------------------

def rabi_model(energies: np.ndarray, pi_energy: float, temperature: float, scale: float,
               cfg: BeamThermalConfig) -> np.ndarray:
    """SPAM-compressed thermal Rabi curve (1 - scale)/2 + scale * P_down"""
    curve = thermal_rabi_curve(energies, pi_energy, cfg.with_temperature(max(temperature, 0.0)))
    return 0.5 * (1.0 - scale) + scale * curve


def _rabi_guess(energy: np.ndarray, p: np.ndarray, cfg: BeamThermalConfig) -> np.ndarray:
    # first local maximum of a 3-point smoothed curve
    kernel = np.ones(3) / 3.0
    smooth = np.convolve(p, kernel, mode="same") if p.size >= 3 else p
    peak = int(np.argmax(smooth[: max(p.size // 2, 1) + 1])) if p.size > 2 else int(np.argmax(p))
    pi_energy = energy[peak] if energy[peak] > 0 else np.max(energy) / 2.0
    scale = float(np.clip(np.max(smooth) - np.min(smooth), 0.05, 1.0))
    temperature = cfg.temperature if cfg.temperature > 0 else 0.5 * MILLIKELVIN
    return np.array([pi_energy / NANOJOULE, math.sqrt(temperature / MILLIKELVIN), scale])


def fit_rabi_curve(energies: Sequence[float], p_down: Sequence[float],
                   repetitions: Sequence[float], cfg: BeamThermalConfig,
                   guess: Optional[Dict[str, float]] = None,
                   spam_visibility: Optional[float] = None) -> FitResult:
    """
    Fit a thermal Rabi flopping curve for pi energy, temperature and SPAM scale

    Internally T = q^2 * 1 mK keeps the temperature non-negative while
    letting the fit reach T = 0 smoothly.

    Args:
        energies: Pulse energies (J)
        p_down: Measured transfer probabilities
        repetitions: Repetitions per point
        cfg: Beam geometry and trap (its temperature is only the start value)
        guess: Optional start {"pi_energy", "temperature", "scale"}
        spam_visibility: If given, also report the SPAM-corrected fidelity

    Returns:
        FitResult{pi_energy, temperature, scale} with extras temperature_upper,
        curve_visibility, thermal_fidelity, g, center_pi_energy (and
        spam_corrected_fidelity)
    """
    energy, p, n = _sorted(np.asarray(energies, float), np.asarray(p_down, float),
                           np.asarray(repetitions, float))
    if energy.size < MIN_RABI_POINTS:
        raise DegenerateDesignError(f"Rabi fit needs >= {MIN_RABI_POINTS} points, got {energy.size}")
    if np.any(energy < 0):
        raise ValidationError("pulse energies must be non-negative")
    if np.ptp(energy) == 0:
        raise DegenerateDesignError("Rabi fit energies are all equal")
    sigma = binomial_sigma(p, n)

    def internal_residuals(x):
        pi_energy = x[0] * NANOJOULE
        if pi_energy <= 0 or x[2] <= 0:
            return np.full(energy.size, 1e6)
        model = rabi_model(energy, pi_energy, x[1] ** 2 * MILLIKELVIN, x[2], cfg)
        return (model - p) / sigma

    if guess:
        x0 = np.array([guess["pi_energy"] / NANOJOULE,
                       math.sqrt(max(guess["temperature"], 0.0) / MILLIKELVIN),
                       guess["scale"]])
    else:
        x0 = _rabi_guess(energy, p, cfg)

    sol = _lm(internal_residuals, x0)
    pi_energy, temperature, scale = sol.x[0] * NANOJOULE, sol.x[1] ** 2 * MILLIKELVIN, sol.x[2]
    logger.debug("Rabi fit: %s after %d evaluations", sol.message, sol.nfev)

    def physical_residuals(y):
        model = rabi_model(energy, y[0] * NANOJOULE, y[1] * MILLIKELVIN, y[2], cfg)
        return (model - p) / sigma

    y_opt = np.array([pi_energy / NANOJOULE, temperature / MILLIKELVIN, scale])
    jac = central_jacobian(physical_residuals, y_opt, lower=np.array([0.0, 0.0, 0.0]))
    cov_scaled, full_rank = _covariance(jac)
    units = np.array([NANOJOULE, MILLIKELVIN, 1.0])
    cov = cov_scaled * np.outer(units, units)
    stderr = _stderr(cov)

    cfg_fit = cfg.with_temperature(temperature)
    theta_peak = peak_theta(cfg_fit)
    p_peak = thermal_rabi_pdown(theta_peak, cfg_fit)
    extras = {
        "temperature_upper": temperature + UPPER_BOUND_Z * stderr[1],
        "curve_visibility": scale * p_peak,
        "thermal_fidelity": p_peak,
        "g": cfg_fit.g,
        "center_pi_energy": center_pi_energy(pi_energy, theta_peak),
    }
    if spam_visibility is not None:
        extras["spam_corrected_fidelity"] = spam_correct(scale * p_peak, spam_visibility)

    converged = bool(sol.success) and full_rank
    if not converged:
        logger.warning("Rabi curve fit did not converge cleanly: %s", sol.message)
    return FitResult(names=["pi_energy", "temperature", "scale"],
                     values=np.array([pi_energy, temperature, scale]),
                     stderr=stderr, covariance=cov, residual=float(np.sum(sol.fun ** 2)),
                     converged=converged, extras=extras,
                     gradient=jac.T @ physical_residuals(y_opt))


# ---------------------------------------------------------------------------
# Revival fit
# ---------------------------------------------------------------------------

REVIVAL_NAMES = ["omega", "nbar", "A", "B"]


def revival_model(wait_times: np.ndarray, omega: float, nbar: float, A: float, B: float,
                  eta: float) -> np.ndarray:
    """Revival envelope evaluated over an array of wait times"""
    return np.array([visibility_model(RamseyConfig(eta=eta, trap_omega=omega, qubit_delta=0.0,
                                                   wait_time=float(t), nbar=nbar), A, B)
                     for t in wait_times])


def _revival_starts(tau: np.ndarray, vis: np.ndarray, eta: float, order: int) -> List[np.ndarray]:
    A0 = max(float(np.min(vis)), 1e-4)
    B0 = max(float(np.max(vis)) - A0, 1e-3)
    t_peak = float(tau[int(np.argmax(vis))])
    omega0 = 2.0 * math.pi * order / t_peak

    spacing = float(np.min(np.diff(tau))) if tau.size > 1 else 1e-9
    above = tau[vis >= A0 + 0.5 * B0]
    # flat data has no point above half maximum
    width = 0.5 * float(np.ptp(above)) if above.size else 0.25 * float(np.ptp(tau))
    half_width = max(width, spacing)
    c = 1.0 - math.cos(min(omega0 * half_width, math.pi))
    nbar0 = max((math.log(2.0) / (eta ** 2 * c) - 1.0) / 2.0, 1.0) if eta > 0 and c > 0 else 100.0

    step = float(np.median(np.diff(tau))) if tau.size > 1 else 0.0
    starts = []
    for offset in (0.0, 0.5 * step):
        omega_k = 2.0 * math.pi * order / (t_peak + offset)
        for factor in (1.0, 0.5, 2.0, 4.0):
            starts.append(np.array([math.log(omega_k), math.log(nbar0 * factor), A0, B0]))
    return starts[:REVIVAL_STARTS]


def fit_revival(wait_times: Sequence[float], visibilities: Sequence[float],
                sigmas: Sequence[float], eta: float, order: int = 1,
                fixed: Optional[Dict[str, float]] = None,
                guess: Optional[Dict[str, float]] = None) -> FitResult:
    """
    Fit the visibility revival A + B exp[-eta^2 (1 - cos omega tau)(2 nbar + 1)]

    omega and nbar are fitted in log space; A and B directly. Eight
    deterministic starts are tried and the lowest residual wins (ties broken
    by the lexicographically smallest parameter vector).

    Args:
        wait_times: Wait times (s)
        visibilities: Measured fringe visibilities
        sigmas: Per-point 1-sigma uncertainties
        eta: Lamb-Dicke parameter (held fixed)
        order: Which revival the data brackets
        fixed: Parameters held at given values, e.g. {"B": 0.0}
        guess: Optional single start {"omega", "nbar", "A", "B"}

    Returns:
        FitResult{omega, nbar, A, B} with extras tau_rev and tau_rev_stderr
    """
    tau, vis, sig = _sorted(np.asarray(wait_times, float), np.asarray(visibilities, float),
                            np.asarray(sigmas, float))
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(REVIVAL_NAMES)
    if unknown:
        raise ValidationError(f"unknown revival parameters {sorted(unknown)}")
    if tau.size < MIN_REVIVAL_POINTS:
        raise DegenerateDesignError(f"revival fit needs >= {MIN_REVIVAL_POINTS} points, got {tau.size}")
    if np.any(sig <= 0):
        raise ValidationError("revival sigmas must be positive")
    if eta <= 0:
        raise ValidationError("eta must be positive for a revival fit")

    peak = int(np.argmax(vis))
    if peak == 0 or peak == tau.size - 1:
        logger.warning("visibility maximum lies at the edge of the scan; revival may be unbracketed")

    free = [name for name in REVIVAL_NAMES if name not in fixed]

    def unpack(x: np.ndarray, log_space: bool) -> Dict[str, float]:
        params = dict(fixed)
        for name, value in zip(free, x):
            if log_space and name in ("omega", "nbar"):
                value = math.exp(value)
            params[name] = value
        return params

    def residuals_for(log_space: bool):
        def residuals(x):
            params = unpack(x, log_space)
            if params["omega"] <= 0 or params["nbar"] < 0 or params["A"] < 0 or params["B"] < 0:
                return np.full(tau.size, 1e6)
            model = revival_model(tau, params["omega"], params["nbar"], params["A"], params["B"], eta)
            return (model - vis) / sig
        return residuals

    if guess:
        starts = [np.array([math.log(guess["omega"]), math.log(guess["nbar"]), guess["A"], guess["B"]])]
    else:
        starts = _revival_starts(tau, vis, eta, order)
    internal = residuals_for(True)
    index = [REVIVAL_NAMES.index(name) for name in free]

    best = None
    for k, start in enumerate(starts):
        sol = _lm(internal, start[index])
        cost = float(np.sum(sol.fun ** 2))
        logger.debug("revival start %d: residual %.6g (%s)", k, cost, sol.message)
        key = (cost, tuple(sol.x))
        if best is None or key < best[0]:
            best = (key, sol)
    sol = best[1]

    params = unpack(sol.x, True)
    physical = residuals_for(False)
    y_opt = np.array([params[name] for name in free])
    jac = central_jacobian(physical, y_opt, rel_step=1e-7)
    cov_free, full_rank = _covariance(jac)

    n_all = len(REVIVAL_NAMES)
    cov = np.zeros((n_all, n_all))
    for i, a in enumerate(index):
        for j, b in enumerate(index):
            cov[a, b] = cov_free[i, j]
    values = np.array([params[name] for name in REVIVAL_NAMES])
    stderr = _stderr(cov)

    degenerate = params["B"] == 0.0
    if degenerate:
        logger.warning("revival amplitude B is zero; omega and nbar are not identifiable")
        for name in ("omega", "nbar"):
            i = REVIVAL_NAMES.index(name)
            stderr[i] = math.inf
            cov[i, :] = cov[:, i] = math.inf

    omega = params["omega"]
    tau_rev = revival_time(omega, order)
    extras = {
        "tau_rev": tau_rev,
        "tau_rev_stderr": tau_rev * stderr[0] / omega,
        "degenerate": float(degenerate),
    }
    converged = bool(sol.success) and full_rank and not degenerate
    return FitResult(names=list(REVIVAL_NAMES), values=values, stderr=stderr, covariance=cov,
                     residual=float(np.sum(sol.fun ** 2)), converged=converged, extras=extras,
                     gradient=jac.T @ physical(y_opt))


# ---------------------------------------------------------------------------
# Feldman-Cousins
# ---------------------------------------------------------------------------

class FCInterval(NamedTuple):
    lower: float
    upper: float


def acceptance_interval(nu: float, cl: float) -> Tuple[float, float]:
    """
    Likelihood-ratio ordered acceptance region for y ~ N(nu, 1), nu >= 0

    Returns (y1, y2); y1 is -inf at nu = 0.
    """
    if nu < 0:
        raise ValidationError(f"nu must be non-negative, got {nu}")
    if nu == 0:
        return -math.inf, float(special.ndtri(cl))

    def edges(log_k: float) -> Tuple[float, float]:
        s = math.sqrt(-2.0 * log_k)
        lower = nu - s if nu - s >= 0 else (log_k + 0.5 * nu * nu) / nu
        return lower, nu + s

    def coverage_gap(log_k: float) -> float:
        lo, hi = edges(log_k)
        return float(special.ndtr(hi - nu) - special.ndtr(lo - nu)) - cl

    log_k = optimize.brentq(coverage_gap, -60.0, -1e-300, xtol=1e-14, rtol=1e-14)
    return edges(log_k)


@dataclass(frozen=True)
class ConfidenceBelt:
    """Acceptance edges y1(nu), y2(nu) tabulated on a grid in standardized units"""
    nu: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    cl: float

    @classmethod
    def build(cls, nu_max: float, cl: float, points: int = FC_GRID_POINTS) -> "ConfidenceBelt":
        nu = np.linspace(0.0, nu_max, points)
        edges = np.array([acceptance_interval(float(v), cl) for v in nu])
        return cls(nu=nu, y1=edges[:, 0], y2=edges[:, 1], cl=cl)

    def invert(self, y_obs):
        """(nu_low, nu_high) of the confidence set at observed y; arrays invert elementwise"""
        y = np.asarray(y_obs, dtype=float)
        nu_low = np.where(y <= self.y2[0], 0.0, np.interp(y, self.y2, self.nu))
        finite = np.isfinite(self.y1)
        nu_high = np.interp(y, self.y1[finite], self.nu[finite])
        if y.ndim == 0:
            return float(nu_low), float(nu_high)
        return nu_low, nu_high


def feldman_cousins_interval(measured: float, sigma: float, bound_upper: float = 1.0,
                             cl: float = 0.90, points: int = FC_GRID_POINTS) -> FCInterval:
    """
    Unified (likelihood-ratio ordered) confidence interval for a Gaussian
    measurement of a parameter that cannot exceed bound_upper

    Args:
        measured: Measured value
        sigma: Measurement standard deviation
        bound_upper: Physical upper bound of the parameter
        cl: Confidence level in (0.5, 1)
        points: Belt grid size

    Returns:
        FCInterval(lower, upper), upper <= bound_upper
    """
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if not 0.5 < cl < 1.0:
        raise ValidationError(f"cl must lie in (0.5, 1), got {cl}")

    y_obs = (bound_upper - measured) / sigma
    nu_max = max(FC_GRID_SIGMAS, y_obs + FC_GRID_SIGMAS)
    belt = ConfidenceBelt.build(nu_max, cl, points)
    nu_low, nu_high = belt.invert(y_obs)
    return FCInterval(lower=bound_upper - sigma * nu_high,
                      upper=min(bound_upper - sigma * nu_low, bound_upper))


def fc_coverage(true_value: float, sigma: float, bound_upper: float = 1.0, cl: float = 0.90,
                trials: int = 100_000, seed: int = 0, points: int = FC_GRID_POINTS) -> float:
    """Fraction of simulated Gaussian measurements whose reported interval covers true_value"""
    if true_value > bound_upper:
        raise ValidationError("true value exceeds the physical bound")
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    nu = (bound_upper - true_value) / sigma
    rng = np.random.default_rng(seed)
    y_obs = nu + rng.standard_normal(trials)
    # one belt serves every draw; the inversion is the one feldman_cousins_interval uses
    belt = ConfidenceBelt.build(max(FC_GRID_SIGMAS, float(y_obs.max()) + FC_GRID_SIGMAS), cl, points)
    nu_low, nu_high = belt.invert(y_obs)
    lower = bound_upper - sigma * nu_high
    upper = np.minimum(bound_upper - sigma * nu_low, bound_upper)
    covered = (lower <= true_value) & (true_value <= upper)
    logger.debug("coverage at %.4f (sigma %.4f): %.4f over %d draws",
                 true_value, sigma, covered.mean(), trials)
    return float(np.mean(covered))


def spam_correct(raw_visibility: float, spam_visibility: float, slack: float = 0.05) -> float:
    """
    Correct a measured visibility for SPAM: raw / spam

    Raises SpamInconsistencyError if the ratio exceeds 1 + slack.
    """
    if not 0 < spam_visibility <= 1:
        raise ValidationError(f"spam visibility must lie in (0, 1], got {spam_visibility}")
    if raw_visibility < 0:
        raise ValidationError(f"raw visibility must be non-negative, got {raw_visibility}")
    ratio = raw_visibility / spam_visibility
    if ratio > 1.0 + slack:
        raise SpamInconsistencyError(
            f"raw visibility {raw_visibility} exceeds SPAM visibility {spam_visibility}")
    return ratio
