"""
Exception hierarchy for the ultrafast ion toolkit.

Validation problems (bad inputs, unphysical parameters) derive from
ValidationError and map to CLI exit status 2; everything else derived from
UltrafastIonError is a runtime failure (exit status 1).
"""


class UltrafastIonError(Exception):
    """Base class for all toolkit errors"""


class ValidationError(UltrafastIonError, ValueError):
    """Input failed a module-level invariant"""


class DomainError(ValidationError):
    """Physical input outside its allowed domain (e.g. non-positive mass)"""


class UnknownSpeciesError(ValidationError, KeyError):
    """Requested ion species is not in the species table"""

    def __init__(self, name: str):
        super().__init__(f"unknown ion species: {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


class PoleError(ValidationError):
    """Laser detuning too close to a resonance for the adiabatic formulas"""


class SeriesConvergenceError(UltrafastIonError, ArithmeticError):
    """Hypergeometric series failed to converge within the term cap"""


class NormalizationError(UltrafastIonError, ArithmeticError):
    """Spin-motion state norm drifted away from one"""


class IntegrationError(UltrafastIonError, RuntimeError):
    """ODE integration failed (step-size underflow or norm drift)"""


class DegenerateDesignError(ValidationError):
    """Fit design cannot identify the requested parameters"""


class FitConvergenceError(UltrafastIonError, RuntimeError):
    """Least-squares fit did not converge"""


class SpamInconsistencyError(ValidationError):
    """Raw visibility exceeds the SPAM visibility beyond statistical slack"""
