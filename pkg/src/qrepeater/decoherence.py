"""Memory retrieval efficiency versus storage time, and motional dephasing scales."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import bisect

from .constants import (
    BOLTZMANN,
    RB87_D1_WAVELENGTH,
    RB87_HYPERFINE,
    RB87_MASS,
    SPEED_OF_LIGHT,
)
from .errors import ConfigurationError, NoSolutionError


@dataclass(frozen=True)
class RetrievalDecayModel:
    """chi(t) = chi1 exp(-t/tau1) + chi2 exp(-t/tau2), fast component first."""

    chi1: float
    tau1: float
    chi2: float
    tau2: float

    def __post_init__(self):
        if self.chi1 < 0 or self.chi2 < 0:
            raise ConfigurationError("amplitudes must be non-negative")
        if self.chi1 + self.chi2 > 1:
            raise ConfigurationError("chi1 + chi2 must not exceed 1")
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise ConfigurationError("decay times must be positive")
        if self.tau1 > self.tau2:
            raise ConfigurationError("order components so that tau1 <= tau2")

    @property
    def chi0(self) -> float:
        return self.chi1 + self.chi2


@dataclass(frozen=True)
class SingleExpModel:
    amplitude: float
    tau: float

    def __post_init__(self):
        if not 0 < self.amplitude <= 1:
            raise ConfigurationError("amplitude must lie in (0, 1]")
        if self.tau <= 0:
            raise ConfigurationError("tau must be positive")

    def __call__(self, t: float) -> float:
        return self.amplitude * math.exp(-t / self.tau)


@dataclass(frozen=True)
class SpinwaveGeometry:
    write_wavelength: float = RB87_D1_WAVELENGTH
    angle_theta: float = 0.0
    hyperfine_splitting: float = RB87_HYPERFINE
    cavity_waist: float = 60e-6

    def __post_init__(self):
        if self.write_wavelength <= 0:
            raise ConfigurationError("write_wavelength must be positive")
        if not 0 <= self.angle_theta <= math.pi:
            raise ConfigurationError("angle_theta must lie in [0, pi]")
        if self.hyperfine_splitting < 0:
            raise ConfigurationError("hyperfine_splitting must be non-negative")
        if self.cavity_waist <= 0:
            raise ConfigurationError("cavity_waist must be positive")


@dataclass(frozen=True)
class ThermalParams:
    temperature: float
    atomic_mass: float = RB87_MASS

    def __post_init__(self):
        if self.temperature < 0:
            raise ConfigurationError("temperature must be non-negative")
        if self.atomic_mass <= 0:
            raise ConfigurationError("atomic_mass must be positive")


@dataclass(frozen=True)
class MixedPopulationModel:
    """Free atoms dephase with a Gaussian envelope; trapped atoms do not decay."""

    free_fraction: float
    dephase_time: float

    def __post_init__(self):
        if not 0 <= self.free_fraction <= 1:
            raise ConfigurationError("free_fraction must lie in [0, 1]")
        if self.dephase_time <= 0:
            raise ConfigurationError("dephase_time must be positive")


REFERENCE_DECAY = RetrievalDecayModel(chi1=0.158, tau1=0.13e-3, chi2=0.598, tau2=0.285)


def chi_of_t(model: RetrievalDecayModel, t: float) -> float:
    if t < 0:
        raise ValueError(f"storage time must be non-negative, got {t}")
    return model.chi1 * math.exp(-t / model.tau1) + model.chi2 * math.exp(-t / model.tau2)


def threshold_time(model: RetrievalDecayModel, level: float, rtol: float = 1e-9) -> float:
    """Storage time at which the efficiency has dropped to `level`.

    Bisection on [0, 100 tau2]; chi(t) is strictly decreasing so the root is unique.
    """
    if level <= 0:
        raise ValueError("threshold level must be positive")
    chi0 = chi_of_t(model, 0.0)
    if level >= chi0:
        raise NoSolutionError(f"level {level} is not below chi(0) = {chi0}")
    t_max = 100.0 * model.tau2
    f = lambda t: chi_of_t(model, t) - level
    if f(t_max) > 0:
        raise NoSolutionError("level not reached within 100 tau2")
    return bisect(f, 0.0, t_max, xtol=1e-300, rtol=rtol, maxiter=2000)


def spinwave_wavelength(geom: SpinwaveGeometry) -> float:
    """Spinwave period 2 pi / |k_write - k_write_out|; inf when the wavevectors coincide."""
    k_w = 2 * math.pi / geom.write_wavelength
    k_wo = k_w - 2 * math.pi * geom.hyperfine_splitting / SPEED_OF_LIGHT
    # law of cosines loses all precision for small angles; use the
    # equivalent form (k_w - k_wo)^2 + 4 k_w k_wo sin^2(theta/2)
    dk2 = (k_w - k_wo) ** 2 + 4 * k_w * k_wo * math.sin(geom.angle_theta / 2) ** 2
    if dk2 == 0:
        return math.inf
    return 2 * math.pi / math.sqrt(dk2)


def thermal_speed(p: ThermalParams) -> float:
    """One-dimensional rms velocity sqrt(k_B T / m)."""
    return math.sqrt(BOLTZMANN * p.temperature / p.atomic_mass)


def motional_decay_estimate(distance: float, p: ThermalParams) -> float:
    """Time for a thermal atom to move `distance`; inf at zero temperature."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    v = thermal_speed(p)
    if v == 0:
        return math.inf
    return distance / v


def mixed_population_decay(m: MixedPopulationModel, t: float) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    return m.free_fraction * math.exp(-((t / m.dephase_time) ** 2)) + (1 - m.free_fraction)
