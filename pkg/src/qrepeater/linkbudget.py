"""Direct single-photon transmission through fiber: rate, reach and dark-count cutoff."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import bisect

from .errors import ConfigurationError, NoSolutionError


@dataclass(frozen=True)
class DirectTransmissionParams:
    rep_rate: float = 10e9
    loss_coeff: float = 0.16
    det_efficiency: float = 1.0
    dark_prob: float = 1e-9
    rate_threshold: float = 0.01
    # two-qubit entanglement bound; the cutoff criterion is otherwise unspecified
    fidelity_floor: float = 0.75

    def __post_init__(self):
        if self.rep_rate <= 0:
            raise ConfigurationError("rep_rate must be positive")
        if self.loss_coeff < 0:
            raise ConfigurationError("loss_coeff must be non-negative")
        if not 0 < self.det_efficiency <= 1:
            raise ConfigurationError("det_efficiency must lie in (0, 1]")
        if not 0 <= self.dark_prob < 1:
            raise ConfigurationError("dark_prob must lie in [0, 1)")
        if self.rate_threshold <= 0:
            raise ConfigurationError("rate_threshold must be positive")
        if not 0 < self.fidelity_floor < 1:
            raise ConfigurationError("fidelity_floor must lie in (0, 1)")


def log10_transmittance(L: float, loss_coeff: float) -> float:
    if L < 0:
        raise ValueError("distance must be non-negative")
    return -loss_coeff * L / 10.0


def channel_transmittance(L: float, loss_coeff: float) -> float:
    return 10.0 ** log10_transmittance(L, loss_coeff)


def direct_rate(L: float, p: DirectTransmissionParams) -> float:
    log_r = math.log10(p.rep_rate * p.det_efficiency) + log10_transmittance(L, p.loss_coeff)
    return 10.0 ** log_r


def direct_max_distance(p: DirectTransmissionParams) -> float:
    top = p.rep_rate * p.det_efficiency
    if p.rate_threshold > top:
        raise NoSolutionError("rate threshold exceeds the zero-distance rate")
    if p.loss_coeff == 0:
        return math.inf
    return (10.0 / p.loss_coeff) * math.log10(top / p.rate_threshold)


def signal_fidelity(L: float, p: DirectTransmissionParams) -> float:
    """Fraction of clicks that carry the photon: s / (s + d (1 - s))."""
    s = p.det_efficiency * channel_transmittance(L, p.loss_coeff)
    d = p.dark_prob
    denom = s + d * (1 - s)
    return 1.0 if denom == 0 else s / denom


def dark_cutoff_distance(p: DirectTransmissionParams, rtol: float = 1e-12) -> float:
    """Distance at which the click fidelity falls to `fidelity_floor`; inf if no darks."""
    if p.dark_prob == 0:
        return math.inf
    if p.loss_coeff == 0:
        return math.inf
    f = lambda L: signal_fidelity(L, p) - p.fidelity_floor
    if f(0.0) <= 0:
        return 0.0
    hi = 100.0
    while f(hi) > 0:
        hi *= 2
    return bisect(f, 0.0, hi, xtol=1e-9, rtol=rtol, maxiter=500)


def direct_rate_with_cutoff(L: float, p: DirectTransmissionParams) -> float:
    """Rate curve that drops to zero beyond the dark-count cutoff."""
    return direct_rate(L, p) if L <= dark_cutoff_distance(p) else 0.0
