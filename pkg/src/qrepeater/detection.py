"""Photon-counting quantities: retrieval efficiency, detection chain, anticorrelation."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    ChainInconsistencyError,
    ConfigurationError,
    InsufficientStatisticsError,
)


class NegativeRetrievalWarning(RuntimeWarning):
    pass


class BackgroundExceedsSignalWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DetectionChain:
    eta_cav: float = 0.68
    eta_t: float = 0.55
    eta_spd: float = 0.63

    def __post_init__(self):
        for name in ("eta_cav", "eta_t", "eta_spd"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigurationError(f"{name} must lie in (0, 1], got {v}")

    @property
    def total(self) -> float:
        return self.eta_cav * self.eta_t * self.eta_spd


@dataclass(frozen=True)
class MeasuredProbabilities:
    p_r_given_w: float
    p_r: float
    p_w: float | None = None

    def __post_init__(self):
        for name in ("p_r_given_w", "p_r", "p_w"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")
        if self.p_r_given_w < self.p_r:
            warnings.warn(
                "conditional read-out probability below background",
                BackgroundExceedsSignalWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class CoincidenceCounts:
    """Heralded counts: N1 write-out heralds, n12/n13 doubles, n123 triples."""

    heralds_N1: int
    n12: int
    n13: int
    n123: int

    def __post_init__(self):
        if min(self.heralds_N1, self.n12, self.n13, self.n123) < 0:
            raise ConfigurationError("counts must be non-negative")
        if self.n123 > min(self.n12, self.n13):
            raise ConfigurationError("n123 cannot exceed n12 or n13")
        if self.heralds_N1 < max(self.n12, self.n13):
            raise ConfigurationError("heralds_N1 must be at least n12 and n13")


class AlphaEstimate(NamedTuple):
    alpha: float
    sigma: float
    upper_bound: bool = False


def measured_retrieval(m: MeasuredProbabilities, clamp: bool = True) -> float:
    """R = p(r|w) - p(r). Negative values are clamped to 0 with a warning."""
    R = m.p_r_given_w - m.p_r
    if R < 0 and clamp:
        warnings.warn(
            f"negative retrieval efficiency {R:.3g} clamped to 0",
            NegativeRetrievalWarning,
            stacklevel=2,
        )
        return 0.0
    return R


def intrinsic_efficiency(R: float, chain: DetectionChain) -> float:
    if not 0 <= R <= 1:
        raise ValueError(f"R must lie in [0, 1], got {R}")
    chi = R / chain.total
    if chi > 1:
        raise ChainInconsistencyError(
            f"R={R} implies chi={chi:.3f} > 1 for chain efficiency {chain.total:.4f}"
        )
    return chi


def expected_triples_at_unity(c: CoincidenceCounts) -> float:
    """Triple coincidences expected for alpha = 1, i.e. n12 n13 / N1."""
    if c.heralds_N1 <= 0:
        raise InsufficientStatisticsError("no heralds")
    return c.n12 * c.n13 / c.heralds_N1


def alpha_estimate(c: CoincidenceCounts, uncertainty: str = "poisson") -> AlphaEstimate:
    """alpha = p(23|1) / (p(2|1) p(3|1)) = n123 N1 / (n12 n13).

    uncertainty="poisson" gives sigma = alpha / sqrt(n123). "binomial" propagates
    the binomial spread of each conditional probability, treating them as
    independent. With n123 = 0 the estimate is 0 and sigma is evaluated at
    n123 = 1, returned with upper_bound=True.
    """
    if c.heralds_N1 <= 0 or c.n12 <= 0 or c.n13 <= 0:
        raise InsufficientStatisticsError("alpha needs N1, n12 and n13 all positive")
    expected = expected_triples_at_unity(c)
    if c.n123 == 0:
        return AlphaEstimate(0.0, 1.0 / expected, True)
    alpha = c.n123 / expected
    if uncertainty == "poisson":
        sigma = alpha / math.sqrt(c.n123)
    elif uncertainty == "binomial":
        N = c.heralds_N1
        rel2 = 0.0
        for k in (c.n123, c.n12, c.n13):
            p = k / N
            rel2 += (1 - p) / k
        sigma = alpha * math.sqrt(rel2)
    else:
        raise ValueError(f"unknown uncertainty model {uncertainty!r}")
    return AlphaEstimate(alpha, sigma, False)


COUNTS_HEADER = ("t_ms", "N1", "n12", "n13", "n123")


def read_counts_csv(path) -> list[tuple[float, CoincidenceCounts]]:
    """Read `t_ms,N1,n12,n13,n123` rows."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != COUNTS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(COUNTS_HEADER)}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not x.strip() for x in rec):
                continue
            if len(rec) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(rec)}")
            try:
                t = float(rec[0])
                N1, n12, n13, n123 = (int(x) for x in rec[1:])
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
            rows.append((t, CoincidenceCounts(N1, n12, n13, n123)))
    return rows
