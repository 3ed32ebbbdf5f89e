"""Rate-curve containers and their text/CSV emitters."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

RATE_FLOOR = 1e-30
CURVE_HEADER = ["distance_km", "rate_hz", "n", "Nm", "p"]


@dataclass
class CurveOutput:
    label: str
    distances: list[float] = field(default_factory=list)
    rates: list[float] = field(default_factory=list)
    n: list[int] = field(default_factory=list)
    Nm: list[int] = field(default_factory=list)
    p: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        lens = {len(self.distances), len(self.rates), len(self.n), len(self.Nm), len(self.p)}
        if len(lens) != 1:
            raise ValueError("curve columns differ in length")
        if any(b <= a for a, b in zip(self.distances, self.distances[1:])):
            raise ValueError("distances must be strictly increasing")
        if any(r < 0 for r in self.rates):
            raise ValueError("rates must be non-negative")

    def append(self, distance, rate, n=0, Nm=1, p=1.0):
        self.distances.append(distance)
        self.rates.append(rate)
        self.n.append(n)
        self.Nm.append(Nm)
        self.p.append(p)


def fmt(x: float) -> str:
    """Locale-independent, round-trip exact float text."""
    if x == 0:
        return "0"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".16e")


def floored(rate: float) -> float:
    return 0.0 if rate < RATE_FLOOR else rate


def distance_grid(lo: float = 50.0, hi: float = 1500.0, points: int = 64, spacing: str = "log") -> list[float]:
    if points < 2 or not 0 < lo < hi:
        raise ValueError("grid needs 0 < lo < hi and at least 2 points")
    if spacing == "log":
        g = np.geomspace(lo, hi, points)
    elif spacing == "linear":
        g = np.linspace(lo, hi, points)
    else:
        raise ValueError(f"unknown grid spacing {spacing!r}")
    return [float(x) for x in g]


def emit_csv(curve: CurveOutput, path) -> None:
    curve.validate()
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for d, r, n, Nm, p in zip(curve.distances, curve.rates, curve.n, curve.Nm, curve.p):
            w.writerow([fmt(d), fmt(floored(r)), n, Nm, fmt(p)])


def read_curve_csv(path, label: str = "") -> CurveOutput:
    c = CurveOutput(label)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != CURVE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for rec in reader:
            c.append(float(rec[0]), float(rec[1]), int(rec[2]), int(rec[3]), float(rec[4]))
    c.validate()
    return c


def emit_plot_data(curves: list[CurveOutput], path) -> None:
    """Two-column blocks, one per curve, each headed by a `#` label line."""
    if not curves:
        raise ValueError("need at least one curve")
    blocks = []
    for c in curves:
        lines = [f"# {c.label}"]
        lines += [f"{fmt(d)} {fmt(floored(r))}" for d, r in zip(c.distances, c.rates)]
        blocks.append("\n".join(lines))
    with open(path, "w", newline="") as f:
        f.write("\n\n".join(blocks) + "\n")


def crossing_distance(distances, rates, threshold: float) -> float:
    """First distance where the curve drops below `threshold`.

    Interpolates log(rate) linearly between the bracketing grid points. Returns
    nan if the curve never reaches the threshold and inf if it never drops below.
    """
    prev = None
    for d, r in zip(distances, rates):
        if r >= threshold:
            prev = (d, r)
            continue
        if prev is None:
            return math.nan
        d0, r0 = prev
        if r <= 0:
            return d0
        frac = (math.log(r0) - math.log(threshold)) / (math.log(r0) - math.log(r))
        return d0 + frac * (d - d0)
    return math.inf if prev is not None else math.nan
