"""Rate versus distance for three memories against direct transmission.

Writes the plot blocks and per-memory CSVs, then prints each curve's 0.01 Hz
reach and the distance where it overtakes direct transmission.

Usage: python3 scripts/rate_figure.py [out_dir]
"""
import math
import sys
from pathlib import Path

from qrepeater.cli import run_scenario
from qrepeater.linkbudget import DirectTransmissionParams, dark_cutoff_distance, direct_max_distance, direct_rate
from qrepeater.repeater import (
    MEMORY_3MS_73,
    MEMORY_200MS_16,
    MEMORY_220MS_76,
    EndMode,
    LinkParams,
    max_distance,
    optimize_scenario,
)


def crossover(memory, link, lo=50.0, hi=1500.0):
    g = lambda L: optimize_scenario(L, memory, link).rate_hz - direct_rate(L, DirectTransmissionParams())
    if g(lo) > 0:
        return lo
    if g(hi) < 0:
        return math.nan
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if g(mid) > 0 else (mid, hi)
    return hi


def main(out="out"):
    Path(out).mkdir(parents=True, exist_ok=True)
    code = run_scenario("rate_comparison", out)
    if code:
        return code
    direct = DirectTransmissionParams()
    print(f"direct: 0.01 Hz reach {direct_max_distance(direct):.1f} km, "
          f"dark-count cutoff {dark_cutoff_distance(direct):.1f} km")
    link = LinkParams()
    for mem in (MEMORY_200MS_16, MEMORY_3MS_73, MEMORY_220MS_76):
        print(f"{mem.label:>14}: 0.01 Hz reach {max_distance(mem, 0.01, link):7.1f} km, "
              f"beats direct beyond {crossover(mem, link):7.1f} km")
    imm = optimize_scenario(1000.0, MEMORY_220MS_76, LinkParams(end_mode=EndMode.IMMEDIATE_DETECTION))
    print(f"immediate detection at 1000 km: {imm.rate_hz:.3g} Hz (n={imm.chosen_n}, Nm={imm.chosen_Nm})")
    print(f"plot data in {Path(out) / 'rate_comparison.dat'}")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
