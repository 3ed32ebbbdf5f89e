"""Monte Carlo against both analytic decay averages.

For each (memory, distance, nesting) prints the simulated rate with its 95%
interval and the ratio to the analytic rate under the decay-averaged
("laplace") and mean-age treatments.

Usage: python3 scripts/mc_crosscheck.py [trials] [workers]
"""
import math
import sys

from qrepeater.montecarlo import SimConfig, estimate_rate_with_ci
from qrepeater.repeater import (
    MEMORY_200MS_16,
    MEMORY_220MS_76,
    LinkParams,
    MemoryModel,
    RepeaterScenario,
    analytic_rate,
)

SEED = 20_160_914


def ratio(a, b):
    return a / b if b > 0 else math.inf


def main(trials=10_000, workers=1):
    trials, workers = int(trials), int(workers)
    link = LinkParams(dark_prob=0.0)
    memories = [MEMORY_220MS_76, MEMORY_200MS_16, MemoryModel(1.0, math.inf)]
    print(f"{'memory':>14} {'L':>5} {'n':>2} {'mc (Hz)':>10} {'ci95':>23} {'mc/laplace':>11} {'mc/mean-age':>12}")
    for mem in memories:
        for L in (100.0, 200.0, 300.0, 400.0):
            for n in (1, 2):
                s = RepeaterScenario.for_fidelity(L, n, mem, link)
                est = estimate_rate_with_ci(SimConfig(s, trials, SEED), workers)
                lap = analytic_rate(s).rate_hz
                mean_age = analytic_rate(s, decay_average="mean_age").rate_hz
                label = mem.label if math.isfinite(mem.tau) else "no decay"
                print(f"{label:>14} {L:>5.0f} {n:>2} {est.mean_rate:>10.4g} "
                      f"[{est.ci95_low:>10.4g},{est.ci95_high:>10.4g}] "
                      f"{ratio(est.mean_rate, lap):>11.3g} {ratio(est.mean_rate, mean_age):>12.3g}")


if __name__ == "__main__":
    main(*sys.argv[1:])
