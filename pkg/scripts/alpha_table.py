"""Intrinsic efficiency and anticorrelation for the five storage times.

Usage: python3 scripts/alpha_table.py
"""
from qrepeater.acceptance import ALPHA_ROWS, counts_for_expected
from qrepeater.detection import DetectionChain, alpha_estimate, intrinsic_efficiency

chain = DetectionChain()
print(f"{'t (ms)':>7} {'R (%)':>6} {'chi (%)':>8} {'alpha':>7} {'sigma':>6} {'n123/expected':>14}")
for t, _, _, n123, E, R, _ in ALPHA_ROWS:
    est = alpha_estimate(counts_for_expected(n123, E))
    chi = intrinsic_efficiency(R / 100, chain)
    print(f"{t:>7} {R:>6.1f} {100 * chi:>8.1f} {est.alpha:>7.3f} {est.sigma:>6.3f} {f'{n123}<{E}':>14}")
