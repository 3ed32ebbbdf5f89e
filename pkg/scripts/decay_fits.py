"""Double-exponential fits to synthetic retrieval-decay data.

Fits many noisy realisations and reports how often each parameter lands
within 2 sigma of the generating value, plus the seed-0 fit in full.

Usage: python3 scripts/decay_fits.py [n_seeds]
"""
import sys

import numpy as np

from qrepeater.acceptance import synthetic_decay_data
from qrepeater.fitting import fit_double_exp, format_report

names = ("chi1", "tau1", "chi2", "tau2")


def main(n_seeds=200):
    n_seeds = int(n_seeds)
    truth, data = synthetic_decay_data(seed=0)
    print(format_report("double", fit_double_exp(data)))
    hits = np.zeros(4)
    pulls = []
    for seed in range(n_seeds):
        res = fit_double_exp(synthetic_decay_data(seed=seed)[1])
        z = (res.params - truth) / res.stderr
        pulls.append(z)
        hits += np.abs(z) < 2
    pulls = np.array(pulls)
    for i, name in enumerate(names):
        print(f"{name}: within 2 sigma {hits[i] / n_seeds:.3f}, pull mean {pulls[:, i].mean():+.2f} "
              f"sd {pulls[:, i].std():.2f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
