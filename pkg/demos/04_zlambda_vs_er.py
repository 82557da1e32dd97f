#!/usr/bin/env python3
"""The excursion-length limit against the Erdos-Renyi oracle.

The limiting law of rescaled critical cluster sizes is the descending list of
excursion lengths of B(t) + lambda*t - t^2/2 above its running minimum. The
same law is the n -> infinity limit of G(n, 1/n + lambda n^{-4/3}) cluster
sizes rescaled by n^{-2/3}, which gives an independent way to sample it.
This script compares the two samplers with a two-sample KS test on the
largest entry.
"""

import numpy as np
from scipy import stats

from torusperc.coalescent import er_oracle
from torusperc.rng import derive_seed
from torusperc.zlambda import sample_zlambda

SAMPLES = 120
ER_N = 100000

for lam in (-1.0, 0.0, 1.0):
    z_top, er_top = [], []
    for i in range(SAMPLES):
        ev = sample_zlambda(lam, dt=2e-4, seed=derive_seed(31, int(lam), i))
        z_top.append(ev.lengths[0] if ev.lengths.size else 0.0)
        out = er_oracle(ER_N, lam, seed=derive_seed(62, int(lam), i))
        er_top.append(out.rescaled_sizes[0])
    ks = stats.ks_2samp(z_top, er_top)
    print(f"lambda = {lam:+.0f}: excursion sampler mean largest = "
          f"{np.mean(z_top):.3f}, ER oracle mean largest = {np.mean(er_top):.3f}, "
          f"KS p-value = {ks.pvalue:.3f}")

ev = sample_zlambda(0.0, dt=1e-4, seed=7)
print(f"\none lambda=0 sample: horizon T = {ev.horizon:.2f}, "
      f"tail bound {ev.truncation_mass_bound:.2e}, top lengths "
      + ", ".join(f"{x:.3f}" for x in ev.lengths[:6]))
