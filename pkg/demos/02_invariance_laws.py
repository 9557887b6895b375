"""Two striking invariances of the interference-limited regime.

Density invariance: scaling the station density leaves the C/I distribution
untouched (both signal and interference scale together).  Dimension
equivalence: a highway (1-D), a plain (2-D) and a high-rise volume (3-D)
share one C/I law whenever they share the ratio eps/l.

The script verifies both empirically with common confidence bands.

Run:  python demos/02_invariance_laws.py
"""

import math

from scsnet import Dimension, NetworkSpec, Tier, empirical_tail_ci

etas = [0.25, 0.5, 1.0, 2.0, 4.0]
N = 100_000

print("density invariance (l=2, eps=4):")
runs = {}
for k, lam in enumerate((0.1, 1.0, 10.0)):
    # independent seeds: the agreement below is statistical, not shared noise
    spec = NetworkSpec(dim=Dimension(2), epsilon=4.0, tiers=(Tier(lam, 1.0),))
    runs[lam] = empirical_tail_ci(spec, etas, N, seed=20 + k)
header = "".join(f"  lam={lam:<6}" for lam in runs)
print(f"{'eta':>5}" + header)
for i, eta in enumerate(etas):
    row = "".join(f"  {runs[lam].tails[i]:.4f}   " for lam in runs)
    print(f"{eta:5.2f}" + row)

print("\ndimension equivalence at eps/l = 2:")
cases = ((1, 2.0), (2, 4.0), (3, 6.0))
runs = {}
for k, (l, eps) in enumerate(cases):
    spec = NetworkSpec(dim=Dimension(l), epsilon=eps, tiers=(Tier(1.0, 1.0),))
    runs[l] = empirical_tail_ci(spec, etas, N, seed=30 + k)
print(f"{'eta':>5}" + "".join(f"   l={l},e={eps:.0f} " for l, eps in cases))
for i, eta in enumerate(etas):
    row = "".join(f"   {runs[l].tails[i]:.4f}  " for l, _ in cases)
    print(f"{eta:5.2f}" + row)

worst = 0.0
vals = list(runs.values())
for a in range(len(vals)):
    for b in range(a + 1, len(vals)):
        for i in range(len(etas)):
            gap = abs(vals[a].tails[i] - vals[b].tails[i])
            band = math.hypot(vals[a].halfwidths[i], vals[b].halfwidths[i])
            worst = max(worst, gap / band)
print(f"\nlargest pairwise gap = {worst:.2f} of one joint 99% band (<= 1 expected)")
