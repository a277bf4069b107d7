"""Chacon's transformation: weakly mixing, built from integer tower layouts.

Stage 12 has 797161 levels.  Observables that are constant on the levels of an
earlier stage become integer arrays, and the multicorrelation sums run in a
compiled loop.  The L2 defect of the (2,3) average falls with N and the
weak-mixing defect is small, while the Kronecker projector is the mean.
"""

import time

from ergolab import RankOneTower, StepFunction, chacon_stage, dyadic, kronecker_projector
from ergolab import l2_multicorrelation_defect, weak_mixing_defect
from ergolab.spectral import tower_weights

stage = 12
tower = RankOneTower(stage)
print(f"stage {stage}: {tower.height} levels of width 1/{tower.height}")


def level_difference(s, a, b):
    st = chacon_stage(s, terminal=stage)
    return StepFunction.indicator(st.level_set([a])) - StepFunction.indicator(st.level_set([b]))


fs = [level_difference(3, 0, 1), level_difference(2, 0, 5), level_difference(1, 0, 2)]
t = time.perf_counter()
series = l2_multicorrelation_defect(tower, fs, dyadic(7, 15))
print(f"\n(2,3) L2 defect, zero-mean level differences ({time.perf_counter() - t:.1f}s):")
for n, v in series:
    print(f"  N = {n:6d}  defect = {v:.3e}")

f, g = level_difference(1, 0, 1), level_difference(1, 2, 3)
wm = weak_mixing_defect(tower, f, g, dyadic(8, 17))
print(f"\nweak-mixing defect at N = 2^17: {float(wm.last):.2e}")

proj = kronecker_projector(RankOneTower(8), cutoff=3)
w = tower_weights(RankOneTower(8), 3)
print(f"compressed Koopman matrix on {len(w)} basis elements: projector rank {proj.rank}")
