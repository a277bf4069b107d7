"""Three-term progressions in dense subsets of Z/N.

The cyclic Roth average of a set S (the cyclic shift analogue of the
recurrence average) counts progressions exactly, including the trivial ones
with common difference 0.  Random sets of density 1/2 have about N^2/8
progressions; the identity below holds with no rounding at all.
"""

import numpy as np

from ergolab import CyclicShift, DensitySet, count_3aps, cyclic_roth_average, roth_average

rng = np.random.default_rng(2024)
for n in (16, 64, 256, 512):
    s = DensitySet.random(n, 0.5, rng)
    avg = cyclic_roth_average(s)
    cyc = count_3aps(s, "cyclic")
    line = count_3aps(s, "integer-line")
    print(f"N = {n:3d}  |S| = {s.size:3d}  line APs = {line:6d}  cyclic APs = {cyc:6d}  "
          f"N^2 avg - |S| = {avg * n * n - s.size}")

s = DensitySet.random(40, 0.5, rng)
via_system = roth_average(CyclicShift(40), s.as_interval_set(), [40]).last
print(f"\ncyclic shift system on [0,1) gives {via_system}; direct count gives {cyclic_roth_average(s)}")

# A progression-free set: digits 0/1 in base 3 (no carries, so no a + c = 2b)
free = DensitySet.from_members(243, [k for k in range(243) if "2" not in np.base_repr(k, 3)])
print(f"base-3 digits in {{0,1}}: |S| = {free.size}, line APs = {count_3aps(free)}")
