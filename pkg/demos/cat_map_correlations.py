"""Multiple correlations on the cat map, computed by lattice transport.

Characters are moved exactly (T^i chi_a = chi_{B^i a}), so a correlation of
three characters is nonzero only at the finitely many i where the transported
indices cancel.  Scalar averages therefore decay like hits/N, the L2 defect of
cosines shrinks, and the Kronecker projector keeps only the constants.
"""

import numpy as np

from ergolab import TrigPolynomial, cat_map, dyadic, kronecker_projector
from ergolab import l2_multicorrelation_defect, scalar_multicorrelation, weak_mixing_defect

cat = cat_map()
chi, cos = TrigPolynomial.character, TrigPolynomial.cosine

# (M^T)^2 a + M^T b + c = 0 at i = 1 for this choice, so exactly one hit
a, b, c = (2, -4), (1, 0), (0, 1)
series = scalar_multicorrelation(cat, [chi(a), chi(b), chi(c)], [1, 10, 100, 1000])
print("scalar correlation of characters (one resonance at i = 1):")
for n, v in series:
    print(f"  N = {n:5d}  value = {v}")

fs = [cos((1, 0)), cos((0, 1)), cos((1, 1))]
l2 = l2_multicorrelation_defect(cat, fs, dyadic(4, 11))
print("\nL2 defect of (1/N) sum T^i f T^{2i} g T^{3i} h for three cosines:")
for n, v in l2:
    print(f"  N = {n:5d}  defect = {v:.5f}   sqrt(N) * defect = {np.sqrt(n) * v:.4f}")

wm = weak_mixing_defect(cat, cos((1, 0)), cos((1, 1)), [2 ** 10])
print(f"\nweak-mixing defect at N = 1024: {float(wm.last)}")

proj = kronecker_projector(cat, cutoff=4)
print(f"Kronecker projector on an 81-mode window: rank {proj.rank}, "
      f"idempotence error {proj.idempotence_error():.1e}")
