"""Roth averages for a rotation by (an exact rational stand-in for) the golden mean.

For A = [0, 1/4) the average of mu(A & T^i A & T^{2i} A) tends to 1/32.  We
watch the exact values approach it, then build the positivity certificate,
a lower bound for the liminf that only uses a return-time gap bound.
"""

from fractions import Fraction

from ergolab import IntervalSet, Rotation, dyadic, golden_approximant, positivity_certificate, roth_average

alpha = golden_approximant()
print(f"alpha = {float(alpha):.15f}  (denominator has {alpha.denominator.bit_length()} bits)")

A = IntervalSet.interval(0, Fraction(1, 4))
series = roth_average(Rotation(alpha), A, dyadic(4, 15))
for n, v in series:
    print(f"N = {n:6d}   average = {float(v):.8f}   error vs 1/32 = {float(v) - 1 / 32:+.2e}")

cert = positivity_certificate(Rotation(alpha), A, Fraction(1, 20))
print()
print(f"returns with ||i alpha|| < {cert.return_bound.delta} occur in every window of L = {cert.L}")
print(f"certified lower bound: ({cert.cube_integral} - 3/20) / {cert.L} = {float(cert.lower_bound):.3e}")
print(f"measured average at N = {series.checkpoints[-1]}: {float(series.last):.5f}")
