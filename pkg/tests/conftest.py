from fractions import Fraction

from hypothesis import strategies as st

from ergolab.measure_algebra import normalize

rationals = st.builds(lambda q, p: Fraction(p % (q + 1), q), st.integers(1, 48), st.integers(0, 10 ** 6))


@st.composite
def interval_sets(draw, max_pieces=4):
    pts = sorted(set(draw(st.lists(rationals, min_size=0, max_size=2 * max_pieces))))
    return normalize(zip(pts[0::2], pts[1::2]))
