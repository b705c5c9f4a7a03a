import itertools
from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from lolab.exactmath import GR

settings.register_profile("lolab", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lolab")

small_ints = st.integers(-4, 4)
rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))
gaussian = st.builds(GR, rationals, rationals)


def int_vectors(k, lo=-3, hi=3):
    return st.tuples(*[st.integers(lo, hi)] * k)


def sign_vectors(n):
    return itertools.product((-1, 1), repeat=n)


def brute_sums(vectors, k):
    """Multiset of signed sums as a {point: count} dict, by direct enumeration."""
    out = {}
    for signs in sign_vectors(len(vectors)):
        p = tuple(sum((GR(s) * GR(v[j]) for s, v in zip(signs, vectors)), GR(0)) for j in range(k))
        out[p] = out.get(p, 0) + 1
    return out


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
