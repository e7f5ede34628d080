from fractions import Fraction

from hypothesis import settings, strategies as st

from partbound.core import CommInstance, QueryInstance

settings.register_profile("default", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("default")

EPS = st.sampled_from([Fraction(0), Fraction(1, 8), Fraction(1, 4), Fraction(1, 3)])


@st.composite
def comm_instances(draw, max_side=3, partial=True, alphabet=2):
    r = draw(st.integers(1, max_side))
    c = draw(st.integers(1, max_side))
    vals = st.integers(0, alphabet - 1)
    entry = st.one_of(st.none(), vals) if partial else vals
    cells = draw(st.lists(entry, min_size=r * c, max_size=r * c))
    return CommInstance(r, c, alphabet, tuple(cells))


@st.composite
def query_instances(draw, max_n=3, partial=True):
    n = draw(st.integers(1, max_n))
    entry = st.one_of(st.none(), st.integers(0, 1)) if partial else st.integers(0, 1)
    table = draw(st.lists(entry, min_size=1 << n, max_size=1 << n))
    return QueryInstance(n, 1, tuple(table))


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
