from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from partbound.core import (
    Assignment, Caps, CommInstance, Distribution, InputError, QueryInstance, Rectangle, ResourceError,
    Witness, as_rational, consistent_inputs, enumerate_assignments, enumerate_rectangles, floor_log2,
    fmt_rational,
)


def test_rectangle_counts():
    assert len(enumerate_rectangles(1, 1)) == 1
    assert len(enumerate_rectangles(2, 2)) == 9
    assert len(enumerate_rectangles(3, 2)) == 21


def test_rectangles_sorted_and_unique():
    rects = enumerate_rectangles(3, 3)
    assert rects == sorted(rects)
    assert len(set(rects)) == len(rects) == 49


@pytest.mark.parametrize("r,c", [(r, c) for r in range(1, 5) for c in range(1, 5)])
def test_each_cell_lies_in_the_expected_number_of_rectangles(r, c):
    rects = enumerate_rectangles(r, c)
    for x in range(r):
        for y in range(c):
            assert sum(R.contains(x, y) for R in rects) == 2 ** (r - 1) * 2 ** (c - 1)


def test_assignment_counts_and_order():
    assert len(enumerate_assignments(1)) == 3
    assert len(enumerate_assignments(2)) == 9
    asg = enumerate_assignments(4)
    assert len(asg) == 81
    assert asg == sorted(asg)
    assert asg[0] == Assignment(0, 0)


@pytest.mark.parametrize("n", range(1, 7))
def test_each_point_lies_in_two_to_the_n_assignments(n):
    asg = enumerate_assignments(n)
    for x in range(1 << n):
        assert sum(a.contains(x) for a in asg) == 2 ** n


def test_enumeration_caps():
    with pytest.raises(ResourceError):
        enumerate_rectangles(4, 4, Caps(max_regions=100))
    with pytest.raises(ResourceError):
        enumerate_assignments(5, Caps(max_regions=100))


def test_consistent_inputs_examples():
    f = CommInstance.from_rows([[0, 1], [1, 0]])
    assert consistent_inputs(Rectangle(3, 3), f) == [0, 1, 2, 3]
    q3 = QueryInstance(3, 1, (0,) * 8)
    assert consistent_inputs(Assignment(0, 0), q3) == list(range(8))
    q2 = QueryInstance(2, 1, (0,) * 4)
    assert sorted(consistent_inputs(Assignment(0b01, 0b01), q2)) == [0b01, 0b11]


@given(st.integers(1, 6), st.data())
def test_assignment_points_count(n, data):
    fixed = data.draw(st.integers(0, (1 << n) - 1))
    values = data.draw(st.integers(0, (1 << n) - 1)) & fixed
    a = Assignment(fixed, values)
    pts = a.points(n)
    assert len(pts) == 2 ** (n - a.size)
    assert all(a.contains(x) for x in pts)


def test_rational_parsing():
    assert as_rational("3/6") == Fraction(1, 2)
    assert as_rational(2) == Fraction(2)
    for bad in ("0.5", "1e3", 0.5, "x", True, "1/0"):
        with pytest.raises(InputError):
            as_rational(bad)
    assert fmt_rational(Fraction(4, 2)) == "2"
    assert fmt_rational(Fraction(-3, 4)) == "-3/4"


@given(st.fractions(), st.fractions())
def test_rational_canonical_round_trip(a, b):
    assert a + b - b == a
    assert as_rational(fmt_rational(a)) == a


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6))
def test_floor_log2(q):
    k = floor_log2(q)
    assert Fraction(2) ** k <= q < Fraction(2) ** (k + 1)


def test_instance_validation():
    with pytest.raises(InputError):
        CommInstance.from_rows([[0, 2]], alphabet_size=2)
    with pytest.raises(InputError):
        CommInstance.from_rows([[frozenset()]], relation=True)
    with pytest.raises(InputError):
        QueryInstance(2, 1, (0, 1, 1))
    with pytest.raises(InputError):
        Rectangle(0, 1)
    with pytest.raises(InputError):
        Assignment(0b01, 0b10)


def test_instance_views():
    f = CommInstance.from_rows([[0, None], [1, 1]])
    assert f.defined() == [0, 2, 3]
    assert f.preimage(1) == [2, 3]
    assert f.image() == [0, 1]
    assert not f.is_total()
    assert f.coords(3) == (1, 1)


def test_distribution_rules():
    d = Distribution.uniform([0, 1, 2, 3])
    assert d.total([0, 1]) == Fraction(1, 2)
    with pytest.raises(InputError):
        Distribution({0: Fraction(1, 2)})
    with pytest.raises(InputError):
        Distribution({0: Fraction(3, 2), 1: Fraction(-1, 2)})


def test_witness_is_sparse_and_signed():
    w = Witness("primal", "prt", 0, weights={(0, Rectangle(1, 1)): 0, (1, Rectangle(1, 1)): Fraction(1, 2)})
    assert list(w.weights) == [(1, Rectangle(1, 1))]
    with pytest.raises(InputError):
        Witness("primal", "prt", 0, weights={(0, Rectangle(1, 1)): -1})
    with pytest.raises(InputError):
        Witness("dual", "prt", 0, weights={(0, Rectangle(1, 1)): 1})
