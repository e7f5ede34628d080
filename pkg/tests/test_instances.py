import math
from fractions import Fraction

import pytest

from partbound import instances, oracles, query
from partbound.core import CommInstance, InputError, QueryInstance
from partbound.instances import bits_to_point

F = Fraction


def test_make_tribes_examples():
    t4 = instances.make_tribes(4)
    assert t4.value(bits_to_point("0101")) == 1
    assert t4.value(bits_to_point("0000")) == 0
    assert instances.make_tribes(9).value(bits_to_point("111000000")) == 0
    with pytest.raises(InputError):
        instances.make_tribes(5)


@pytest.mark.parametrize("n", [4, 9])
def test_tribes_set_sizes(n):
    s = math.isqrt(n)
    sets = instances.tribes_sets(n)
    assert len(sets["T1"]) == len(sets["T0"]) == s ** s
    assert len(sets["T2"]) == s ** s * (n - s) // 2
    f = instances.make_tribes(n)
    assert all(f.value(x) == 1 for x in sets["T1"] + sets["T2"])
    assert all(f.value(x) == 0 for x in sets["T0"])
    assert len(set(sets["T0"] + sets["T1"] + sets["T2"])) == sum(len(v) for v in sets.values())


def test_tribes_witness_n4():
    eps = F(1, 32)
    w = instances.tribes_dual_witness(4, eps)
    assert w.report.feasible and w.report.checked == 81
    assert w.delta == F(1, 8) and w.scale_exponent == 0
    assert w.objective == 2 ** w.scale_exponent * (F(1, 12) - eps) == F(5, 96)
    assert abs(w.formula_value - 2 ** 0.5 * (1 / 12 - 1 / 32)) < 1e-12
    relaxed = query.compute_query_bound(instances.make_tribes(4), "qsrec_relaxed", eps).value
    full = query.compute_query_bound(instances.make_tribes(4), "qprt", eps).value
    assert w.objective <= relaxed <= full


def test_tribes_witness_n9():
    w = instances.tribes_dual_witness(9, F(1, 32))
    assert w.report.feasible and w.report.checked == 3 ** 9
    # delta * n = 9/8, so the witness scales by 2^1
    assert w.scale_exponent == 1
    assert w.objective == 2 * (F(1, 12) - F(1, 32)) == F(5, 48)


def test_tribes_witness_preconditions():
    for eps in (F(1, 8), F(1, 16), F(0)):
        with pytest.raises(InputError):
            instances.tribes_dual_witness(4, eps)
    with pytest.raises(InputError):
        instances.tribes_dual_witness(6, F(1, 32))


def _lne_point(blocks, n=2):
    return sum(b << (i * n) for i, b in enumerate(blocks))


def test_make_lne_examples():
    f = instances.make_lne(2)
    assert f.nrows == f.ncols == 16 and f.is_total()
    x = _lne_point([0b01, 0b10])
    assert f.value(x, _lne_point([0b10, 0b01])) == 1
    assert f.value(x, _lne_point([0b01, 0b11])) == 0
    assert all(f.value(v, v) == 0 for v in range(16))


def test_lne_witness_n2_full_grid():
    w = instances.lne_primal_witness(2)
    assert w.full_grid and w.checked_cells == 256 and w.report.feasible
    # closed forms: 2^(2n) on the one side, sum_k 2^(2k+n) on the zero side
    assert w.one_side_total == 2 ** 4 == 16
    assert w.zero_side_total == sum(2 ** (2 * k + 2) for k in range(2)) == 20
    assert w.total == 36 <= w.bound == 128
    assert w.support_total == 25
    assert abs(math.log2(w.total) - 5.17) < 0.01
    assert oracles.exact_rank(instances.make_lne(2)).value == 16


def test_lne_witness_restricted_mode_records_mode():
    w = instances.lne_primal_witness(2, full_grid=False)
    assert not w.full_grid and w.checked_cells == 9 * 9 and w.report.feasible and not w.skipped


def test_lne_one_inputs_see_four_quarter_weight_rectangles():
    f = instances.make_lne(2)
    w = instances.lne_primal_witness(2).witness
    ones = [(lab, r, v) for (lab, r), v in w.weights.items() if lab == 1]
    for x in range(16):
        for y in range(16):
            if f.value(x, y) != 1 or not all(b for b in (x & 3, x >> 2, y & 3, y >> 2)):
                continue
            hits = [v for _, r, v in ones if r.contains(x, y)]
            assert len(hits) == 4 and all(v == F(1, 4) for v in hits) and sum(hits) == 1


def test_lne_sampled_n3():
    w = instances.lne_primal_witness(3, samples=30, seed=1)
    assert w.checked_cells == 30 and w.report.feasible
    assert w.total <= w.bound


def test_make_standard_examples():
    eq4 = instances.make_standard("EQ_4")
    assert isinstance(eq4, CommInstance) and eq4.cells == tuple(int(x == y) for x in range(4) for y in range(4))
    assert instances.make_standard("OR_2").table == (0, 1, 1, 1)
    const = instances.make_standard("CONST_3x3")
    assert const.nrows == const.ncols == 3 and set(const.cells) == {0}
    assert isinstance(instances.make_standard("CONST_3"), QueryInstance)
    with pytest.raises(InputError):
        instances.make_standard("FOO_3")


def test_random_corpora_are_seeded():
    a = instances.random_comm_instances(7, 5)
    assert a == instances.random_comm_instances(7, 5) != instances.random_comm_instances(8, 5)
    assert all(f.nrows == f.ncols == 4 and f.is_total() for f in a)
    q = instances.random_query_instances(7, 3)
    assert q == instances.random_query_instances(7, 3) and all(f.n == 4 for f in q)
