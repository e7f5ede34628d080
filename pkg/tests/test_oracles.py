import math

import pytest
import sympy
from hypothesis import given

from conftest import comm_instances, query_instances
from partbound import comm, instances, oracles, query
from partbound.core import CommInstance, InputError, QueryInstance, ResourceError


def _dcc_naive(f, rows, cols):
    vals = {f.value(x, y) for x in rows for y in cols} - {None}
    if len(vals) <= 1:
        return 0
    best = math.inf
    for side, items in (("A", rows), ("B", cols)):
        for k in range(1, 1 << len(items) - 1):
            part = [v for i, v in enumerate(items) if (k >> i) & 1]
            rest = [v for v in items if v not in part]
            if side == "A":
                c = max(_dcc_naive(f, part, cols), _dcc_naive(f, rest, cols))
            else:
                c = max(_dcc_naive(f, rows, part), _dcc_naive(f, rows, rest))
            best = min(best, c)
    return best + 1


def _dquery_naive(f, fixed):
    pts = [x for x in range(f.npoints) if all((x >> i) & 1 == v for i, v in fixed.items())]
    if len({f.table[x] for x in pts} - {None}) <= 1:
        return 0
    return 1 + min(max(_dquery_naive(f, {**fixed, i: b}) for b in (0, 1))
                   for i in range(f.n) if i not in fixed)


def test_deterministic_cc_examples():
    assert oracles.deterministic_cc(CommInstance.from_rows([[0] * 4] * 4)).value == 0
    assert oracles.deterministic_cc(instances.make_standard("EQ_2")).value == 2
    assert oracles.deterministic_cc(instances.make_standard("EQ_4")).value == 3


def test_deterministic_query_examples():
    assert oracles.deterministic_query(QueryInstance(2, 1, (1,) * 4)).value == 0
    assert oracles.deterministic_query(instances.make_standard("OR_2")).value == 2
    assert oracles.deterministic_query(instances.make_tribes(4)).value == 4


def test_rank_examples():
    assert oracles.exact_rank(instances.make_standard("EQ_4")).value == 4
    assert oracles.exact_rank(CommInstance.from_rows([[1] * 3] * 3)).value == 1
    assert oracles.exact_rank(instances.make_lne(2)).value == 16


def test_oracle_preconditions():
    with pytest.raises(InputError):
        oracles.exact_rank(CommInstance.from_rows([[0, None]]))
    with pytest.raises(ResourceError):
        oracles.deterministic_cc(CommInstance.from_rows([[0] * 9]))
    with pytest.raises(ResourceError):
        oracles.deterministic_query(QueryInstance(11, 1, (0,) * 2048))


@given(comm_instances(max_side=3))
def test_dcc_matches_naive_recursion_and_tree(f):
    r = oracles.deterministic_cc(f)
    assert r.value == _dcc_naive(f, list(range(f.nrows)), list(range(f.ncols)))
    p = comm.protocol_to_primal(f, r.structure)
    assert p.error == 0 and p.depth == r.value and p.report.feasible


@given(comm_instances(max_side=4, partial=False))
def test_rank_matches_sympy_and_log_rank_bound(f):
    rank = oracles.exact_rank(f).value
    assert rank == sympy.Matrix(f.nrows, f.ncols, list(f.cells)).rank()
    d = oracles.deterministic_cc(f).value
    assert rank == 0 or 2 ** d >= rank


@given(query_instances(max_n=3))
def test_dquery_matches_naive_recursion_and_tree(f):
    r = oracles.deterministic_query(f)
    assert r.value == _dquery_naive(f, {})
    t = query.decision_tree_to_primal(f, r.structure)
    assert t.error == 0 and t.depth == r.value


@given(comm_instances(max_side=3))
def test_two_to_the_dcc_bounds_partition_bound(f):
    assert 2 ** oracles.deterministic_cc(f).value >= comm.compute_comm_bound(f, "prt").value


@given(query_instances(max_n=3))
def test_four_to_the_dquery_bounds_query_partition_bound(f):
    assert 4 ** oracles.deterministic_query(f).value >= query.compute_query_bound(f, "qprt").value
