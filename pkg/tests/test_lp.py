from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from partbound import comm, instances, oracles
from partbound.core import Caps, InputError, InvariantError, ResourceError
from partbound.lp import EQ, FREE, GE, LE, NONNEG, LPBuilder, LinearProgram, check_point, dump_lp, solve, \
    solution_point, weak_duality_gap
from partbound.witnesses import check_witness, witness_point


def _max_x(upper=True):
    b = LPBuilder("max")
    x = b.var("x", cost=1)
    if upper:
        b.add({x: 1}, LE, 1, "cap")
    else:
        b.add({x: 1}, GE, 0, "floor")
    return b.build()


def test_bounded_max():
    sol = solve(_max_x())
    assert sol.status == "optimal"
    assert sol.objective == 1
    assert sol.primal_values == [1]


def test_infeasible():
    b = LPBuilder("min")
    x = b.var("x")
    b.add({x: 1}, GE, 1)
    b.add({x: 1}, LE, 0)
    assert solve(b.build()).status == "infeasible"


def test_unbounded():
    assert solve(_max_x(upper=False)).status == "unbounded"


def test_check_point_examples():
    lp = _max_x()
    ok = check_point(lp, {"x": 1}, "primal")
    assert ok.feasible and ok.objective == 1
    bad = check_point(lp, {"x": 2}, "primal")
    assert len(bad.violations) == 1 and bad.violations[0].slack == -1
    with pytest.raises(InputError):
        check_point(lp, {"y": 1}, "primal")


def test_zero_point_misses_partition_equality():
    f = instances.make_standard("EQ_2")
    lp = comm.build_comm_lp(f, "prt")
    rep = check_point(lp, {}, "primal")
    eq_misses = [v for v in rep.violations if v.slack == 1]
    assert len(eq_misses) == 4


def test_objective_only_program_rejected():
    with pytest.raises(InputError):
        LinearProgram(("x",), ("nonneg",), "min", {0: Fraction(1)}, ())


def test_free_variables_and_equalities():
    b = LPBuilder("min")
    x = b.var("x", cost=1, sign=FREE)
    y = b.var("y", cost=2)
    b.add({x: 1, y: 1}, EQ, 3, "sum")
    b.add({x: 1}, GE, -5, "low")
    sol = solve(b.build())
    assert sol.status == "optimal" and sol.objective == 3 and sol.primal_values == [3, 0]


def test_caps():
    lp = comm.build_comm_lp(instances.make_standard("EQ_2"), "prt")
    with pytest.raises(ResourceError):
        solve(lp, Caps(max_lp_vars=3))
    with pytest.raises(ResourceError):
        solve(comm.build_comm_lp(instances.make_standard("EQ_4"), "prt"), Caps(max_pivots=2))


def test_weak_duality_gaps_on_eq4():
    f = instances.make_standard("EQ_4")
    lp = comm.build_comm_lp(f, "prt")
    rep = comm.compute_comm_bound(f, "prt")
    fool = comm.fooling_set_dual(f, [0, 5, 10, 15], 1)
    proto = comm.protocol_to_primal(f, oracles.deterministic_cc(f).structure)
    opt_p, opt_d = witness_point(lp, rep.primal_witness), witness_point(lp, rep.dual_witness)
    assert weak_duality_gap(lp, opt_p, opt_d) == 0
    assert weak_duality_gap(lp, witness_point(lp, proto.witness), witness_point(lp, fool)) == 4
    assert weak_duality_gap(lp, opt_p, witness_point(lp, fool)) == 3
    with pytest.raises(InvariantError):
        weak_duality_gap(lp, {}, opt_d)


def test_solution_is_deterministic():
    f = instances.make_standard("EQ_4")
    lp = comm.build_comm_lp(f, "rec", Fraction(1, 8), 1)
    a, b = solve(lp), solve(lp)
    assert a.primal_values == b.primal_values and a.dual_values == b.dual_values


def test_dump_lp_format():
    text = dump_lp(comm.build_comm_lp(instances.make_standard("EQ_2"), "prt", Fraction(1, 8)))
    lines = text.splitlines()
    assert lines[0].startswith("min:")
    assert any(line.endswith(">= 7/8") for line in lines)
    assert any(line.endswith("= 1") for line in lines)


small = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def random_lps(draw):
    nv = draw(st.integers(1, 4))
    nc = draw(st.integers(1, 4))
    b = LPBuilder(draw(st.sampled_from(["min", "max"])))
    cols = [b.var(f"v{j}", cost=draw(small), sign=draw(st.sampled_from([NONNEG, NONNEG, FREE])))
            for j in range(nv)]
    for i in range(nc):
        coeffs = {j: draw(small) for j in cols}
        b.add(coeffs, draw(st.sampled_from([LE, GE, EQ])), draw(small), f"r{i}")
    # keep the region bounded so float and exact solvers agree on status
    for j in cols:
        b.add({j: 1}, LE, 5, f"ub{j}")
        b.add({j: 1}, GE, -5, f"lb{j}")
    return b.build()


def _scipy(lp):
    n = lp.nvars
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for c in lp.constraints:
        row = np.zeros(n)
        for j, v in c.coeffs.items():
            row[j] = float(v)
        if c.rel == EQ:
            a_eq.append(row), b_eq.append(float(c.rhs))
        elif c.rel == LE:
            a_ub.append(row), b_ub.append(float(c.rhs))
        else:
            a_ub.append(-row), b_ub.append(-float(c.rhs))
    sgn = 1 if lp.sense == "min" else -1
    cost = [sgn * float(lp.objective.get(j, 0)) for j in range(n)]
    bounds = [(None, None) if s == FREE else (0, None) for s in lp.signs]
    res = linprog(cost, A_ub=np.array(a_ub) if a_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(a_eq) if a_eq else None, b_eq=b_eq or None, bounds=bounds, method="highs")
    return res.status, (sgn * res.fun if res.status == 0 else None)


@settings(max_examples=60)
@given(random_lps())
def test_solver_agrees_with_float_reference_and_certifies(lp):
    sol = solve(lp)
    status, value = _scipy(lp)
    assert {"optimal": 0, "infeasible": 2}[sol.status] == status
    if sol.status == "optimal":
        assert abs(float(sol.objective) - value) < 1e-7
        p = check_point(lp, solution_point(lp, sol, "primal"), "primal")
        d = check_point(lp, solution_point(lp, sol, "dual"), "dual")
        assert p.feasible and d.feasible
        assert p.objective == d.objective == sol.objective
