"""One test per acceptance criterion; each prints and records a pass/fail line.

All comparisons are exact rationals unless a runtime limit is stated.
"""

import math
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE
from partbound import comm, instances, oracles, query, suites
from partbound.core import CommInstance, QueryInstance
from partbound.witnesses import check_witness

EQ4 = instances.make_standard("EQ_4")
CORPUS_SEED = 7


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
    ACCEPTANCE[number] = line
    print(line)
    assert ok, line


def _comm_case(f, kind, eps, z):
    r = comm.compute_comm_bound(f, kind, eps, z)
    lp = comm.build_comm_lp(f, kind, eps, z)
    p, d = check_witness(lp, r.primal_witness), check_witness(lp, r.dual_witness)
    return p.feasible and d.feasible and p.objective == d.objective == r.value


def _query_case(f, kind, eps):
    r = query.compute_query_bound(f, kind, eps)
    p = query.check_query_primal(f, r.primal_witness, kind)
    d = query.check_query_dual(f, r.dual_witness, kind)
    return p.feasible and d.feasible and p.objective == d.objective == r.value


def test_criterion_01_strong_duality():
    start = time.perf_counter()
    results = []
    eps = Fraction(1, 8)
    comm_kinds = (("prt", None), ("rec", 0), ("rec", 1), ("srec", 0), ("srec", 1), ("disc", None),
                  ("sdisc", None), ("prt_lv", None), ("prt_lv_star", None))
    for f in instances.random_comm_instances(CORPUS_SEED, 5):
        for kind, z in comm_kinds:
            results.append(_comm_case(f, kind, 0 if kind.startswith("prt_lv") else eps, z))
    rel = CommInstance(3, 3, 3, tuple(frozenset({(i + j) % 3, (i * j) % 3}) for i in range(3) for j in range(3)), True)
    results.append(_comm_case(rel, "prt_relation", eps, None))
    for f in instances.random_query_instances(CORPUS_SEED, 5):
        for kind in ("qprt", "qsrec_relaxed"):
            results.append(_query_case(f, kind, eps))
    qrel = QueryInstance(3, 2, tuple(frozenset({x & 3, (x >> 1) & 3}) for x in range(8)), True)
    results.append(_query_case(qrel, "qprt_relation", eps))
    elapsed = time.perf_counter() - start
    ok = len(results) >= 50 and all(results) and elapsed < 120
    record(1, "strong duality", ok, f"{sum(results)}/{len(results)} LPs with equal objectives, {elapsed:.1f}s < 120s")


def test_criterion_02_chain_inequalities():
    rep = suites.chain(CORPUS_SEED, 20)
    record(2, "prt >= srec >= rec chain", rep.passed and len(rep.cases) == 120,
           f"{len(rep.cases) - len(rep.failures)}/{len(rep.cases)} cases, 20 functions x 3 eps x 2 z")


def test_criterion_03_fooling_sandwich():
    fool = check_witness(comm.build_comm_lp(EQ4, "prt"), comm.fooling_set_dual(EQ4, [0, 5, 10, 15], 1))
    d = oracles.deterministic_cc(EQ4)
    tree = comm.protocol_to_primal(EQ4, d.structure)
    value = comm.compute_comm_bound(EQ4, "prt").value
    ok = (fool.feasible and fool.objective == 4 and d.value == 3 and tree.report.feasible and tree.error == 0
          and tree.objective <= 8 and 4 <= value <= 8)
    record(3, "fooling-set sandwich on EQ_4", ok,
           f"fooling dual {fool.objective} <= prt_0 = {value} <= protocol primal {tree.objective} <= 2^{d.value}")


def test_criterion_04_las_vegas_bracket():
    rep = suites.lasvegas(CORPUS_SEED, 20)
    record(4, "Las Vegas bracket", rep.passed and len(rep.cases) == 20,
           f"{len(rep.cases) - len(rep.failures)}/20 functions with prt_0 >= prt*_LV >= prt_0/2")


def test_criterion_05_tribes():
    eps = Fraction(1, 32)
    w = instances.tribes_dual_witness(4, eps)
    t4 = instances.make_tribes(4)
    relaxed = query.compute_query_bound(t4, "qsrec_relaxed", eps).value
    qprt = query.compute_query_bound(t4, "qprt", eps).value
    scaled = Fraction(2) ** math.floor((Fraction(1, 4) - 4 * eps) * 4) * (Fraction(1, 12) - eps)
    ok4 = (w.report.feasible and w.report.checked == 3 ** 4 and w.objective == scaled
           and relaxed >= w.objective and qprt >= relaxed)
    start = time.perf_counter()
    w9 = instances.tribes_dual_witness(9, eps)
    elapsed = time.perf_counter() - start
    ok9 = w9.report.feasible and w9.report.checked == 3 ** 9 and elapsed < 600
    record(5, "tribes dual witness", ok4 and ok9,
           f"n=4: objective {w.objective} <= qsrec_relaxed {relaxed} <= qprt {qprt}; "
           f"n=9: {w9.report.checked} assignments in {elapsed:.1f}s < 600s")


def test_criterion_06_lne():
    w = instances.lne_primal_witness(2, full_grid=True)
    rank = oracles.exact_rank(instances.make_lne(2)).value
    ok = (w.report.feasible and w.full_grid and w.checked_cells == 256 and w.total == 36
          and w.total <= w.bound == 128 and rank == 16)
    record(6, "LNE primal witness and rank", ok,
           f"mode full grid, {w.checked_cells} cells feasible, total {w.total} <= {w.bound}, rank {rank}")


def test_criterion_07_query_chain():
    rep = suites.query_chain(CORPUS_SEED, 20)
    record(7, "query chain", rep.passed and len(rep.cases) == 20,
           f"{len(rep.cases) - len(rep.failures)}/20 functions with 2^C <= qprt_0 and qprt_1/8 >= 2^deg/8")


def test_criterion_08_verifier():
    eps = Fraction(1, 8)
    worst, ok = Fraction(0), True
    for name in ("OR_2", "OR_4"):
        f = instances.make_standard(name)
        primal = query.compute_query_bound(f, "qprt", eps).primal_witness
        for x in f.defined():
            v = query.verifier_from_qprt_primal(f, primal, x)
            ok = ok and v.ok and v.acceptance[x] == 1 and v.soundness == Fraction(1, 3)
            worst = max(worst, v.worst_other)
    record(8, "verifier construction", ok and worst <= Fraction(1, 3),
           f"every x accepted with probability 1, worst other-value acceptance {worst} <= 1/3")


def test_criterion_09_adversary():
    values = {n: query.cadv(instances.make_standard(f"OR_{n}")).value for n in (2, 3, 4)}
    eps = Fraction(1, 16)
    worst = {}
    for name in ("OR_2", "XOR_2"):
        f = instances.make_standard(name)
        rep = query.adversary_distributions_from_qprt_primal(f, query.compute_query_bound(f, "qprt", eps).primal_witness)
        worst[name] = rep.worst_overlap if rep.ok else None
    ok = values == {2: 2, 3: 3, 4: 4} and all(v is not None and v >= 1 - 4 * eps for v in worst.values())
    record(9, "adversary constructions", ok,
           f"cadv(OR_n) = {[str(v) for v in values.values()]}; worst overlaps "
           f"{ {k: str(v) for k, v in worst.items()} } >= {1 - 4 * eps}")


def test_criterion_10_bs_witness():
    details, ok = [], True
    for n, eps in ((4, Fraction(1, 4)), (9, Fraction(1, 3))):
        f = instances.make_standard(f"OR_{n}")
        fam = query.sensitivity_and_block_sensitivity(f).family
        rep = query.bs_dual_witness(f, fam, eps)
        expected = eps * Fraction(2) ** math.floor(eps * n) / 4
        ok = ok and fam.size == n and rep.report.feasible and rep.epsilon == eps / 4 and rep.objective == expected
        details.append(f"OR_{n}: b={rep.b}, objective {rep.objective} at eps {rep.epsilon}")
    record(10, "block-sensitivity witness", ok, "; ".join(details))


def test_criterion_11_lemmas():
    rep = suites.lemma_suite(CORPUS_SEED, 10)
    record(11, "lemma transformations", rep.passed and rep.cases,
           f"{len(rep.cases) - len(rep.failures)}/{len(rep.cases)} directions hold, {len(rep.excluded)} excluded and listed")


def test_criterion_12_oracle_consistency():
    rep = suites.oracle(CORPUS_SEED, 20)
    record(12, "oracle consistency", rep.passed and len(rep.cases) == 40,
           f"{len(rep.cases) - len(rep.failures)}/40 cases with 2^Dcc >= prt_0, Dcc >= log rank, 4^Dquery >= qprt_0")
