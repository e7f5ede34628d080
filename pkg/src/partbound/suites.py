"""Batch inequality checks over seeded corpora; each returns a ``SuiteReport``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import comm, instances, lemmas, oracles, query
from .core import DEFAULT_CAPS, Caps, Distribution, InputError, fmt_rational
from .witnesses import check_witness

CHAIN_EPS = (Fraction(0), Fraction(1, 8), Fraction(1, 4))


@dataclass
class SuiteReport:
    name: str
    cases: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, label: str, ok: bool, **info) -> None:
        entry = {"case": label, "ok": ok, **info}
        self.cases.append(entry)
        if not ok:
            self.failures.append(entry)


def _q(v):
    return fmt_rational(v) if isinstance(v, Fraction) else v


def chain(seed: int = 7, count: int = 20, eps_values=CHAIN_EPS, caps: Caps = DEFAULT_CAPS) -> SuiteReport:
    """prt_eps >= srec^z_eps >= rec^z_eps for both z on random total 4x4 Boolean functions."""
    rep = SuiteReport("chain")
    for idx, f in enumerate(instances.random_comm_instances(seed, count)):
        for eps in eps_values:
            prt = comm.compute_comm_bound(f, "prt", eps, caps=caps).value
            for z in (0, 1):
                srec = comm.compute_comm_bound(f, "srec", eps, z, caps=caps).value
                rec = comm.compute_comm_bound(f, "rec", eps, z, caps=caps).value
                rep.record(f"{idx}/eps={eps}/z={z}", prt >= srec >= rec, prt=_q(prt), srec=_q(srec), rec=_q(rec))
    return rep


def lasvegas(seed: int = 7, count: int = 20, caps: Caps = DEFAULT_CAPS) -> SuiteReport:
    """prt_0 >= prt*_LV >= prt_0 / 2, and prt_0 >= prt_LV >= 1."""
    rep = SuiteReport("lasvegas")
    for idx, f in enumerate(instances.random_comm_instances(seed, count)):
        prt0 = comm.compute_comm_bound(f, "prt", 0, caps=caps).value
        star = comm.compute_comm_bound(f, "prt_lv_star", 0, caps=caps).value
        lv = comm.compute_comm_bound(f, "prt_lv", 0, caps=caps).value
        ok = prt0 >= star >= prt0 / 2 and prt0 >= lv >= 1
        rep.record(str(idx), ok, prt0=_q(prt0), lv_star=_q(star), lv=_q(lv))
    return rep


def query_chain(seed: int = 7, count: int = 20, n: int = 4, caps: Caps = DEFAULT_CAPS) -> SuiteReport:
    """2^C(f) <= qprt_0 and qprt_{1/8} >= (1/8) 2^deg_{1/4}(f)."""
    rep = SuiteReport("query-chain")
    eps = Fraction(1, 8)
    for idx, f in enumerate(instances.random_query_instances(seed, count, n)):
        c = query.certificate_complexity(f, caps).C
        q0 = query.compute_query_bound(f, "qprt", 0, caps=caps).value
        q8 = query.compute_query_bound(f, "qprt", eps, caps=caps).value
        d = query.approx_degree(f, 2 * eps, caps).degree
        ok = 2 ** c <= q0 and q8 >= eps * 2 ** d
        rep.record(str(idx), ok, C=c, qprt0=_q(q0), qprt_eighth=_q(q8), approx_degree_quarter=d)
    return rep


def oracle(seed: int = 7, count: int = 20, caps: Caps = DEFAULT_CAPS) -> SuiteReport:
    """2^Dcc >= prt_0 and Dcc >= log2 rank on 4x4 functions; 2^(2 Dquery) >= qprt_0 at n = 4."""
    rep = SuiteReport("oracle")
    for idx, f in enumerate(instances.random_comm_instances(seed, count)):
        d = oracles.deterministic_cc(f).value
        r = oracles.exact_rank(f).value
        prt0 = comm.compute_comm_bound(f, "prt", 0, caps=caps).value
        ok = 2 ** d >= prt0 and (r == 0 or 2 ** d >= r)
        rep.record(f"comm/{idx}", ok, Dcc=d, rank=r, prt0=_q(prt0))
    for idx, f in enumerate(instances.random_query_instances(seed, count)):
        d = oracles.deterministic_query(f).value
        q0 = query.compute_query_bound(f, "qprt", 0, caps=caps).value
        rep.record(f"query/{idx}", 4 ** d >= q0, Dquery=d, qprt0=_q(q0))
    return rep


def duality(seed: int = 7, count: int = 5, caps: Caps = DEFAULT_CAPS) -> SuiteReport:
    """Every bound kind on small random instances: primal and dual objectives agree exactly."""
    rep = SuiteReport("duality")
    eps = Fraction(1, 8)
    for idx, f in enumerate(instances.random_comm_instances(seed, count, 3, 3)):
        for kind, z in (("prt", None), ("rec", 0), ("rec", 1), ("srec", 0), ("srec", 1), ("disc", None),
                        ("sdisc", None), ("prt_lv", None), ("prt_lv_star", None)):
            e = 0 if kind.startswith("prt_lv") else eps
            r = comm.compute_comm_bound(f, kind, e, z, caps=caps)
            lp = comm.build_comm_lp(f, kind, e, z, caps=caps)
            p, d = check_witness(lp, r.primal_witness), check_witness(lp, r.dual_witness)
            ok = p.feasible and d.feasible and p.objective == d.objective == r.value
            rep.record(f"comm/{idx}/{comm.bound_label(kind, z)}", ok, value=_q(r.value))
    for idx, f in enumerate(instances.random_query_instances(seed, count, 3)):
        for kind in ("qprt", "qsrec_relaxed"):
            r = query.compute_query_bound(f, kind, eps, caps=caps)
            p = query.check_query_primal(f, r.primal_witness, kind)
            d = query.check_query_dual(f, r.dual_witness, kind, caps)
            ok = p.feasible and d.feasible and p.objective == d.objective == r.value
            rep.record(f"query/{idx}/{kind}", ok, value=_q(r.value))
    return rep


def lemma_inputs(f, z):
    """Default distribution for a lemma direction: half the mass uniform on f^-1(z), half on the rest."""
    ins = f.preimage(z)
    rest = [i for i in f.defined() if f.cells[i] != z]
    if not ins or not rest:
        return None
    mass = {i: Fraction(1, 2 * len(ins)) for i in ins}
    mass.update({i: Fraction(1, 2 * len(rest)) for i in rest})
    return Distribution(mass)


def lemma_suite(seed: int = 7, count: int = 10, eps=Fraction(1, 8)) -> SuiteReport:
    """Every direction on random 4x4 functions; soft-check failures are listed as excluded."""
    rep = SuiteReport("lemmas")
    for idx, f in enumerate(instances.random_comm_instances(seed, count)):
        for z in (0, 1):
            lam = lemma_inputs(f, z)
            if lam is None:
                rep.excluded.append({"case": f"{idx}/z={z}", "reason": "one-valued function"})
                continue
            for d in ("recsim1", "recsim2", "srecsim1", "srecsim2", "recgeqdisc"):
                _run_lemma(rep, f"{idx}/{d}/z={z}", d, f, eps, z, lam)
        if f.preimage(0) and f.preimage(1):
            uni = Distribution.uniform(f.defined())
            for d in ("sdisceq1", "sdisceq2"):
                _run_lemma(rep, f"{idx}/{d}", d, f, eps, None, uni)
    return rep


def _run_lemma(rep, label, d, f, eps, z, lam):
    try:
        r = lemmas.lemma_transform(d, f, eps, z, lam=lam)
    except InputError as e:
        rep.excluded.append({"case": label, "reason": str(e)})
        return
    if r.flagged:
        rep.excluded.append({"case": label, "reason": "size assumption not met: " + "; ".join(r.flagged)})
    rep.record(label, r.holds, checks=[
        {"name": c.name, "lhs": _q(c.lhs) if c.lhs != math.inf else "inf", "rel": c.rel, "rhs": _q(c.rhs),
         "holds": c.holds, "hard": c.hard} for c in r.checks])


SUITES = {
    "chain": chain,
    "lasvegas": lasvegas,
    "query-chain": query_chain,
    "oracle": oracle,
    "duality": duality,
    "lemmas": lemma_suite,
}
