"""Query-complexity bounds and the constructions that relate them."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Union

from .core import (
    DEFAULT_CAPS,
    Assignment,
    Caps,
    InputError,
    InvariantError,
    QueryInstance,
    ResourceError,
    Witness,
    as_rational,
    enumerate_assignments,
    floor_log2,
    popcount,
)
from .lp import EQ, GE, LE, FREE, FeasibilityReport, LinearProgram, LPBuilder, Violation, solve
from .comm import log2_text
from .witnesses import check_witness, dual_witness, primal_witness

QUERY_KINDS = ("qprt", "qprt_relation", "qsrec_relaxed")


def _check_eps(epsilon) -> Fraction:
    eps = as_rational(epsilon)
    if not 0 <= eps < 1:
        raise InputError(f"epsilon must lie in [0, 1), got {eps}")
    return eps


def _need_function(instance: QueryInstance, what: str) -> None:
    if instance.relation:
        raise InputError(f"{what} needs a function instance, not a relation")


def _need_boolean(instance: QueryInstance, what: str) -> None:
    _need_function(instance, what)
    if instance.m != 1:
        raise InputError(f"{what} needs a Boolean output (m = 1), got m = {instance.m}")


def query_labels(instance: QueryInstance, full_alphabet: bool = False) -> list[int]:
    if full_alphabet:
        return list(range(1 << instance.m))
    return instance.image() or [0]


def _asg_name(label, a: Assignment) -> str:
    return f"w[{label},{a.fixed_mask:x},{a.values:x}]"


def build_query_lp(instance: QueryInstance, kind: str, epsilon=0, full_alphabet: bool = False,
                   caps: Caps = DEFAULT_CAPS) -> LinearProgram:
    """Primal program with objective weights ``2^|A|``; one variable per (label, assignment)."""
    eps = _check_eps(epsilon)
    if kind not in QUERY_KINDS:
        raise InputError(f"unknown query LP kind {kind!r}")
    if (kind == "qprt_relation") != instance.relation:
        raise InputError(f"kind {kind} is incompatible with a {'relation' if instance.relation else 'function'} instance")
    if kind == "qsrec_relaxed":
        _need_boolean(instance, kind)
    asgs = enumerate_assignments(instance.n, caps)
    labels = [1] if kind == "qsrec_relaxed" else query_labels(instance, full_alphabet)
    if len(asgs) * len(labels) > caps.max_lp_vars:
        raise ResourceError(f"{len(asgs) * len(labels)} variables exceed the cap of {caps.max_lp_vars}")
    points_of = [a.points(instance.n) for a in asgs]
    b = LPBuilder("min")
    by_label = {}
    for lab in labels:
        cover = [[] for _ in range(instance.npoints)]
        for a, pts in zip(asgs, points_of):
            j = b.var(_asg_name(lab, a), 1 << a.size, tag=(lab, a))
            for x in pts:
                cover[x].append(j)
        by_label[lab] = cover
    table = instance.table
    if kind == "qsrec_relaxed":
        cover = by_label[1]
        ones = instance.preimage(1)
        for x in ones:
            b.add({j: 1 for j in cover[x]}, GE, 1 - eps, f"mu[{x}]", ("mu", x, 1))
        for x in ones:
            b.add({j: 1 for j in cover[x]}, LE, 1, f"phi[{x}]", ("phi", x, 1))
        for x in instance.preimage(0):
            b.add({j: 1 for j in cover[x]}, LE, eps, f"mu[{x}]", ("mu", x, -1))
        return b.build()
    for x in instance.defined():
        allowed = table[x] if instance.relation else (table[x],)
        b.add({j: 1 for lab in allowed if lab in by_label for j in by_label[lab][x]},
              GE, 1 - eps, f"mu[{x}]", ("mu", x, 1))
    for x in range(instance.npoints):
        b.add({j: 1 for lab in labels for j in by_label[lab][x]}, EQ, 1, f"phi[{x}]", ("phi", x, 1))
    return b.build()


@dataclass
class QueryBoundReport:
    kind: str
    epsilon: Fraction
    value: Fraction
    primal_witness: Witness
    dual_witness: Witness
    lp_sizes: tuple
    labels: list
    pivots: int = 0

    @property
    def log2_value(self) -> str:
        return log2_text(self.value)


def compute_query_bound(instance: QueryInstance, kind: str, epsilon=0, full_alphabet: bool = False,
                        caps: Caps = DEFAULT_CAPS) -> QueryBoundReport:
    eps = _check_eps(epsilon)
    lp = build_query_lp(instance, kind, eps, full_alphabet, caps)
    sol = solve(lp, caps)
    if sol.status != "optimal":
        raise InvariantError(f"{kind} program is {sol.status}; it is always feasible and bounded")
    primal = primal_witness(lp, sol, kind, eps)
    dual = dual_witness(lp, sol, kind, eps)
    for w in (primal, dual):
        rep = check_witness(lp, w)
        if not rep.feasible or rep.objective != sol.objective:
            raise InvariantError(f"{w.kind} witness of {kind} fails its own check: {rep.violations[:1]}")
    labels = sorted({lab for lab, _ in lp.var_tags})
    return QueryBoundReport(kind, eps, sol.objective, primal, dual, (lp.nvars, lp.ncons), labels, sol.pivots)


# --------------------------------------------------------------------------
# structural witness checks (sparse; no program is built)


def _accepts(instance: QueryInstance, x: int, z: int) -> bool:
    e = instance.table[x]
    if e is None:
        return False
    return z in e if instance.relation else z == e


def check_query_primal(instance: QueryInstance, witness: Witness, kind: str = "qprt") -> FeasibilityReport:
    eps = witness.epsilon
    first = [Fraction(0)] * instance.npoints
    total = [Fraction(0)] * instance.npoints
    objective = Fraction(0)
    for (label, a), v in witness.weights.items():
        if not isinstance(a, Assignment):
            raise InputError("query primal entries must be assignments")
        if kind == "qsrec_relaxed" and label != 1:
            raise InputError("the one-sided program has only label 1")
        if not 0 <= label < 1 << instance.m:
            raise InputError(f"label {label} outside the output range")
        objective += v * (1 << a.size)
        for x in a.points(instance.n):
            total[x] += v
            if kind == "qsrec_relaxed" or _accepts(instance, x, label):
                first[x] += v
    report = FeasibilityReport("primal", objective, checked=instance.npoints)
    for x in range(instance.npoints):
        e = instance.table[x]
        if kind == "qsrec_relaxed":
            if e == 1:
                if first[x] < 1 - eps:
                    report.violations.append(Violation(f"mu[{x}]", first[x] - (1 - eps)))
                if first[x] > 1:
                    report.violations.append(Violation(f"phi[{x}]", 1 - first[x]))
            elif e == 0 and first[x] > eps:
                report.violations.append(Violation(f"mu[{x}]", eps - first[x]))
            continue
        if e is not None and first[x] < 1 - eps:
            report.violations.append(Violation(f"mu[{x}]", first[x] - (1 - eps)))
        if total[x] != 1:
            report.violations.append(Violation(f"phi[{x}]", 1 - total[x]))
    return report


def check_query_dual(instance: QueryInstance, witness: Witness, kind: str = "qprt",
                     caps: Caps = DEFAULT_CAPS) -> FeasibilityReport:
    """Check every dual constraint (all assignments, all image labels) over the sparse support.

    For a nonempty image, constraints of labels outside the image are implied
    by any image label because the mu are nonnegative.
    """
    eps = witness.epsilon
    mu, phi = dict(witness.mu), dict(witness.phi)
    objective = Fraction(0)
    report = FeasibilityReport("dual", Fraction(0))
    for x, v in mu.items():
        if not 0 <= x < instance.npoints or instance.table[x] is None:
            raise InputError(f"mu at {x}, which is not a defined point")
        if v < 0:
            report.violations.append(Violation(f"sign mu[{x}]", v))
    for x, v in phi.items():
        if not 0 <= x < instance.npoints:
            raise InputError(f"phi at {x}, outside the cube")
        if kind == "qsrec_relaxed":
            if instance.table[x] != 1:
                raise InputError(f"phi at {x}, which is not a 1-input")
            if v > 0:
                report.violations.append(Violation(f"sign phi[{x}]", -v))
    if kind == "qsrec_relaxed":
        _need_boolean(instance, kind)
        coeff = {x: (v if instance.table[x] == 1 else -v) for x, v in mu.items()}
        for x, v in phi.items():
            coeff[x] = coeff.get(x, Fraction(0)) + v
        objective = sum(((1 - eps) * v if instance.table[x] == 1 else -eps * v for x, v in mu.items()), Fraction(0))
        objective += sum(phi.values(), Fraction(0))
        rows = [(None, coeff)]
    else:
        objective = (1 - eps) * sum(mu.values(), Fraction(0)) + sum(phi.values(), Fraction(0))
        rows = []
        for z in query_labels(instance):
            coeff = dict(phi)
            for x, v in mu.items():
                if _accepts(instance, x, z):
                    coeff[x] = coeff.get(x, Fraction(0)) + v
            rows.append((z, coeff))
    report.objective = objective
    support = sorted({x for _, c in rows for x in c})
    checked = 0
    for a in enumerate_assignments(instance.n, caps):
        inside = [x for x in support if a.contains(x)]
        if not inside:
            checked += len(rows)
            continue
        cap = 1 << a.size
        for z, coeff in rows:
            checked += 1
            lhs = sum((coeff.get(x, 0) for x in inside), Fraction(0))
            if lhs > cap:
                where = f"A=({a.fixed_mask:x},{a.values:x})" + ("" if z is None else f" z={z}")
                report.violations.append(Violation(where, cap - lhs))
    report.checked = checked
    return report


# --------------------------------------------------------------------------
# combinatorial measures


def subcube_status(instance: QueryInstance, caps: Caps = DEFAULT_CAPS) -> dict:
    """Map (fixed, values) to the single defined value on that subcube, None if empty, or -1 if mixed."""
    _need_function(instance, "subcube status")
    n = instance.n
    if 3 ** n > caps.max_regions:
        raise ResourceError(f"3^{n} subcubes exceed the cap of {caps.max_regions}")
    full = (1 << n) - 1
    status = {}
    for x in range(1 << n):
        status[(full, x)] = instance.table[x]
    # fewer fixed variables come later; split on the lowest free variable
    for a in sorted(enumerate_assignments(n, caps), key=lambda a: -a.size):
        key = (a.fixed_mask, a.values)
        if key in status:
            continue
        free = ~a.fixed_mask & full
        i = free & -free
        s0 = status[(a.fixed_mask | i, a.values)]
        s1 = status[(a.fixed_mask | i, a.values | i)]
        if s0 is None:
            status[key] = s1
        elif s1 is None or s0 == s1:
            status[key] = s0
        else:
            status[key] = -1
    return status


@dataclass
class CertificateResult:
    C: int
    per_z: dict
    per_x: dict
    certificates: dict  # x -> a smallest certificate consistent with x


def certificate_complexity(instance: QueryInstance, caps: Caps = DEFAULT_CAPS) -> CertificateResult:
    status = subcube_status(instance, caps)
    n = instance.n
    masks = sorted(range(1 << n), key=lambda m: (popcount(m), m))
    per_x, certs = {}, {}
    for x in instance.defined():
        for m in masks:
            if status[(m, x & m)] == instance.table[x]:
                per_x[x] = popcount(m)
                certs[x] = Assignment(m, x & m)
                break
    per_z = {}
    for x, c in per_x.items():
        z = instance.table[x]
        per_z[z] = max(per_z.get(z, 0), c)
    return CertificateResult(max(per_x.values(), default=0), per_z, per_x, certs)


@dataclass(frozen=True)
class BlockFamily:
    x: int
    blocks: tuple  # disjoint bitmasks

    def validate(self, instance: QueryInstance) -> None:
        fx = instance.table[self.x]
        if fx is None:
            raise InputError(f"base point {self.x} is undefined")
        seen = 0
        for blk in self.blocks:
            if blk <= 0 or blk & seen:
                raise InputError(f"blocks must be nonempty and disjoint (block {blk:x})")
            seen |= blk
            fy = instance.table[self.x ^ blk]
            if fy is None or fy == fx:
                raise InputError(f"block {blk:x} is not sensitive at {self.x}")

    @property
    def size(self) -> int:
        return len(self.blocks)


@dataclass
class SensitivityResult:
    s: int
    bs: int
    s_point: Optional[int]
    bs_point: Optional[int]
    family: Optional[BlockFamily]


def _max_packing(blocks: list[int], universe: int) -> list[int]:
    """Largest family of pairwise disjoint blocks, by branching on the lowest available element."""
    memo = {}

    def best(avail: int) -> tuple:
        if avail in memo:
            return memo[avail]
        usable = [b for b in blocks if b & avail == b]
        if not usable:
            memo[avail] = ()
            return ()
        low = avail & -avail
        result = best(avail & ~low)
        for b in usable:
            if b & low:
                cand = (b,) + best(avail & ~b)
                if len(cand) > len(result):
                    result = cand
        memo[avail] = result
        return result

    return list(best(universe))


def sensitivity_and_block_sensitivity(instance: QueryInstance, max_n: int = 12) -> SensitivityResult:
    _need_function(instance, "block sensitivity")
    n = instance.n
    if n > max_n:
        raise ResourceError(f"exact block sensitivity is capped at n = {max_n}")
    table = instance.table
    full = (1 << n) - 1
    s_best, s_pt = 0, None
    bs_best, bs_pt, fam = 0, None, None
    by_size = sorted(range(1, 1 << n), key=popcount)
    for x in instance.defined():
        fx = table[x]
        s_x = sum(1 for i in range(n) if table[x ^ (1 << i)] not in (None, fx))
        if s_pt is None or s_x > s_best:
            s_best, s_pt = s_x, x
        minimal = []
        for blk in by_size:
            if table[x ^ blk] in (None, fx):
                continue
            if any(m & blk == m for m in minimal):
                continue
            minimal.append(blk)
        packing = _max_packing(minimal, full)
        if fam is None or len(packing) > bs_best:
            bs_best, bs_pt, fam = len(packing), x, BlockFamily(x, tuple(sorted(packing)))
    return SensitivityResult(s_best, bs_best, s_pt, bs_pt, fam)


# --------------------------------------------------------------------------
# dual witness from block sensitivity


@dataclass
class BsWitnessReport:
    witness: Witness
    epsilon: Fraction  # the partition-bound error, a quarter of the input epsilon
    b: int
    exponent: int  # floor(eps * b), the power of two actually used
    objective: Fraction  # certified
    formula: str  # eps * 2^(eps*b - 2) with the real exponent
    formula_value: float
    report: FeasibilityReport


def bs_dual_witness(instance: QueryInstance, family: BlockFamily, epsilon, caps: Caps = DEFAULT_CAPS) -> BsWitnessReport:
    """Dual for the partition bound at epsilon/4 built on one block-sensitive point.

    The base point gets mu = P/2, phi = -(1-eps)P/2 and each flipped point
    mu = -phi = P/(2b), where P = 2^floor(eps*b) replaces 2^(eps*b) so every
    entry is rational.  Objective eps*P/4.
    """
    _need_function(instance, "block-sensitivity witness")
    eps = as_rational(epsilon)
    if not 0 < eps < Fraction(1, 2):
        raise InputError(f"epsilon must lie in (0, 1/2), got {eps}")
    family.validate(instance)
    b = family.size
    e = int(eps * b)  # floor for nonnegative rationals
    big = Fraction(2) ** e
    mu, phi = {}, {}
    x = family.x
    mu[x] = big / 2
    phi[x] = -(1 - eps) * big / 2
    for blk in family.blocks:
        y = x ^ blk
        mu[y] = big / (2 * b)
        phi[y] = -big / (2 * b)
    kind = "qprt"
    w = Witness("dual", kind, eps / 4, mu=mu, phi=phi)
    rep = check_query_dual(instance, w, kind, caps)
    if not rep.feasible:
        raise InvariantError(f"block-sensitivity dual is infeasible at {rep.violations[0]}")
    expo = float(eps * b - 2)
    return BsWitnessReport(w, eps / 4, b, e, rep.objective, f"{eps}*2^({eps * b}-2)",
                           float(eps) * 2.0 ** expo, rep)


# --------------------------------------------------------------------------
# approximate degree


def monomial_masks(n: int, d: int) -> list[int]:
    out = []
    for k in range(d + 1):
        for combo in combinations(range(n), k):
            out.append(sum(1 << i for i in combo))
    return out


def eval_multilinear(coeffs: dict, x: int) -> Fraction:
    return sum((c for s, c in coeffs.items() if s & x == s), Fraction(0))


def poly_degree(coeffs: dict) -> int:
    return max((popcount(s) for s, c in coeffs.items() if c), default=0)


@dataclass
class ApproxDegreeResult:
    degree: int
    coefficients: dict  # monomial mask -> coefficient
    strict: bool  # also feasible with strict inequalities


def _degree_lp(instance: QueryInstance, eps: Fraction, d: int) -> tuple[LinearProgram, list[int]]:
    masks = monomial_masks(instance.n, d)
    b = LPBuilder("max")
    for s in masks:
        b.var(f"c[{s:x}]", 0, FREE)
    slack = b.var("s", 1)
    b.add({slack: 1}, LE, 1, "s_cap")
    for x in range(instance.npoints):
        row = {j: 1 for j, s in enumerate(masks) if s & x == s}
        fx = instance.table[x]
        b.add(row, GE, 0, f"lo[{x}]")
        b.add(row, LE, 1, f"hi[{x}]")
        if fx is not None:
            lo = dict(row)
            lo[slack] = -1
            b.add(lo, GE, fx - eps, f"lo_f[{x}]")
            hi = dict(row)
            hi[slack] = 1
            b.add(hi, LE, fx + eps, f"hi_f[{x}]")
    return b.build(), masks


def approx_degree(instance: QueryInstance, epsilon, caps: Caps = DEFAULT_CAPS) -> ApproxDegreeResult:
    """Smallest d with a degree-d multilinear p, 0 <= p <= 1, |p - f| <= eps on defined points.

    The margin variable s measures how far inside the band p can sit; a
    positive optimum means the strict version holds as well.
    """
    _need_boolean(instance, "approximate degree")
    eps = as_rational(epsilon)
    if eps < 0:
        raise InputError("epsilon must be nonnegative")
    for d in range(instance.n + 1):
        lp, masks = _degree_lp(instance, eps, d)
        sol = solve(lp, caps)
        if sol.status == "optimal":
            coeffs = {s: v for s, v in zip(masks, sol.primal_values) if v}
            return ApproxDegreeResult(d, coeffs, sol.objective > 0)
    raise InvariantError("no polynomial of degree n fits, which cannot happen for 0 <= f <= 1")


# --------------------------------------------------------------------------
# constructions from a partition-bound primal


def _primal_objective(witness: Witness) -> Fraction:
    return sum((v * (1 << a.size) for (_, a), v in witness.weights.items()), Fraction(0))


def _require_feasible(instance: QueryInstance, witness: Witness) -> Fraction:
    rep = check_query_primal(instance, witness, "qprt_relation" if instance.relation else "qprt")
    if not rep.feasible:
        raise InputError(f"primal is infeasible at {rep.violations[0]}")
    return rep.objective


def small_size_limit(alpha: Fraction, eps: Fraction) -> int:
    """Largest size kept in the truncated family: floor(log2(alpha/eps))."""
    return floor_log2(alpha / eps)


def expand_subcube(a: Assignment) -> dict:
    """Multilinear coefficients of the indicator of ``a``."""
    ones = a.values
    zeros = a.fixed_mask & ~a.values
    out = {}
    sub = zeros
    while True:
        sign = -1 if popcount(sub) % 2 else 1
        out[ones | sub] = out.get(ones | sub, 0) + sign
        if sub == 0:
            break
        sub = (sub - 1) & zeros
    return out


@dataclass
class PolynomialReport:
    coefficients: dict
    degree: int
    degree_limit: int
    alpha: Fraction
    values: dict  # x -> p(x)
    ok: bool


def polynomial_from_qprt_primal(instance: QueryInstance, primal: Witness, epsilon=None) -> PolynomialReport:
    _need_boolean(instance, "polynomial construction")
    eps = primal.epsilon if epsilon is None else as_rational(epsilon)
    if eps <= 0:
        raise InputError("the truncation needs epsilon > 0")
    alpha = _require_feasible(instance, Witness("primal", primal.bound, eps, weights=primal.weights))
    k = small_size_limit(alpha, eps)
    coeffs: dict = {}
    for (z, a), w in primal.weights.items():
        if z != 1 or a.size > k:
            continue
        for s, c in expand_subcube(a).items():
            coeffs[s] = coeffs.get(s, Fraction(0)) + w * c
    coeffs = {s: c for s, c in coeffs.items() if c}
    values = {x: eval_multilinear(coeffs, x) for x in range(instance.npoints)}
    for x, p in values.items():
        fx = instance.table[x]
        bad = not 0 <= p <= 1 or (fx == 1 and p < 1 - 2 * eps) or (fx == 0 and p > 2 * eps)
        if bad:
            raise InvariantError(f"truncated polynomial misses the band at x={x}: p={p}")
    deg = poly_degree(coeffs)
    if deg > k:
        raise InvariantError(f"degree {deg} exceeds floor(log2(alpha/eps)) = {k}")
    return PolynomialReport(coeffs, deg, k, alpha, values, True)


@dataclass
class VerifierReport:
    x: int
    distribution: dict  # Assignment -> probability
    acceptance: dict  # y -> probability
    max_queries: int
    query_limit: int
    soundness: Fraction  # 2eps/(1-2eps)
    worst_other: Fraction  # max acceptance over y with a different value
    ok: bool


def verifier_from_qprt_primal(instance: QueryInstance, primal: Witness, x: int, epsilon=None) -> VerifierReport:
    """Pick a small assignment containing x in proportion to its weight, accept iff the input lies in it."""
    _need_function(instance, "verifier construction")
    eps = primal.epsilon if epsilon is None else as_rational(epsilon)
    if not 0 < eps < Fraction(1, 2):
        raise InputError("the verifier needs 0 < epsilon < 1/2")
    fx = instance.table[x] if 0 <= x < instance.npoints else None
    if fx is None:
        raise InputError(f"x={x} is not a defined point")
    alpha = _require_feasible(instance, Witness("primal", primal.bound, eps, weights=primal.weights))
    k = small_size_limit(alpha, eps)
    chosen = {a: w for (z, a), w in primal.weights.items() if z == fx and a.size <= k and a.contains(x)}
    alpha_x = sum(chosen.values(), Fraction(0))
    if alpha_x == 0:
        raise InputError("no small assignment consistent with x carries weight")
    dist = {a: w / alpha_x for a, w in sorted(chosen.items())}
    acc = {y: sum((p for a, p in dist.items() if a.contains(y)), Fraction(0)) for y in range(instance.npoints)}
    sound = 2 * eps / (1 - 2 * eps)
    others = [acc[y] for y in instance.defined() if instance.table[y] != fx]
    worst = max(others, default=Fraction(0))
    maxq = max(a.size for a in dist)
    ok = acc[x] == 1 and worst <= sound and maxq <= k
    return VerifierReport(x, dist, acc, maxq, k, sound, worst, ok)


# --------------------------------------------------------------------------
# classical adversary


@dataclass
class CadvResult:
    value: Fraction
    t: Fraction
    distributions: dict  # x -> tuple of n probabilities
    pairs: int


def cadv(instance: QueryInstance, caps: Caps = DEFAULT_CAPS) -> CadvResult:
    """min over per-input distributions of the max inverse overlap, as one LP maximizing the overlap t."""
    _need_function(instance, "classical adversary")
    n = instance.n
    table = instance.table
    pts = instance.defined()
    pairs = [(x, y) for i, x in enumerate(pts) for y in pts[i + 1:] if table[x] != table[y]]
    if not pairs:
        warnings.warn("no pair of inputs with different outputs; classical adversary is 0", stacklevel=2)
        return CadvResult(Fraction(0), Fraction(0), {}, 0)
    used = sorted({x for pr in pairs for x in pr})
    nvars = len(used) * n + sum(popcount(x ^ y) for x, y in pairs) + 1
    if nvars > caps.max_lp_vars:
        raise ResourceError(f"{nvars} variables exceed the cap of {caps.max_lp_vars}")
    b = LPBuilder("max")
    t = b.var("t", 1)
    p = {(x, i): b.var(f"p[{x},{i}]") for x in used for i in range(n)}
    for x in used:
        b.add({p[(x, i)]: 1 for i in range(n)}, EQ, 1, f"dist[{x}]")
    for x, y in pairs:
        row = {t: -1}
        for i in range(n):
            if (x ^ y) >> i & 1:
                m = b.var(f"m[{x},{y},{i}]")
                row[m] = 1
                b.add({m: 1, p[(x, i)]: -1}, LE, 0, f"mx[{x},{y},{i}]")
                b.add({m: 1, p[(y, i)]: -1}, LE, 0, f"my[{x},{y},{i}]")
        b.add(row, GE, 0, f"pair[{x},{y}]")
    lp = b.build()
    sol = solve(lp, caps)
    if sol.status != "optimal":
        raise InvariantError(f"adversary program is {sol.status}")
    vals = sol.primal_values
    dists = {x: tuple(vals[p[(x, i)]] for i in range(n)) for x in used}
    return CadvResult(1 / sol.objective, sol.objective, dists, len(pairs))


@dataclass
class AdversaryReport:
    distributions: dict  # x -> tuple of n probabilities (renormalized without the empty assignment)
    q: dict  # x -> tuple of n values q_x(i)
    worst_pair: Optional[tuple]
    worst_overlap: Optional[Fraction]
    threshold: Fraction  # 1 - 4 eps
    k: int
    empty_mass: dict  # x -> probability the empty assignment would have taken
    ok: bool


def adversary_distributions_from_qprt_primal(instance: QueryInstance, primal: Witness, epsilon=None) -> AdversaryReport:
    """Per-input query distributions derived from the small assignments of a primal.

    q(x, A) is proportional to the weight of A at label f(x) over small A
    containing x; q_x(i) totals q(x, A) over A fixing i.  p_x draws A from q
    and then a fixed variable of A uniformly; the empty assignment fixes
    nothing, so its share is dropped and p_x renormalized.
    """
    _need_function(instance, "adversary construction")
    eps = primal.epsilon if epsilon is None else as_rational(epsilon)
    if not 0 < eps < Fraction(1, 4):
        raise InputError("the adversary construction needs 0 < epsilon < 1/4")
    alpha = _require_feasible(instance, Witness("primal", primal.bound, eps, weights=primal.weights))
    k = small_size_limit(alpha, eps)
    n = instance.n
    table = instance.table
    qs, ps, empty = {}, {}, {}
    for x in instance.defined():
        chosen = {a: w for (z, a), w in primal.weights.items() if z == table[x] and a.size <= k and a.contains(x)}
        tot = sum(chosen.values(), Fraction(0))
        if tot == 0:
            raise InputError(f"no small assignment consistent with x={x} carries weight")
        qx = [Fraction(0)] * n
        px = [Fraction(0)] * n
        e_mass = Fraction(0)
        for a, w in chosen.items():
            qa = w / tot
            if a.size == 0:
                e_mass += qa
                continue
            for i in range(n):
                if a.fixed_mask >> i & 1:
                    qx[i] += qa
                    px[i] += qa / a.size
        if e_mass < 1:
            px = [v / (1 - e_mass) for v in px]
        qs[x], ps[x], empty[x] = tuple(qx), tuple(px), e_mass
    threshold = 1 - 4 * eps
    worst, worst_pair = None, None
    pts = instance.defined()
    for i, x in enumerate(pts):
        for y in pts[i + 1:]:
            if table[x] == table[y]:
                continue
            overlap = sum((min(qs[x][j], qs[y][j]) for j in range(n) if (x ^ y) >> j & 1), Fraction(0))
            if worst is None or overlap < worst:
                worst, worst_pair = overlap, (x, y)
    ok = worst is None or worst >= threshold
    if not ok:
        raise InvariantError(f"pair {worst_pair} overlaps only {worst} < {threshold}")
    return AdversaryReport(ps, qs, worst_pair, worst, threshold, k, empty, ok)


# --------------------------------------------------------------------------
# decision trees


@dataclass(frozen=True)
class TreeLeaf:
    z: int


@dataclass(frozen=True)
class TreeNode:
    """Query variable ``var`` (0-based); ``left`` handles value 0, ``right`` value 1."""

    var: int
    left: "DecisionTree"
    right: "DecisionTree"


DecisionTree = Union[TreeLeaf, TreeNode]


def tree_depth(tree: DecisionTree) -> int:
    if isinstance(tree, TreeLeaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def tree_leaves(n: int, tree: DecisionTree) -> list[tuple[int, Assignment]]:
    out = []

    def walk(node, fixed, values):
        if isinstance(node, TreeLeaf):
            out.append((node.z, Assignment(fixed, values)))
            return
        if not 0 <= node.var < n:
            raise InputError(f"query of variable {node.var + 1} outside 1..{n}")
        bit = 1 << node.var
        if fixed & bit:
            raise InputError(f"variable {node.var + 1} queried twice on one path")
        walk(node.left, fixed | bit, values)
        walk(node.right, fixed | bit, values | bit)

    walk(tree, 0, 0)
    return out


@dataclass
class TreePrimal:
    witness: Witness
    error: Fraction
    objective: Fraction
    depth: int
    report: FeasibilityReport


def decision_tree_to_primal(instance: QueryInstance, tree: DecisionTree) -> TreePrimal:
    """Weight 1 on each leaf's path assignment; objective sums 2^(leaf depth)."""
    leaves = tree_leaves(instance.n, tree)
    weights = {}
    error = Fraction(0)
    for z, a in leaves:
        if not 0 <= z < 1 << instance.m:
            raise InputError(f"leaf output {z} outside the output range")
        weights[(z, a)] = Fraction(1)
        if any(instance.table[x] is not None and not _accepts(instance, x, z) for x in a.points(instance.n)):
            error = Fraction(1)
    kind = "qprt_relation" if instance.relation else "qprt"
    w = Witness("primal", kind, error, weights=weights)
    rep = check_query_primal(instance, w, kind)
    if not rep.feasible:
        raise InputError("tree leaves do not partition the cube")
    return TreePrimal(w, error, rep.objective, tree_depth(tree), rep)
