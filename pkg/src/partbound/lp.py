"""Exact rational linear programming.

Two-phase revised simplex with Bland's smallest-index rule, an explicit
dense basis inverse, and exact ``gmpy2.mpq`` arithmetic.  Every optimal
solution carries a dual vector that is re-checked against the program before
it is returned, so an ``optimal`` status is a certificate, not a claim.

Dual sign convention (``y`` indexed like the constraints):

* ``min c.x``: ``y_i >= 0`` on ``>=`` rows, ``y_i <= 0`` on ``<=`` rows,
  ``A^T y <= c`` on nonnegative variables, ``= c`` on free ones;
* ``max c.x``: the mirror image (``y_i >= 0`` on ``<=`` rows, ``A^T y >= c``).

In both cases strong duality reads ``c.x == b.y``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from gmpy2 import mpq

from .core import DEFAULT_CAPS, Caps, InputError, InvariantError, ResourceError, as_rational, fmt_rational

LE, EQ, GE = "<=", "=", ">="
NONNEG, FREE = "nonnegative", "free"


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[int, Fraction]
    rel: str
    rhs: Fraction
    name: str = ""


@dataclass(frozen=True)
class LinearProgram:
    """Sparse exact LP.  ``var_tags``/``con_tags`` carry builder metadata."""

    names: tuple
    signs: tuple
    sense: str
    objective: Mapping[int, Fraction]
    constraints: tuple
    var_tags: tuple = ()
    con_tags: tuple = ()

    def __post_init__(self):
        nvars = len(self.names)
        if len(self.signs) != nvars:
            raise InputError("one sign per variable")
        if any(s not in (NONNEG, FREE) for s in self.signs):
            raise InputError("variable sign must be nonnegative or free")
        if self.sense not in ("min", "max"):
            raise InputError("sense must be min or max")
        if not self.constraints:
            raise InputError("objective-only programs are rejected")
        for j in self.objective:
            if not 0 <= j < nvars:
                raise InputError(f"objective index {j} out of range")
        for c in self.constraints:
            if c.rel not in (LE, EQ, GE):
                raise InputError(f"bad relation {c.rel!r}")
            for j in c.coeffs:
                if not 0 <= j < nvars:
                    raise InputError(f"constraint {c.name!r} index {j} out of range")

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def ncons(self) -> int:
        return len(self.constraints)


class LPBuilder:
    def __init__(self, sense: str = "min"):
        self.sense = sense
        self.names: list[str] = []
        self.signs: list[str] = []
        self.tags: list = []
        self.objective: dict[int, Fraction] = {}
        self.constraints: list[Constraint] = []
        self.con_tags: list = []
        self._index: dict[str, int] = {}

    def var(self, name: str, cost=0, sign: str = NONNEG, tag=None) -> int:
        if name in self._index:
            raise InputError(f"duplicate variable {name!r}")
        j = len(self.names)
        self._index[name] = j
        self.names.append(name)
        self.signs.append(sign)
        self.tags.append(tag)
        cost = as_rational(cost)
        if cost:
            self.objective[j] = cost
        return j

    def add(self, coeffs: Mapping[int, Fraction], rel: str, rhs, name: str = "", tag=None):
        clean = {j: as_rational(v) for j, v in coeffs.items() if v}
        self.constraints.append(Constraint(clean, rel, as_rational(rhs), name or f"c{len(self.constraints)}"))
        self.con_tags.append(tag)

    def build(self) -> LinearProgram:
        return LinearProgram(tuple(self.names), tuple(self.signs), self.sense, dict(self.objective),
                             tuple(self.constraints), tuple(self.tags), tuple(self.con_tags))


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    primal_values: list = field(default_factory=list)
    dual_values: list = field(default_factory=list)
    objective: Optional[Fraction] = None
    pivots: int = 0
    max_bits: int = 0


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _mpq(v: Fraction):
    return mpq(v.numerator, v.denominator)


def solve(lp: LinearProgram, caps: Caps = DEFAULT_CAPS) -> LPSolution:
    """Solve exactly; ``optimal`` solutions come with a verified dual."""
    if lp.nvars > caps.max_lp_vars:
        raise ResourceError(f"{lp.nvars} variables exceed max_lp_vars cap {caps.max_lp_vars}")
    started = time.monotonic()
    m = lp.ncons
    flip = -1 if lp.sense == "max" else 1

    # columns of the standard form: structural (free vars split), slack/surplus, artificial
    col_rows: list[list[int]] = []
    col_vals: list[list] = []
    cost: list = []
    origin: list[tuple[int, int]] = []  # (original var, +1/-1) for structural columns
    per_var: list[list[tuple[int, object]]] = [[] for _ in range(lp.nvars)]

    row_sign = []
    rhs = []
    rels = []
    for i, con in enumerate(lp.constraints):
        s = -1 if (con.rhs < 0 or (con.rhs == 0 and con.rel == GE)) else 1
        row_sign.append(s)
        rhs.append(_mpq(con.rhs) * s)
        rel = con.rel
        if s < 0 and rel != EQ:
            rel = LE if rel == GE else GE
        rels.append(rel)
        for j, a in con.coeffs.items():
            per_var[j].append((i, _mpq(a) * s))

    for j in range(lp.nvars):
        c = _mpq(lp.objective.get(j, Fraction(0))) * flip
        entries = per_var[j]
        col_rows.append([r for r, _ in entries])
        col_vals.append([a for _, a in entries])
        cost.append(c)
        origin.append((j, 1))
        if lp.signs[j] == FREE:
            col_rows.append([r for r, _ in entries])
            col_vals.append([-a for _, a in entries])
            cost.append(-c)
            origin.append((j, -1))
    nstruct = len(col_rows)

    basis = [0] * m
    unit_col = [0] * m  # column that starts as e_i: its B^-1 image gives row i of the inverse
    for i, rel in enumerate(rels):
        if rel == EQ:
            continue
        col_rows.append([i])
        col_vals.append([mpq(1) if rel == LE else mpq(-1)])
        cost.append(mpq(0))
        if rel == LE:
            basis[i] = len(col_rows) - 1
            unit_col[i] = basis[i]
    first_art = len(col_rows)
    for i, rel in enumerate(rels):
        if rel == LE:
            continue
        col_rows.append([i])
        col_vals.append([mpq(1)])
        cost.append(mpq(0))
        basis[i] = len(col_rows) - 1
        unit_col[i] = basis[i]
    ncols = len(col_rows)

    binv = [[mpq(1) if r == k else mpq(0) for k in range(m)] for r in range(m)]
    xb = list(rhs)
    is_basic = [False] * ncols
    for b in basis:
        is_basic[b] = True
    pivots = 0
    max_bits = 0

    def price(c_vec, allowed_end):
        y = [mpq(0)] * m
        for r in range(m):
            cb = c_vec[basis[r]]
            if cb:
                row = binv[r]
                for k in range(m):
                    if row[k]:
                        y[k] += cb * row[k]
        for j in range(allowed_end):
            if is_basic[j]:
                continue
            d = c_vec[j]
            for r, a in zip(col_rows[j], col_vals[j]):
                if y[r]:
                    d -= y[r] * a
            if d < 0:
                return j, y
        return None, y

    def column(j):
        u = [mpq(0)] * m
        for r, a in zip(col_rows[j], col_vals[j]):
            for k in range(m):
                if binv[k][r]:
                    u[k] += binv[k][r] * a
        return u

    def pivot(p, q, u):
        nonlocal pivots, max_bits
        pivots += 1
        if pivots > caps.max_pivots:
            raise ResourceError(f"pivot limit {caps.max_pivots} reached")
        if caps.time_budget is not None and time.monotonic() - started > caps.time_budget:
            raise ResourceError(f"time budget {caps.time_budget}s exhausted")
        up = u[p]
        prow = [v / up for v in binv[p]]
        binv[p] = prow
        xb[p] = xb[p] / up
        nz = [k for k in range(m) if prow[k]]
        for r in range(m):
            ur = u[r]
            if r == p or not ur:
                continue
            row = binv[r]
            for k in nz:
                row[k] -= ur * prow[k]
            xb[r] -= ur * xb[p]
        is_basic[basis[p]] = False
        basis[p] = q
        is_basic[q] = True
        for v in prow:
            if v:
                max_bits = max(max_bits, v.numerator.bit_length() + v.denominator.bit_length())

    def run(c_vec, allowed_end):
        while True:
            q, _ = price(c_vec, allowed_end)
            if q is None:
                return "optimal"
            u = column(q)
            best = None
            for r in range(m):
                if u[r] > 0:
                    ratio = xb[r] / u[r]
                    if best is None or ratio < best[0] or (ratio == best[0] and basis[r] < basis[best[1]]):
                        best = (ratio, r)
            if best is None:
                return "unbounded"
            pivot(best[1], q, u)

    # phase 1
    if first_art < ncols:
        c1 = [mpq(0)] * first_art + [mpq(1)] * (ncols - first_art)
        run(c1, first_art)
        infeas = sum((xb[r] for r in range(m) if basis[r] >= first_art), mpq(0))
        if infeas > 0:
            return LPSolution("infeasible", pivots=pivots, max_bits=max_bits)
        for p in range(m):
            if basis[p] < first_art:
                continue
            row = binv[p]
            for j in range(first_art):
                if is_basic[j]:
                    continue
                val = sum((row[r] * a for r, a in zip(col_rows[j], col_vals[j]) if row[r]), mpq(0))
                if val:
                    pivot(p, j, column(j))
                    break
            # no candidate: the row is redundant and its artificial stays at zero

    c2 = cost + [mpq(0)] * (ncols - len(cost))
    status = run(c2, first_art)
    if status == "unbounded":
        return LPSolution("unbounded", pivots=pivots, max_bits=max_bits)

    values = [Fraction(0)] * lp.nvars
    for r in range(m):
        j = basis[r]
        if j < nstruct and xb[r]:
            var, sgn = origin[j]
            values[var] += _to_fraction(xb[r]) * sgn
    y = [mpq(0)] * m
    for r in range(m):
        cb = c2[basis[r]]
        if cb:
            for k in range(m):
                if binv[r][k]:
                    y[k] += cb * binv[r][k]
    duals = [_to_fraction(y[i]) * row_sign[i] * flip for i in range(m)]
    obj = sum((lp.objective.get(j, Fraction(0)) * v for j, v in enumerate(values)), Fraction(0))
    sol = LPSolution("optimal", values, duals, obj, pivots, max_bits)
    _certify(lp, sol)
    return sol


def _certify(lp: LinearProgram, sol: LPSolution) -> None:
    primal = check_point(lp, dict(zip(lp.names, sol.primal_values)), "primal")
    dual = check_point(lp, {c.name: v for c, v in zip(lp.constraints, sol.dual_values)}, "dual")
    if not primal.feasible or not dual.feasible or primal.objective != dual.objective:
        raise InvariantError(
            f"solver certificate failed: primal ok={primal.feasible}, dual ok={dual.feasible}, "
            f"objectives {primal.objective} vs {dual.objective}")


@dataclass
class Violation:
    where: str
    slack: Fraction

    def __str__(self):
        return f"{self.where}: slack {fmt_rational(self.slack)}"


@dataclass
class FeasibilityReport:
    side: str
    objective: Fraction
    violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def feasible(self) -> bool:
        return not self.violations


def _lookup(names: Sequence[str], point: Mapping[str, object], what: str) -> dict[int, Fraction]:
    index = {n: i for i, n in enumerate(names)}
    out = {}
    for key, v in point.items():
        if key not in index:
            raise InputError(f"unknown {what} {key!r}")
        out[index[key]] = as_rational(v)
    return out


def check_point(lp: LinearProgram, point: Mapping[str, object], side: str) -> FeasibilityReport:
    """Exact feasibility check; unmentioned entries are zero.

    Primal points are keyed by variable name, dual points by constraint name.
    Slack is ``rhs - lhs`` on ``<=``/``=`` rows and ``lhs - rhs`` on ``>=`` rows,
    so a violation always shows up as a negative (or, for ``=``, nonzero) slack.
    """
    if side == "primal":
        vals = _lookup(lp.names, point, "variable")
        report = FeasibilityReport("primal", sum(
            (lp.objective.get(j, Fraction(0)) * v for j, v in vals.items()), Fraction(0)))
        for j, v in vals.items():
            if lp.signs[j] == NONNEG and v < 0:
                report.violations.append(Violation(f"sign of {lp.names[j]}", v))
        for con in lp.constraints:
            lhs = sum((a * vals[j] for j, a in con.coeffs.items() if j in vals), Fraction(0))
            _record(report, con.name, con.rel, lhs, con.rhs)
        report.checked = lp.ncons
        return report
    if side != "dual":
        raise InputError("side must be primal or dual")
    names = [c.name for c in lp.constraints]
    y = _lookup(names, point, "constraint")
    report = FeasibilityReport("dual", sum((lp.constraints[i].rhs * v for i, v in y.items()), Fraction(0)))
    want_pos = {"min": GE, "max": LE}[lp.sense]
    for i, v in y.items():
        rel = lp.constraints[i].rel
        if rel == EQ:
            continue
        if (rel == want_pos and v < 0) or (rel != want_pos and v > 0):
            report.violations.append(Violation(f"sign of dual {names[i]}", v if v < 0 else -v))
    col = [Fraction(0)] * lp.nvars
    for i, v in y.items():
        for j, a in lp.constraints[i].coeffs.items():
            col[j] += a * v
    for j in range(lp.nvars):
        c = lp.objective.get(j, Fraction(0))
        if lp.signs[j] == FREE:
            rel = EQ
        else:
            rel = LE if lp.sense == "min" else GE
        _record(report, f"column {lp.names[j]}", rel, col[j], c)
    report.checked = lp.nvars
    return report


def _record(report: FeasibilityReport, where: str, rel: str, lhs: Fraction, rhs: Fraction) -> None:
    if rel == GE:
        slack = lhs - rhs
        bad = slack < 0
    else:
        slack = rhs - lhs
        bad = slack < 0 if rel == LE else slack != 0
    if bad:
        report.violations.append(Violation(where, slack))


def weak_duality_gap(lp: LinearProgram, primal_point, dual_point) -> Fraction:
    p = check_point(lp, primal_point, "primal")
    if not p.feasible:
        raise InvariantError(f"primal point infeasible: {p.violations[0]}", p)
    d = check_point(lp, dual_point, "dual")
    if not d.feasible:
        raise InvariantError(f"dual point infeasible: {d.violations[0]}", d)
    gap = p.objective - d.objective if lp.sense == "min" else d.objective - p.objective
    if gap < 0:
        raise InvariantError(f"weak duality violated: gap {gap}")
    return gap


def solution_point(lp: LinearProgram, sol: LPSolution, side: str) -> dict[str, Fraction]:
    if side == "primal":
        return {n: v for n, v in zip(lp.names, sol.primal_values) if v}
    return {c.name: v for c, v in zip(lp.constraints, sol.dual_values) if v}


def dump_lp(lp: LinearProgram) -> str:
    """Plain-text rendering: one constraint per line, fractions as ``p/q``."""

    def term_list(coeffs):
        parts = [f"{fmt_rational(a)} {lp.names[j]}" for j, a in sorted(coeffs.items())]
        return " + ".join(parts) if parts else "0"

    lines = [f"{lp.sense}: {term_list(lp.objective)}"]
    for c in lp.constraints:
        lines.append(f"{c.name}: {term_list(c.coeffs)} {c.rel} {fmt_rational(c.rhs)}")
    free = [n for n, s in zip(lp.names, lp.signs) if s == FREE]
    if free:
        lines.append("free: " + " ".join(free))
    return "\n".join(lines) + "\n"
